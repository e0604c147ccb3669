#include "datamarket/harness/kernel.hpp"

#include <stdexcept>

namespace datamarket::harness {

std::uint64_t Kernel::schedule(Tick at, std::string target, std::string label, std::function<void()> action) {
    if (at < now_) throw std::logic_error("event '" + label + "' scheduled in the past");
    std::uint64_t seq = next_seq_++;
    queue_.push(SimEvent{at, seq, std::move(target), std::move(label), std::move(action)});
    return seq;
}

std::optional<Tick> Kernel::next_time() const {
    if (queue_.empty()) return std::nullopt;
    return queue_.top().time;
}

std::size_t Kernel::run_due(Tick now) {
    if (now < now_) throw std::logic_error("kernel time cannot go backwards");
    std::size_t ran = 0;
    while (has_due(now)) {
        SimEvent ev = queue_.top();
        queue_.pop();
        now_ = ev.time;
        if (log_enabled_)
            log_.push_back(std::to_string(ev.time) + '|' + std::to_string(ev.seq) + '|' + ev.target + '|' + ev.label);
        ev.action();
        ++ran;
        ++executed_;
    }
    now_ = now;
    return ran;
}

}  // namespace datamarket::harness
