#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "datamarket/common/rng.hpp"
#include "datamarket/common/types.hpp"

namespace datamarket::harness {

struct SimEvent {
    Tick time = 0;
    std::uint64_t seq = 0;
    std::string target;
    std::string label;
    std::function<void()> action;
};

// Single-threaded discrete-event kernel. Events run in (time, seq) order and
// seq is unique for the whole run, so equal-time events keep their
// scheduling order.
class Kernel {
public:
    explicit Kernel(std::uint64_t seed) : rng_(seed) {}

    std::uint64_t schedule(Tick at, std::string target, std::string label, std::function<void()> action);

    bool has_due(Tick now) const { return !queue_.empty() && queue_.top().time <= now; }
    std::optional<Tick> next_time() const;

    // Runs every event due at or before `now`, including those scheduled by
    // the events themselves. Returns how many ran.
    std::size_t run_due(Tick now);

    Tick now() const { return now_; }
    std::uint64_t executed() const { return executed_; }

    // Per-actor random streams derived from the run seed.
    RngStreams& rng() { return rng_; }

    void enable_log(bool on) { log_enabled_ = on; }
    // "time|seq|target|label" for every executed event, when enabled.
    const std::vector<std::string>& log() const { return log_; }

private:
    struct Later {
        bool operator()(const SimEvent& a, const SimEvent& b) const {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };

    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
    std::uint64_t next_seq_ = 0;
    std::uint64_t executed_ = 0;
    Tick now_ = 0;
    RngStreams rng_;
    bool log_enabled_ = false;
    std::vector<std::string> log_;
};

}  // namespace datamarket::harness
