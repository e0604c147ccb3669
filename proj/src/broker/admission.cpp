#include "datamarket/broker/admission.hpp"

#include <spdlog/spdlog.h>

namespace datamarket::broker {

AdmissionOutcome vote_broker_admission(BrokerId candidate, const std::map<BrokerId, Vote>& votes,
                                       const std::map<BrokerId, std::int64_t>& tokens,
                                       const std::set<BrokerId>& current_brokers) {
    if (current_brokers.count(candidate)) throw std::invalid_argument("candidate is already a broker");
    AdmissionOutcome out;
    for (const auto& [voter, vote] : votes) {
        auto it = tokens.find(voter);
        std::int64_t weight = it == tokens.end() ? 0 : it->second;
        if (weight <= 0) {
            spdlog::warn("admission vote from broker {} ignored: holds no fee tokens", to_underlying(voter));
            out.ignored.push_back(voter);
            continue;
        }
        out.total_weight += weight;
        if (vote == Vote::accept) out.accept_weight += weight;
    }
    out.admitted = out.total_weight > 0 && out.accept_weight * 2 > out.total_weight;
    return out;
}

}  // namespace datamarket::broker
