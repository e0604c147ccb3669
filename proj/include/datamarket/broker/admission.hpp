#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "datamarket/common/types.hpp"

namespace datamarket::broker {

enum class Vote { accept, challenge };

struct AdmissionOutcome {
    bool admitted = false;
    std::int64_t accept_weight = 0;
    std::int64_t total_weight = 0;
    // Voters that hold no fee token; their ballots do not count.
    std::vector<BrokerId> ignored;
};

// Token-weighted vote on a candidate broker. Admitted only on a strict
// majority of the weight that actually voted. Throws std::invalid_argument if
// the candidate is already a broker.
AdmissionOutcome vote_broker_admission(BrokerId candidate, const std::map<BrokerId, Vote>& votes,
                                       const std::map<BrokerId, std::int64_t>& tokens,
                                       const std::set<BrokerId>& current_brokers);

}  // namespace datamarket::broker
