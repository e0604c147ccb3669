#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "datamarket/broker/book.hpp"
#include "datamarket/common/money.hpp"
#include "datamarket/ledger/ledger.hpp"
#include "datamarket/ledger/serialization.hpp"

namespace oracle {

using datamarket::Money;
using datamarket::Tick;

// Delivery and payment schedule of one subscription, computed by walking
// the sample grid one slot at a time.
struct Schedule {
    std::int64_t transfers = 0;
    std::int64_t full_windows = 0;
    std::int64_t remainder_units = 0;
    Money revenue;
};
Schedule enumerate_schedule(Tick start, Tick end, Tick frequency, std::int64_t granularity, Money cost);

// Same walk, but the given window is reported with a wrong count by one
// party: windows before it are paid, nothing after it is.
Schedule enumerate_tampered(Tick start, Tick end, Tick frequency, std::int64_t granularity, Money cost,
                            std::int64_t tampered_window);

// All (query, listing) pairs found by checking every combination against a
// direct transcription of the four matching clauses.
std::set<std::pair<std::uint64_t, std::uint64_t>> brute_force_pairs(const datamarket::broker::Book& book);

// Re-executes an exported chain from its genesis. Each block must link to
// its predecessor, carry a valid digest and reproduce its recorded state
// digest. Returns the final state, or nullopt with `error` set.
struct Replay {
    std::optional<datamarket::ledger::WorldState> state;
    std::string error;
    std::vector<std::map<std::string, std::string>> contract_digests_per_block;
};
Replay replay_chain(const datamarket::ledger::ChainDump& dump);

}  // namespace oracle
