#include "oracles.hpp"

#include <cmath>

#include "datamarket/common/crypto.hpp"

namespace oracle {

using namespace datamarket;

Schedule enumerate_schedule(Tick start, Tick end, Tick frequency, std::int64_t granularity, Money cost) {
    Schedule s;
    std::int64_t in_window = 0;
    for (Tick t = start; t < end; t += frequency) {
        ++s.transfers;
        if (++in_window == granularity) {
            ++s.full_windows;
            s.revenue += cost * granularity;
            in_window = 0;
        }
    }
    s.remainder_units = in_window;
    s.revenue += cost * in_window;
    return s;
}

Schedule enumerate_tampered(Tick start, Tick end, Tick frequency, std::int64_t granularity, Money cost,
                            std::int64_t tampered_window) {
    Schedule s;
    std::int64_t in_window = 0;
    std::int64_t window = 1;
    for (Tick t = start; t < end; t += frequency) {
        ++s.transfers;
        if (++in_window == granularity) {
            if (window == tampered_window) return s;
            ++s.full_windows;
            s.revenue += cost * granularity;
            in_window = 0;
            ++window;
        }
    }
    return s;
}

std::set<std::pair<std::uint64_t, std::uint64_t>> brute_force_pairs(const broker::Book& book) {
    std::set<std::pair<std::uint64_t, std::uint64_t>> out;
    for (const auto& [qid, q] : book.queries) {
        for (const auto& [lid, l] : book.listings) {
            if (q.data_type != l.data_type) continue;
            if ((q.data_age == broker::DataAge::archived) != l.archived) continue;
            if (l.unit_cost.micros() > q.budget.micros()) continue;
            if (l.sampling_frequency > q.frequency_required) continue;
            if (!std::isinf(q.radius)) {
                double dist = std::hypot(q.location.x - l.location.x, q.location.y - l.location.y);
                // Compare squared values so boundary points agree with exact arithmetic.
                if (dist * dist > q.radius * q.radius + 1e-9) continue;
            }
            out.emplace(to_underlying(qid), to_underlying(lid));
        }
    }
    return out;
}

Replay replay_chain(const ledger::ChainDump& dump) {
    Replay r;
    auto state = dump.genesis.initial_state();
    crypto::Digest prev = state.digest();
    std::uint64_t height = 0;
    for (const auto& block : dump.blocks) {
        if (block.height != height) {
            r.error = "height gap at " + std::to_string(height);
            return r;
        }
        if (block.prev_digest != prev) {
            r.error = "broken link at height " + std::to_string(height);
            return r;
        }
        if (ledger::compute_block_digest(block) != block.digest) {
            r.error = "block digest mismatch at height " + std::to_string(height);
            return r;
        }
        for (const auto& tx : block.txs) {
            if (!tx.signature_valid()) {
                r.error = "bad signature in block " + std::to_string(height);
                return r;
            }
            ledger::apply_transaction(state, tx, block.time);
        }
        if (state.digest() != block.state_digest) {
            r.error = "state digest mismatch at height " + std::to_string(height);
            return r;
        }
        std::map<std::string, std::string> digests;
        for (const auto& [addr, c] : state.contracts) digests[addr.str()] = crypto::to_hex(c.digest());
        r.contract_digests_per_block.push_back(std::move(digests));
        prev = block.digest;
        ++height;
    }
    r.state = std::move(state);
    return r;
}

}  // namespace oracle
