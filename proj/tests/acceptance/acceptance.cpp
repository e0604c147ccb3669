// Runs every acceptance criterion, prints one PASS/FAIL line for each and
// exits non-zero when any of them fails.

#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "datamarket/broker/matching.hpp"
#include "datamarket/contracts/dsc.hpp"
#include "datamarket/harness/simulation.hpp"
#include "datamarket/ledger/serialization.hpp"
#include "datamarket/trading/negotiation.hpp"
#include "generators.hpp"
#include "market.hpp"
#include "oracles.hpp"

using namespace datamarket;
using namespace datamarket::harness;

namespace {

// Collects the first few reasons a criterion failed.
struct Verdict {
    std::vector<std::string> problems;

    void expect(bool ok, const std::string& what) {
        if (!ok && problems.size() < 8) problems.push_back(what);
    }
    bool passed() const { return problems.empty(); }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Scenario scenario(const std::string& name) { return load_scenario_file(testkit::scenario_path(name)); }

const ParticipantRow* find_participant(const RunReport& r, const std::string& name) {
    for (const auto& p : r.participants)
        if (p.name == name) return &p;
    return nullptr;
}

std::string show(Money m) { return m.to_string(); }

// 1. The one-month subscription delivers, meters and settles exactly as the
// sample schedule dictates.
std::string lifecycle(Verdict& v) {
    auto s = scenario("month.yaml");
    auto t0 = Clock::now();
    auto r = run_scenario(s);
    double elapsed = seconds_since(t0);

    const auto& q = s.queries.at(0);
    auto expected = oracle::enumerate_schedule(*q.start, *q.end, q.frequency_required, *q.granularity,
                                               s.listings.at(0).unit_cost);
    v.expect(r.contracts.size() == 1, "expected one contract, got " + std::to_string(r.contracts.size()));
    if (r.contracts.size() != 1) return {};
    const auto& c = r.contracts.front();
    v.expect(c.transfers == expected.transfers, "transfers " + std::to_string(c.transfers));
    v.expect(c.transfers == 1488, "transfers differ from 1488");
    v.expect(c.full_settlements == expected.full_windows && c.full_settlements == 14,
             "full settlements " + std::to_string(c.full_settlements));
    v.expect(c.partial_settlements == 1 && expected.remainder_units == 88 &&
                 c.settled_units - c.full_settlements * *q.granularity == 88,
             "partial settlement of 88 units missing");
    v.expect(c.revenue == expected.revenue && c.revenue == Money::parse("29.76"), "revenue " + show(c.revenue));
    v.expect(c.disputes == 0, "disputes " + std::to_string(c.disputes));
    v.expect(c.status == "completed", "status " + c.status);

    Money fee = s.economics.broker_fee;
    contracts::SubscriptionEntry entry;
    entry.data_type = q.data_type;
    entry.start_time = *q.start;
    entry.end_time = *q.end;
    entry.measurement_frequency = q.frequency_required;
    entry.cost = s.listings[0].unit_cost;
    entry.payment_granularity = *q.granularity;
    auto dep = contracts::minimum_deposit(entry, fee);
    v.expect(c.provider_refund == dep - fee, "provider refund " + show(c.provider_refund) + " vs " + show(dep - fee));
    v.expect(c.consumer_refund == dep - fee, "consumer refund " + show(c.consumer_refund) + " vs " + show(dep - fee));

    const auto* prov = find_participant(r, "sensor-co");
    const auto* cons = find_participant(r, "city-lab");
    v.expect(prov && prov->balance == Money::units(100) + c.revenue - fee, "provider final balance");
    v.expect(cons && cons->balance == Money::units(100) - c.revenue - fee, "consumer final balance");
    v.expect(elapsed < 10.0, "runtime " + std::to_string(elapsed) + " s");

    std::ostringstream out;
    out << "transfers=" << c.transfers << " full=" << c.full_settlements << " partial=" << c.partial_settlements
        << " revenue=" << show(c.revenue) << " refunds=" << show(c.provider_refund) << "/" << show(c.consumer_refund)
        << " time=" << elapsed << "s";
    return out.str();
}

// 2. A counter reported wrongly in window k halts payment at window k.
std::string counter_tamper(Verdict& v) {
    std::ostringstream out;
    for (std::int64_t k : {1, 7, 14}) {
        auto s = scenario("month.yaml");
        s.faults.push_back({FaultKind::counter_tamper, "city-lab", 0, {{"window", std::to_string(k)}}});
        auto r = run_scenario(s);
        const auto& q = s.queries.at(0);
        auto expected = oracle::enumerate_tampered(*q.start, *q.end, q.frequency_required, *q.granularity,
                                                   s.listings.at(0).unit_cost, k);
        std::string tag = "k=" + std::to_string(k) + ": ";
        if (r.contracts.size() != 1) {
            v.expect(false, tag + "expected one contract");
            continue;
        }
        const auto& c = r.contracts.front();
        v.expect(c.full_settlements == k - 1 && expected.full_windows == k - 1,
                 tag + "paid windows " + std::to_string(c.full_settlements));
        v.expect(c.partial_settlements == 0, tag + "unexpected partial settlement");
        v.expect(c.revenue == expected.revenue, tag + "revenue " + show(c.revenue));
        v.expect(c.status == "disputed" && c.disputes == 1, tag + "status " + c.status);
        v.expect(c.dispute_cause == "counter_mismatch", tag + "cause " + c.dispute_cause);
        v.expect(c.frozen > Money{} && c.provider_refund == Money{} && c.consumer_refund == Money{},
                 tag + "escrow not frozen");
        for (const char* who : {"sensor-co", "city-lab"}) {
            const auto* p = find_participant(r, who);
            v.expect(p && p->reputation < "1.00", tag + who + " reputation not penalised");
        }
        for (const auto& line : r.balance_log) {
            auto bar = line.find('|');
            Tick t = std::stoll(line.substr(0, bar));
            v.expect(t <= c.dispute_tick, tag + "balance moved after dispute: " + line);
        }
        out << "k=" << k << ":paid=" << c.full_settlements << ",frozen=" << show(c.frozen) << " ";
    }
    return out.str();
}

// 3. Indexed matching returns exactly the brute-force pair set.
std::string matching(Verdict& v) {
    testkit::Gen g(20180520);
    auto t0 = Clock::now();
    std::size_t pairs = 0;
    for (int i = 0; i < 200; ++i) {
        int nl = static_cast<int>(g.range(0, 500));
        int nq = static_cast<int>(g.range(0, 500));
        if (i < 5) nl = nq = 500;
        auto book = testkit::random_book(g, nl, nq);
        auto got = testkit::as_ids(broker::match_pairs(book));
        auto want = oracle::brute_force_pairs(book);
        pairs += want.size();
        v.expect(got == want, "book " + std::to_string(i) + " differs (" + std::to_string(got.size()) + " vs " +
                                  std::to_string(want.size()) + ")");
    }
    double elapsed = seconds_since(t0);
    v.expect(elapsed < 60.0, "runtime " + std::to_string(elapsed) + " s");
    return "books=200 pairs=" + std::to_string(pairs) + " time=" + std::to_string(elapsed) + "s";
}

// 4. Funds are conserved at every tick of a faulty 50-contract run.
std::string conservation(Verdict& v) {
    auto s = scenario("mixed_faults.yaml");
    RunReport r;
    try {
        r = run_scenario(s);
    } catch (const InvariantViolation& e) {
        v.expect(false, e.what());
        return {};
    }
    v.expect(r.contracts.size() == 50, "contracts " + std::to_string(r.contracts.size()));
    v.expect(r.ticks_checked == s.duration, "ticks checked " + std::to_string(r.ticks_checked));
    v.expect(r.max_abs_residual == Money{}, "max residual " + show(r.max_abs_residual));
    v.expect(r.residual == Money{}, "final residual " + show(r.residual));
    std::int64_t disputed = 0;
    for (const auto& c : r.contracts) disputed += c.disputes;
    return "contracts=" + std::to_string(r.contracts.size()) + " disputed=" + std::to_string(disputed) +
           " ticks=" + std::to_string(r.ticks_checked) + " max_residual=" + show(r.max_abs_residual);
}

// 5. Losing one of three brokers changes nothing about which deals complete
// or what they pay.
using Outcome = std::tuple<std::string, std::int64_t, std::int64_t, std::int64_t, std::string, std::string,
                           std::string, std::string>;
std::map<std::tuple<std::string, std::string, std::string, std::string>, Outcome> outcomes(const RunReport& r) {
    std::map<std::tuple<std::string, std::string, std::string, std::string>, Outcome> out;
    for (const auto& c : r.contracts)
        out[{c.provider, c.consumer, c.listing, c.query}] =
            Outcome{c.status, c.transfers, c.full_settlements, c.partial_settlements, show(c.revenue),
                    show(c.provider_refund), show(c.consumer_refund), show(c.fees)};
    return out;
}

std::string failover(Verdict& v) {
    auto crashed = scenario("failover.yaml");
    auto clean = crashed;
    std::erase_if(clean.faults, [](const FaultSpec& f) { return f.kind == FaultKind::broker_crash; });
    v.expect(clean.faults.size() < crashed.faults.size(), "scenario has no crash fault");
    auto a = run_scenario(crashed);
    auto b = run_scenario(clean);
    auto oa = outcomes(a), ob = outcomes(b);
    v.expect(!oa.empty(), "no contracts");
    v.expect(oa.size() == a.contracts.size(), "duplicate deals in crash run");
    v.expect(oa == ob, "outcomes differ: " + std::to_string(oa.size()) + " vs " + std::to_string(ob.size()));
    std::size_t completed = 0;
    for (const auto& [_, o] : oa) completed += std::get<0>(o) == "completed";
    v.expect(completed == oa.size(), "not every deal completed");
    const BrokerRow* b2 = nullptr;
    for (const auto& row : a.brokers)
        if (row.id == 2) b2 = &row;
    v.expect(b2 && !b2->live, "broker 2 still live after crash");
    return "deals=" + std::to_string(oa.size()) + " completed=" + std::to_string(completed);
}

// 6. Same scenario and seed, same bytes, for every scenario used here.
std::string determinism(Verdict& v) {
    std::string digests;
    for (const char* name :
         {"month.yaml", "month_tamper.yaml", "failover.yaml", "mixed_faults.yaml", "collusion.yaml"}) {
        auto s = scenario(name);
        auto first = run_scenario(s);
        for (int i = 0; i < 2; ++i) {
            auto again = run_scenario(s);
            std::string tag = std::string(name) + " run " + std::to_string(i + 2) + ": ";
            v.expect(again.chain_export == first.chain_export, tag + "chain export differs");
            v.expect(again.contracts_table() == first.contracts_table() &&
                         again.brokers_table() == first.brokers_table() &&
                         again.participants_table() == first.participants_table() &&
                         again.summary_table() == first.summary_table() &&
                         again.trade_trace == first.trade_trace && again.match_audit == first.match_audit &&
                         again.subscription_tables == first.subscription_tables &&
                         again.lookup_table == first.lookup_table,
                     tag + "metrics differ");
            v.expect(again.digest() == first.digest(), tag + "report digest differs");
        }
        digests += std::string(digests.empty() ? "" : " ") + crypto::to_hex(first.digest()).substr(0, 8);
    }
    return "scenarios=5 runs=3 digests=" + digests;
}

// 7. The exported block log alone rebuilds every contract.
std::string replay(Verdict& v) {
    std::size_t contracts_checked = 0, blocks = 0;
    for (const char* name :
         {"month.yaml", "month_tamper.yaml", "failover.yaml", "mixed_faults.yaml", "collusion.yaml"}) {
        auto r = run_scenario(scenario(name));
        std::stringstream buf;
        ledger::write_chain_jsonl(buf, r.genesis, r.blocks_full);
        auto dump = ledger::read_chain_jsonl(buf);
        auto rep = oracle::replay_chain(dump);
        v.expect(rep.state.has_value(), std::string(name) + ": " + rep.error);
        if (!rep.state) continue;
        v.expect(!rep.contract_digests_per_block.empty(), std::string(name) + ": no blocks");
        if (rep.contract_digests_per_block.empty()) continue;
        const auto& last = rep.contract_digests_per_block.back();
        v.expect(last == r.contract_digests, std::string(name) + ": contract digests differ");
        v.expect(crypto::to_hex(rep.state->digest()) == r.final_state_digest,
                 std::string(name) + ": final state digest differs");
        contracts_checked += last.size();
        blocks += dump.blocks.size();
    }
    return "blocks=" + std::to_string(blocks) + " contracts=" + std::to_string(contracts_checked);
}

// 8. Every biased match round is flagged on chain in the tick it was anchored.
std::string collusion(Verdict& v) {
    Simulation sim(scenario("collusion.yaml"));
    auto r = sim.run();
    const auto& state = sim.ledger().state();
    v.expect(!r.collusion_rounds.empty(), "no biased rounds happened");
    std::map<std::int64_t, Tick> flag_tick;
    for (const auto& b : sim.ledger().chain())
        for (const auto& tx : b.txs)
            if (tx.target == Address::anchor() && tx.abi == "FlagMatchRound" && !flag_tick.count(arg_int(tx.args, 0)))
                flag_tick[arg_int(tx.args, 0)] = b.time;
    for (auto round : r.collusion_rounds) {
        auto it = state.anchors.find(round);
        std::string tag = "round " + std::to_string(round) + ": ";
        if (it == state.anchors.end()) {
            v.expect(false, tag + "not anchored");
            continue;
        }
        v.expect(it->second.flagged(), tag + "not flagged");
        for (const auto& [peer, digest] : it->second.flags)
            v.expect(digest != it->second.match_digest, tag + "flag digest equals anchored digest");
        v.expect(flag_tick.count(round) && flag_tick[round] == it->second.time, tag + "flag not in anchor tick");
    }
    return "biased_rounds=" + std::to_string(r.collusion_rounds.size()) +
           " flagged=" + std::to_string(r.flagged_rounds);
}

// 9. Bilateral negotiations always end inside both reservation prices.
std::string negotiation(Verdict& v) {
    testkit::Gen g(5150);
    int accepted = 0, failed = 0, singles = 0;
    for (int i = 0; i < 1000; ++i) {
        auto role = g.coin() ? trading::RequesterRole::consumer : trading::RequesterRole::provider;
        std::size_t n = i % 4 == 0 ? 1 : static_cast<std::size_t>(g.range(2, 8));
        Money reservation = g.money(10'000, 100'000);
        std::vector<trading::Requestee> counterparts;
        std::vector<Money> reservations;
        for (std::size_t j = 0; j < n; ++j) {
            // Quotes sit on the counterpart's side of its own reservation.
            Money own = g.money(10'000, 100'000);
            Money slack = g.money(0, 20'000);
            Money quote = role == trading::RequesterRole::consumer ? own + slack : own - slack;
            if (quote < Money{}) quote = Money{};
            crypto::PublicKey pk;
            pk.bytes[0] = static_cast<std::uint8_t>(j + 1);
            counterparts.push_back({pk, quote});
            reservations.push_back(own);
        }
        auto opened = trading::start_negotiation({}, role, reservation, counterparts, 5);
        std::string tag = "negotiation " + std::to_string(i) + ": ";
        if (n == 1) {
            ++singles;
            bool affordable = role == trading::RequesterRole::consumer ? counterparts[0].quoted_price <= reservation
                                                                      : counterparts[0].quoted_price >= reservation;
            if (affordable)
                v.expect(opened.state == trading::NegotiationState::accepted && opened.round == 0 &&
                             opened.price == counterparts[0].quoted_price,
                         tag + "single counterpart not accepted at once");
            else
                v.expect(opened.state == trading::NegotiationState::failed, tag + "inadmissible single quote accepted");
        }
        auto done = trading::negotiate(opened, trading::default_requester_strategy(),
                                       trading::default_requestee_strategy(role, reservations));
        v.expect(done.state != trading::NegotiationState::open, tag + "still open");
        v.expect(done.round <= 5, tag + "rounds " + std::to_string(done.round));
        if (done.state == trading::NegotiationState::accepted) {
            ++accepted;
            Money provider_min, consumer_budget;
            if (role == trading::RequesterRole::consumer) {
                consumer_budget = reservation;
                provider_min = n == 1 ? counterparts[0].quoted_price : reservations[*done.winner];
            } else {
                provider_min = reservation;
                consumer_budget = n == 1 ? counterparts[0].quoted_price : reservations[*done.winner];
            }
            v.expect(done.price >= provider_min && done.price <= consumer_budget,
                     tag + "price " + show(done.price) + " outside [" + show(provider_min) + ", " +
                         show(consumer_budget) + "]");
        } else {
            ++failed;
        }
    }
    return "runs=1000 accepted=" + std::to_string(accepted) + " failed=" + std::to_string(failed) +
           " single=" + std::to_string(singles);
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<std::string(Verdict&)> check;
    };
    const std::vector<Criterion> criteria{
        {"subscription_lifecycle", lifecycle}, {"counter_tamper", counter_tamper},
        {"matching_vs_brute_force", matching}, {"conservation_every_tick", conservation},
        {"broker_failover", failover},         {"deterministic_replay", determinism},
        {"chain_replay", replay},              {"collusion_flagged", collusion},
        {"negotiation_bounds", negotiation},
    };
    int failures = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        Verdict v;
        std::string detail;
        try {
            detail = c.check(v);
        } catch (const std::exception& e) {
            v.problems.push_back(std::string("exception: ") + e.what());
        }
        std::printf("%s %d %s %s\n", v.passed() ? "PASS" : "FAIL", index, c.name, detail.c_str());
        for (const auto& p : v.problems) std::printf("    %s\n", p.c_str());
        failures += v.passed() ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
