#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "datamarket/harness/kernel.hpp"
#include "datamarket/harness/report.hpp"
#include "datamarket/harness/scenario.hpp"
#include "datamarket/harness/simulation.hpp"
#include "market.hpp"
#include "oracles.hpp"

using namespace datamarket;
using namespace datamarket::harness;

namespace {

const char* kMinimal = R"(
duration: 100
brokers:
  - { id: 1 }
participants:
  - { id: p, role: provider, balance: 10 }
  - { id: c, role: consumer, balance: 10 }
)";

Scenario month() { return load_scenario_file(testkit::scenario_path("month.yaml")); }

const ContractRow& only_contract(const RunReport& r) {
    REQUIRE(r.contracts.size() == 1);
    return r.contracts.front();
}

std::size_t count_kind(const RunReport& r, const std::string& kind) {
    std::size_t n = 0;
    for (const auto& line : r.trade_trace)
        if (line.find('|' + kind + '|') != std::string::npos) ++n;
    return n;
}

}  // namespace

TEST_CASE("kernel runs events in time then scheduling order") {
    Kernel k(1);
    std::vector<int> order;
    k.schedule(5, "a", "x", [&] { order.push_back(2); });
    k.schedule(1, "b", "y", [&] { order.push_back(1); });
    k.schedule(5, "c", "z", [&] {
        order.push_back(3);
        k.schedule(5, "c", "again", [&] { order.push_back(4); });
    });
    CHECK(k.next_time() == 1);
    k.run_due(10);
    CHECK(order == std::vector<int>{1, 2, 3, 4});
    CHECK(k.executed() == 4);
    CHECK_THROWS(k.schedule(3, "late", "past", [] {}));
}

TEST_CASE("load_scenario") {
    SUBCASE("minimal scenario loads") {
        auto s = load_scenario(kMinimal);
        CHECK(s.brokers.size() == 1);
        CHECK(s.participants.size() == 2);
        CHECK(s.duration == 100);
    }
    SUBCASE("unknown provider is reported with its position") {
        std::string text = std::string(kMinimal) +
                           "listings:\n  - { provider: ghost, data_type: T, unit_cost: 0.1, sampling_frequency: 1 }\n";
        try {
            load_scenario(text);
            FAIL("expected an error");
        } catch (const ScenarioError& e) {
            CHECK(e.line() == 9);
            CHECK(std::string(e.what()).find("ghost") != std::string::npos);
        }
    }
    SUBCASE("duplicate participant id") {
        std::string text = std::string(kMinimal) + "  - { id: p, role: consumer }\n";
        CHECK_THROWS_AS(load_scenario(text), ScenarioError);
    }
    SUBCASE("unknown keys and bad values") {
        CHECK_THROWS_AS(load_scenario(std::string(kMinimal) + "colour: blue\n"), ScenarioError);
        CHECK_THROWS_AS(load_scenario("duration: 10\nbrokers: []\n"), ScenarioError);
        CHECK_THROWS_AS(load_scenario(std::string(kMinimal) + "faults:\n  - { kind: meteor, target: p }\n"),
                        ScenarioError);
        CHECK_THROWS_AS(load_scenario(std::string(kMinimal) + "faults:\n  - { kind: broker_crash, target: '7' }\n"),
                        ScenarioError);
        CHECK_THROWS_AS(load_scenario("duration: [1\n"), ScenarioError);
    }
    SUBCASE("calendar times and durations") {
        auto s = month();
        CHECK(s.queries.at(0).start == 1440);
        CHECK(s.queries.at(0).end == 1440 + 31 * 1440);
        CHECK(s.listings.at(0).sampling_frequency == 30);
        CHECK(s.listings.at(0).min_price == Money::parse("0.02"));
    }
}

TEST_CASE("run: month-long subscription") {
    auto s = month();
    auto r = run_scenario(s);
    const auto& c = only_contract(r);
    const auto& q = s.queries[0];
    auto expected = oracle::enumerate_schedule(*q.start, *q.end, q.frequency_required, *q.granularity,
                                               s.listings[0].unit_cost);
    CHECK(c.transfers == expected.transfers);
    CHECK(c.full_settlements == expected.full_windows);
    CHECK(c.partial_settlements == (expected.remainder_units > 0 ? 1 : 0));
    CHECK(c.settled_units == expected.transfers);
    CHECK(c.revenue == expected.revenue);
    CHECK(c.revenue == Money::parse("29.76"));
    CHECK(c.disputes == 0);
    CHECK(c.status == "completed");
    CHECK(r.max_abs_residual == Money{});
    CHECK(r.ticks_checked == s.duration);
    // Broker fee column: F from each side of every completed contract.
    CHECK(c.fees == s.economics.broker_fee * 2);
    CHECK(r.brokers.at(0).fees == s.economics.broker_fee * 2);
    CHECK(r.brokers.at(0).fee_tokens == 1);
    CHECK(r.plaintext_leaks == 0);
}

TEST_CASE("run: tampered counter in window 7") {
    auto s = month();
    s.faults.push_back({FaultKind::counter_tamper, "city-lab", 0, {{"window", "7"}}});
    auto r = run_scenario(s);
    const auto& c = only_contract(r);
    CHECK(c.full_settlements == 6);
    CHECK(c.revenue == Money::parse("12.0"));
    CHECK(c.status == "disputed");
    CHECK(c.dispute_cause == "counter_mismatch");
    CHECK(c.frozen > Money{});
    CHECK(c.provider_refund == Money{});
    CHECK(c.consumer_refund == Money{});
}

TEST_CASE("run: same seed gives identical reports, another seed changes keys") {
    auto s = month();
    auto a = run_scenario(s, 5);
    auto b = run_scenario(s, 5);
    CHECK(a.digest() == b.digest());
    auto c = run_scenario(s, 6);
    CHECK(a.final_state_digest != c.final_state_digest);
    CHECK(only_contract(a).revenue == only_contract(c).revenue);
}

TEST_CASE("run: until stops early") {
    auto r = run_scenario(month(), std::nullopt, 2000);
    CHECK(r.ticks_run == 2001);
    const auto& c = only_contract(r);
    CHECK(c.status == "active");
    // Samples at 1440, 1470, ..., 1980.
    CHECK(c.transfers == (1980 - 1440) / 30 + 1);
}

TEST_CASE("inject_fault") {
    SUBCASE("stalled deliveries make the consumer lodge a dispute after three misses") {
        auto s = month();
        s.faults.push_back({FaultKind::delivery_stall, "sensor-co", 3000, {}});
        auto r = run_scenario(s);
        const auto& c = only_contract(r);
        CHECK(c.dispute_cause == "delivery_stall");
        // Deliveries stop at tick 3000; the third missed slot is 3060.
        CHECK(c.dispute_tick == 3060);
        CHECK(count_kind(r, "missed") == 3);
    }
    SUBCASE("payment refusal puts the consumer at fault") {
        auto s = month();
        s.faults.push_back({FaultKind::payment_refusal, "city-lab", 0, {{"window", "2"}}});
        auto r = run_scenario(s);
        const auto& c = only_contract(r);
        CHECK(c.dispute_cause == "payment_refused");
        CHECK(c.full_settlements == 2);
        for (const auto& p : r.participants)
            if (p.name == "city-lab") CHECK(p.reputation == "0.80");
            else if (p.name == "sensor-co") CHECK(p.reputation == "1.00");
    }
    SUBCASE("eavesdropper captures frames but no plaintext") {
        auto s = month();
        s.faults.push_back({FaultKind::eavesdrop, "city-lab", 0, {}});
        auto r = run_scenario(s);
        CHECK(r.eavesdrop_frames == 1488);
        CHECK(r.eavesdrop_recovered == 0);
    }
    SUBCASE("crash and recovery move participants away and back into the validator set") {
        auto s = load_scenario_file(testkit::scenario_path("failover.yaml"));
        s.faults.push_back({FaultKind::broker_recover, "2", 300, {}});
        Simulation sim(s);
        auto r = sim.run();
        CHECK(sim.network().broker(BrokerId{2}).live);
        bool validated_after = false;
        for (const auto& b : sim.ledger().chain())
            if (b.time > 300)
                for (auto v : b.validators) validated_after |= v == BrokerId{2};
        CHECK(validated_after);
        bool crashed_seen = false;
        for (const auto& line : r.trade_trace) crashed_seen |= line.find("|broker_crash|") != std::string::npos;
        CHECK(crashed_seen);
        for (const auto& c : r.contracts) CHECK(c.status == "completed");
    }
}

TEST_CASE("run: key rotation and broker admission from the scenario") {
    auto s = load_scenario_file(testkit::scenario_path("failover.yaml"));
    s.faults.clear();
    s.rotations.push_back({"prov-00", 1500});
    s.admissions.push_back({BrokerId{4}, {200, 0}, 2000, {{BrokerId{1}, broker::Vote::accept},
                                                          {BrokerId{2}, broker::Vote::accept},
                                                          {BrokerId{3}, broker::Vote::challenge}}});
    Simulation sim(s);
    auto r = sim.run();
    CHECK(sim.participant("prov-00").keyring.size() == 2);
    CHECK(sim.ledger().state().members().count(BrokerId{4}) == 1);
    for (const auto& c : r.contracts) CHECK(c.status == "completed");
    CHECK(r.max_abs_residual == Money{});
}

TEST_CASE("emit_metrics writes every table with its header") {
    auto r = run_scenario(month());
    auto dir = std::filesystem::temp_directory_path() / "datamarket_metrics_test";
    std::filesystem::remove_all(dir);
    emit_metrics(r, dir);
    auto first_line = [&](const char* file) {
        std::ifstream in(dir / file);
        std::string line;
        std::getline(in, line);
        return line;
    };
    CHECK(first_line("contracts.txt") == kContractsHeader);
    CHECK(first_line("summary.txt") == kSummaryHeader);
    CHECK(first_line("trading_trace.txt") == kTraceHeader);
    CHECK(first_line("chain.txt") == kChainHeader);
    CHECK(first_line("match_audit.txt") == kMatchAuditHeader);
    CHECK(first_line("lookup.txt").rfind("Contract name|", 0) == 0);
    CHECK(first_line("subscriptions.txt").rfind("# DSC1", 0) == 0);

    std::ifstream in(dir / "contracts.txt");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(std::count(header.begin(), header.end(), '|') == std::count(row.begin(), row.end(), '|'));
    std::filesystem::remove_all(dir);
}
