#include <doctest.h>

#include "datamarket/broker/admission.hpp"
#include "datamarket/broker/matching.hpp"
#include "datamarket/broker/network.hpp"
#include "oracles.hpp"

using namespace datamarket;
using namespace datamarket::broker;

namespace {

crypto::PublicKey pk(std::uint8_t tag) {
    crypto::PublicKey k;
    k.bytes[0] = tag;
    return k;
}

Listing listing(std::uint32_t owner, const char* type, const char* cost, Location where = {}) {
    Listing l;
    l.owner = ParticipantId{owner};
    l.provider_pk = pk(static_cast<std::uint8_t>(owner));
    l.device_id = owner;
    l.data_type = type;
    l.unit_cost = Money::parse(cost);
    l.sampling_frequency = 30;
    l.duration_offered = 1000;
    l.location = where;
    return l;
}

Query query(std::uint32_t owner, const char* type, const char* budget, Location where = {}, double radius = kUnbounded) {
    Query q;
    q.owner = ParticipantId{owner};
    q.consumer_pk = pk(static_cast<std::uint8_t>(owner));
    q.data_type = type;
    q.budget = Money::parse(budget);
    q.frequency_required = 30;
    q.location = where;
    q.radius = radius;
    return q;
}

BrokerNetwork network_of(std::initializer_list<std::pair<std::uint32_t, Location>> brokers) {
    BrokerNetwork n;
    for (const auto& [id, loc] : brokers) n.add_broker(BrokerId{id}, loc);
    return n;
}

}  // namespace

TEST_CASE("register_participant picks the nearest live broker") {
    auto n = network_of({{1, {1, 0}}, {2, {5, 5}}});
    CHECK(n.register_participant(ParticipantId{10}, {0, 0}) == BrokerId{1});
    auto tie = network_of({{3, {1, 0}}, {2, {-1, 0}}});
    CHECK(tie.register_participant(ParticipantId{10}, {0, 0}) == BrokerId{2});
    tie.handle_broker_failure(BrokerId{2});
    tie.handle_broker_failure(BrokerId{3});
    CHECK_THROWS_AS(tie.register_participant(ParticipantId{11}, {0, 0}), NoBrokerError);
}

TEST_CASE("multicast_lists fans new entries out to live peers") {
    auto n = network_of({{1, {0, 0}}, {2, {10, 0}}, {3, {20, 0}}, {4, {30, 0}}});
    n.register_participant(ParticipantId{10}, {0, 0});
    n.submit_listing(listing(10, "Temperature", "0.02"));
    CHECK(n.multicast_lists(BrokerId{1}) == 3);
    CHECK(n.multicast_lists(BrokerId{1}) == 0);

    n.handle_broker_failure(BrokerId{3});
    n.submit_query(query(10, "Humidity", "0.05"));
    CHECK(n.multicast_lists(BrokerId{1}) == 2);
    CHECK(n.broker(BrokerId{3}).book.size() == 1);

    n.recover_broker(BrokerId{3});
    // After recovery the returning broker holds exactly what its peers hold.
    CHECK(n.broker(BrokerId{3}).book == n.broker(BrokerId{1}).book);
    CHECK(n.broker(BrokerId{3}).book == n.broker(BrokerId{2}).book);
}

TEST_CASE("matching") {
    SUBCASE("budget covers cost") {
        CHECK(satisfies(query(1, "Temperature", "0.05"), listing(2, "Temperature", "0.02")));
        CHECK_FALSE(satisfies(query(1, "Temperature", "0.01"), listing(2, "Temperature", "0.02")));
    }
    SUBCASE("location, frequency and age") {
        auto q = query(1, "T", "1", {0, 0}, 5.0);
        CHECK(satisfies(q, listing(2, "T", "0.5", {3, 4})));
        CHECK_FALSE(satisfies(q, listing(2, "T", "0.5", {3, 4.1})));
        auto slow = listing(2, "T", "0.5");
        slow.sampling_frequency = 60;
        CHECK_FALSE(satisfies(query(1, "T", "1"), slow));
        auto archived = query(1, "T", "1");
        archived.data_age = DataAge::archived;
        CHECK_FALSE(satisfies(archived, listing(2, "T", "0.5")));
        auto old = listing(2, "T", "0.5");
        old.archived = true;
        CHECK(satisfies(archived, old));
        CHECK_FALSE(satisfies(query(1, "T", "1"), old));
    }
    SUBCASE("unmatched entries stay in the book") {
        auto n = network_of({{1, {0, 0}}});
        n.register_participant(ParticipantId{1}, {});
        n.register_participant(ParticipantId{2}, {});
        n.submit_query(query(1, "Temperature", "0.01"));
        n.submit_listing(listing(2, "Temperature", "0.02"));
        CHECK(n.match(BrokerId{1}, 1).empty());
        CHECK(n.broker(BrokerId{1}).book.size() == 2);
    }
    SUBCASE("one listing and three satisfying queries") {
        auto n = network_of({{1, {0, 0}}});
        for (std::uint32_t p = 1; p <= 4; ++p) n.register_participant(ParticipantId{p}, {});
        auto lid = n.submit_listing(listing(1, "Temperature", "0.02"));
        n.submit_query(query(2, "Temperature", "0.05"));
        n.submit_query(query(3, "Temperature", "0.09"));
        n.submit_query(query(4, "Temperature", "0.03"));
        auto results = n.match(BrokerId{1}, 1);
        const MatchResult* provider_side = nullptr;
        for (const auto& r : results)
            if (r.side == Side::provider && r.requester_item == lid) provider_side = &r;
        REQUIRE(provider_side);
        REQUIRE(provider_side->counterparts.size() == 3);
        // Highest budget first.
        CHECK(provider_side->counterparts[0].quoted_price == Money::parse("0.09"));
        auto pairs = pairs_of(results);
        auto brute = oracle::brute_force_pairs(n.broker(BrokerId{1}).book);
        std::set<std::pair<std::uint64_t, std::uint64_t>> got;
        for (const auto& p : pairs) got.emplace(to_underlying(p.query), to_underlying(p.listing));
        CHECK(got == brute);
    }
}

TEST_CASE("match digests ignore broker and round but not content") {
    Book book;
    auto l = listing(1, "T", "0.02");
    l.id = SubmissionId{1};
    auto q = query(2, "T", "0.05");
    q.id = SubmissionId{2};
    book.listings[l.id] = l;
    book.queries[q.id] = q;
    std::set<ParticipantId> owners{ParticipantId{1}, ParticipantId{2}};
    auto a = build_results(book, owners, BrokerId{1}, 1);
    auto b = build_results(book, owners, BrokerId{2}, 9);
    CHECK(match_digest(a) == match_digest(b));
    a[0].counterparts.clear();
    CHECK(match_digest(a) != match_digest(b));
}

TEST_CASE("handle_broker_failure") {
    auto n = network_of({{1, {0, 0}}, {2, {10, 0}}});
    for (std::uint32_t p = 1; p <= 3; ++p) n.register_participant(ParticipantId{p}, {1, 0});
    auto rep = n.handle_broker_failure(BrokerId{1});
    CHECK(rep.moved.size() == 3);
    for (std::uint32_t p = 1; p <= 3; ++p) CHECK(n.home_of(ParticipantId{p}) == BrokerId{2});
    auto last = n.handle_broker_failure(BrokerId{2});
    CHECK(last.unassigned.size() == 3);
    CHECK(n.is_unassigned(ParticipantId{1}));
    CHECK(n.live_brokers().empty());
}

TEST_CASE("award_fee_token") {
    auto n = network_of({{1, {0, 0}}, {2, {10, 0}}});
    CHECK(n.broker(BrokerId{1}).fee_tokens == 0);
    CHECK(n.award_fee_token(BrokerId{1}, Address{"0XA"}));
    CHECK(n.broker(BrokerId{1}).fee_tokens == 1);
    CHECK_FALSE(n.award_fee_token(BrokerId{1}, Address{"0XA"}));
    CHECK_FALSE(n.award_fee_token(BrokerId{2}, Address{"0XA"}));
    for (int k = 0; k < 5; ++k) n.award_fee_token(BrokerId{2}, Address{"0XB" + std::to_string(k)});
    CHECK(n.token_holdings().at(BrokerId{2}) == 5);
}

TEST_CASE("vote_broker_admission") {
    BrokerId a{1}, b{2}, c{3}, cand{9};
    std::set<BrokerId> current{a, b, c};
    SUBCASE("weighted majority admits") {
        auto r = vote_broker_admission(cand, {{a, Vote::accept}, {b, Vote::challenge}}, {{a, 3}, {b, 1}}, current);
        CHECK(r.admitted);
        CHECK(r.accept_weight == 3);
        CHECK(r.total_weight == 4);
    }
    SUBCASE("an even split rejects") {
        CHECK_FALSE(vote_broker_admission(cand, {{a, Vote::accept}, {b, Vote::challenge}}, {{a, 2}, {b, 2}}, current)
                        .admitted);
    }
    SUBCASE("no token holders rejects") {
        CHECK_FALSE(vote_broker_admission(cand, {{a, Vote::accept}}, {}, current).admitted);
    }
    SUBCASE("tokenless voters are ignored") {
        auto r = vote_broker_admission(cand, {{a, Vote::accept}, {c, Vote::challenge}}, {{a, 1}, {c, 0}}, current);
        CHECK(r.admitted);
        CHECK(r.ignored == std::vector<BrokerId>{c});
    }
    CHECK_THROWS_AS(vote_broker_admission(a, {}, {}, current), std::invalid_argument);
}
