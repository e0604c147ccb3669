#include <doctest.h>

#include "datamarket/identity/participant.hpp"

using namespace datamarket;
using namespace datamarket::identity;

TEST_CASE("create_participant") {
    ParticipantFactory f(1);
    auto c = create_participant(f, Role::consumer, Money::units(100));
    CHECK(c.reputation == Reputation::full());
    CHECK(c.keyring.size() == 1);
    CHECK(c.balance == Money::units(100));

    auto p = create_participant(f, Role::provider, Money{});
    CHECK(p.balance == Money{});
    CHECK(p.can_provide());
    CHECK_FALSE(p.can_consume());

    SUBCASE("distinct ids and keys") {
        std::vector<Participant> all{c, p};
        for (int i = 0; i < 20; ++i) all.push_back(create_participant(f, Role::idp, Money{}));
        for (std::size_t i = 0; i < all.size(); ++i)
            for (std::size_t j = i + 1; j < all.size(); ++j) {
                CHECK(all[i].id != all[j].id);
                CHECK(all[i].public_key() != all[j].public_key());
            }
    }
    CHECK_THROWS_AS(create_participant(f, Role::consumer, Money::parse("-1")), std::invalid_argument);
}

TEST_CASE("rotate_key keeps old keys and activates the newest") {
    ParticipantFactory f(2);
    auto p = create_participant(f, Role::provider, Money{});
    auto old = p.public_key();
    auto r = rotate_key(p, f, 10);
    CHECK(r.keyring.size() == 2);
    CHECK(r.active_key_index == 1);
    CHECK(r.public_key() != old);
    CHECK(r.holds_key(old));
    CHECK(r.active_key().created_at == 10);
    CHECK(p.keyring.size() == 1);
}

TEST_CASE("sign and verify") {
    ParticipantFactory f(3);
    auto a = create_participant(f, Role::consumer, Money{});
    auto b = create_participant(f, Role::consumer, Money{});
    Bytes payload{1, 2, 3, 4};
    auto sig = sign(a.active_key(), payload);
    CHECK(identity::verify(a.public_key(), payload, sig));
    auto flipped = payload;
    flipped[2] ^= 0x01;
    CHECK_FALSE(identity::verify(a.public_key(), flipped, sig));
    CHECK_FALSE(identity::verify(b.public_key(), payload, sig));
}

TEST_CASE("adjust_reputation") {
    ParticipantFactory f(4);
    auto p = create_participant(f, Role::consumer, Money{});
    // Each rule is checked against plain arithmetic on the decimal value.
    auto at = [&](const char* start) {
        auto q = p;
        q.reputation = Reputation::parse(start);
        return q;
    };
    CHECK(adjust_reputation(at("1.0"), ReputationEvent::dispute_at_fault).reputation == Reputation::parse("0.8"));
    CHECK(adjust_reputation(at("0.1"), ReputationEvent::dispute_at_fault).reputation == Reputation::parse("0.0"));
    CHECK(adjust_reputation(at("0.9"), ReputationEvent::contract_completed).reputation == Reputation::parse("0.92"));
    CHECK(adjust_reputation(at("1.0"), ReputationEvent::contract_completed).reputation == Reputation::full());
    CHECK(adjust_reputation(at("0.5"), ReputationEvent::dispute_lodged).reputation == Reputation::parse("0.4"));
    CHECK(Reputation::parse("0.92").to_string() == "0.92");
}

TEST_CASE("roles parse from their names") {
    CHECK(parse_role("idp") == Role::idp);
    CHECK(to_string(Role::broker) == "broker");
    CHECK_THROWS(parse_role("miner"));
}
