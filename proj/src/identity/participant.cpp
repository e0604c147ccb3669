#include "datamarket/identity/participant.hpp"

#include <algorithm>

#include "datamarket/common/rng.hpp"

namespace datamarket::identity {

std::string_view to_string(Role r) {
    switch (r) {
        case Role::provider: return "provider";
        case Role::consumer: return "consumer";
        case Role::idp: return "idp";
        case Role::broker: return "broker";
    }
    return "?";
}

Role parse_role(std::string_view text) {
    if (text == "provider") return Role::provider;
    if (text == "consumer") return Role::consumer;
    if (text == "idp") return Role::idp;
    if (text == "broker") return Role::broker;
    throw std::invalid_argument("unknown role '" + std::string(text) + "'");
}

Reputation Reputation::parse(std::string_view text) {
    Money m = Money::parse(text);
    if (m.micros() % 100 != 0) throw std::invalid_argument("reputation has too many digits");
    auto units = m.micros() / 100;
    if (units < 0 || units > kScale) throw std::invalid_argument("reputation outside [0,1]");
    return Reputation{static_cast<std::int32_t>(units)};
}

std::string Reputation::to_string() const { return Money::from_micros(std::int64_t{units_} * 100).to_string(); }

std::string_view to_string(ReputationEvent e) {
    switch (e) {
        case ReputationEvent::dispute_lodged: return "dispute_lodged";
        case ReputationEvent::dispute_at_fault: return "dispute_at_fault";
        case ReputationEvent::contract_completed: return "contract_completed";
    }
    return "?";
}

ReputationEvent parse_reputation_event(std::string_view text) {
    if (text == "dispute_lodged") return ReputationEvent::dispute_lodged;
    if (text == "dispute_at_fault") return ReputationEvent::dispute_at_fault;
    if (text == "contract_completed") return ReputationEvent::contract_completed;
    throw std::invalid_argument("unknown reputation event '" + std::string(text) + "'");
}

std::int32_t reputation_delta(ReputationEvent e) {
    switch (e) {
        case ReputationEvent::dispute_lodged: return -1000;
        case ReputationEvent::dispute_at_fault: return -2000;
        case ReputationEvent::contract_completed: return 200;
    }
    throw std::invalid_argument("unknown reputation event");
}

bool Participant::holds_key(const crypto::PublicKey& pk) const {
    return std::any_of(keyring.begin(), keyring.end(), [&](const KeyPair& k) { return k.public_key == pk; });
}

KeyPair ParticipantFactory::generate_key(Tick now) {
    auto km = crypto::keypair_from_seed(random_bytes<32>(rng_));
    return KeyPair{km.public_key, km.secret_key, now};
}

Participant ParticipantFactory::create(Role role, Money initial_balance, Location location, std::string name,
                                       Tick now) {
    if (initial_balance.is_negative()) throw std::invalid_argument("initial balance must be non-negative");
    Participant p;
    p.id = ParticipantId{next_id_++};
    p.name = name.empty() ? "p" + std::to_string(to_underlying(p.id)) : std::move(name);
    p.role = role;
    p.keyring.push_back(generate_key(now));
    p.active_key_index = 0;
    p.balance = initial_balance;
    p.reputation = Reputation::full();
    p.location = location;
    return p;
}

Participant create_participant(ParticipantFactory& factory, Role role, Money initial_balance) {
    return factory.create(role, initial_balance);
}

Participant rotate_key(Participant p, ParticipantFactory& factory, Tick now) {
    p.keyring.push_back(factory.generate_key(now));
    p.active_key_index = p.keyring.size() - 1;
    return p;
}

crypto::Signature sign(const KeyPair& key, std::span<const std::uint8_t> payload) {
    if (payload.empty()) throw std::invalid_argument("cannot sign an empty payload");
    return crypto::sign(key.private_key, payload);
}

bool verify(const crypto::PublicKey& key, std::span<const std::uint8_t> payload, const crypto::Signature& sig) {
    return crypto::verify(key, payload, sig);
}

Reputation apply_reputation(Reputation r, ReputationEvent event) {
    std::int32_t u = std::clamp(r.units() + reputation_delta(event), 0, Reputation::kScale);
    return Reputation::from_units(u);
}

Participant adjust_reputation(Participant p, ReputationEvent event) {
    if (p.reputation.units() < 0 || p.reputation.units() > Reputation::kScale)
        throw std::invalid_argument("reputation outside [0,1]");
    p.reputation = apply_reputation(p.reputation, event);
    return p;
}

}  // namespace datamarket::identity
