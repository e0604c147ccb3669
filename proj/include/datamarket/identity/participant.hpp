#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "datamarket/common/crypto.hpp"
#include "datamarket/common/money.hpp"
#include "datamarket/common/types.hpp"

namespace datamarket::identity {

enum class Role { provider, consumer, idp, broker };

std::string_view to_string(Role r);
Role parse_role(std::string_view text);

struct KeyPair {
    crypto::PublicKey public_key;
    crypto::SecretKey private_key;
    Tick created_at = 0;
};

// Reputation in [0,1], held in units of 1/10000 so the linear update rule
// stays exact.
class Reputation {
public:
    static constexpr std::int32_t kScale = 10'000;

    constexpr Reputation() = default;
    static constexpr Reputation from_units(std::int32_t u) { return Reputation{u}; }
    static constexpr Reputation full() { return Reputation{kScale}; }
    static Reputation parse(std::string_view text);

    constexpr std::int32_t units() const { return units_; }
    double value() const { return static_cast<double>(units_) / kScale; }
    std::string to_string() const;

    constexpr auto operator<=>(const Reputation&) const = default;

private:
    constexpr explicit Reputation(std::int32_t u) : units_(u) {}
    std::int32_t units_ = kScale;
};

enum class ReputationEvent { dispute_lodged, dispute_at_fault, contract_completed };

std::string_view to_string(ReputationEvent e);
ReputationEvent parse_reputation_event(std::string_view text);
// Signed change in reputation units: -0.1, -0.2 and +0.02 respectively.
std::int32_t reputation_delta(ReputationEvent e);

struct Participant {
    ParticipantId id{};
    std::string name;
    Role role = Role::consumer;
    std::vector<KeyPair> keyring;
    std::size_t active_key_index = 0;
    Money balance;
    Reputation reputation = Reputation::full();
    std::optional<BrokerId> home_broker;
    Location location;

    const KeyPair& active_key() const { return keyring.at(active_key_index); }
    const crypto::PublicKey& public_key() const { return active_key().public_key; }
    bool holds_key(const crypto::PublicKey& pk) const;

    bool can_provide() const { return role == Role::provider || role == Role::idp; }
    bool can_consume() const { return role == Role::consumer || role == Role::idp; }
};

// Issues participants with unique ids and fresh key pairs drawn from a
// seeded stream.
class ParticipantFactory {
public:
    explicit ParticipantFactory(std::uint64_t seed) : rng_(seed) {}

    Participant create(Role role, Money initial_balance, Location location = {}, std::string name = {},
                       Tick now = 0);
    KeyPair generate_key(Tick now);

private:
    std::mt19937_64 rng_;
    std::uint32_t next_id_ = 0;
};

Participant create_participant(ParticipantFactory& factory, Role role, Money initial_balance);

// Appends a fresh key and makes it active. Old keys stay in the keyring so
// earlier signatures remain verifiable.
Participant rotate_key(Participant p, ParticipantFactory& factory, Tick now);

crypto::Signature sign(const KeyPair& key, std::span<const std::uint8_t> payload);
bool verify(const crypto::PublicKey& key, std::span<const std::uint8_t> payload, const crypto::Signature& sig);

Participant adjust_reputation(Participant p, ReputationEvent event);
Reputation apply_reputation(Reputation r, ReputationEvent event);

}  // namespace datamarket::identity
