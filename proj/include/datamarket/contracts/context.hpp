#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "datamarket/common/crypto.hpp"
#include "datamarket/common/money.hpp"
#include "datamarket/common/types.hpp"
#include "datamarket/identity/participant.hpp"

namespace datamarket::contracts {

// Raised by a contract to abort the current call. The ledger discards every
// state change made by the call, so a thrown error is always atomic.
class ContractError : public std::runtime_error {
public:
    explicit ContractError(std::string code) : std::runtime_error(code), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

// Ledger-wide currency holdings outside of contract escrows.
struct Bank {
    std::map<ParticipantId, Money> balances;
    std::map<BrokerId, Money> fee_accounts;
    Money frozen;

    Money balance(ParticipantId id) const;
    void debit(ParticipantId id, Money amount);
    void credit(ParticipantId id, Money amount);
    void credit_fee(BrokerId broker, Money amount);
    Money holdings() const;

    bool operator==(const Bank&) const = default;
};

struct ReputationChange {
    crypto::PublicKey party;
    identity::ReputationEvent kind;
};

struct Activated {
    Address dsc;
    std::int64_t sub = 0;
    BrokerId broker{};
    crypto::PublicKey provider;
    crypto::PublicKey consumer;
    crypto::SessionKey session_key{};
};

struct Invoiced {
    Address dsc;
    std::int64_t sub = 0;
    std::int64_t units = 0;
    Money amount;
    bool final_remainder = false;
};

struct DisputeLodged {
    Address dsc;
    std::int64_t sub = 0;
    std::string cause;
};

struct Closed {
    Address dsc;
    std::int64_t sub = 0;
    bool disputed = false;
    BrokerId broker{};
    Money fee_each;
    Money provider_refund;
    Money consumer_refund;
    Money frozen;
};

struct Registered {
    std::string name;
    Address address;
};

using Event = std::variant<ReputationChange, Activated, Invoiced, DisputeLodged, Closed, Registered>;

struct CallContext {
    Tick now = 0;
    crypto::PublicKey caller;
    Address self;
    Bank& bank;
    std::vector<Event>& events;
    std::function<std::optional<ParticipantId>(const crypto::PublicKey&)> account_of;
    std::function<bool(const Address&)> address_exists;

    ParticipantId account(const crypto::PublicKey& pk) const;
    bool caller_is(const crypto::PublicKey& pk) const;
};

}  // namespace datamarket::contracts
