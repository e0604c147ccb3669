#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "datamarket/contracts/context.hpp"

namespace datamarket::contracts {

enum class SubscriptionStatus { created, active, disputed, completed, removed };

std::string_view to_string(SubscriptionStatus s);

// One row of a DSC subscription table.
struct SubscriptionEntry {
    std::int64_t device_id = 0;
    std::string data_type;
    Tick start_time = 0;
    Tick measurement_frequency = 0;
    std::optional<crypto::SessionKey> session_key;
    Money cost;
    Tick end_time = 0;
    std::int64_t payment_granularity = 1;
    SubscriptionStatus status = SubscriptionStatus::created;

    // Throws ContractError("invalid_subscription") on any violated invariant.
    void validate() const;

    // Window of grace after end_time, and after a dispute, before funds move:
    // one settlement window worth of samples.
    Tick lock_margin() const { return payment_granularity * measurement_frequency; }

    // Number of sample instants on the grid start, start+f, ... strictly
    // before end_time.
    std::int64_t scheduled_units() const;

    bool operator==(const SubscriptionEntry&) const = default;
};

struct Escrow {
    Money provider_deposit;
    Money consumer_deposit;
    Tick locked_until = 0;
    Money pending_invoice;

    Money total() const { return provider_deposit + consumer_deposit; }
    bool operator==(const Escrow&) const = default;
};

// A subscription row together with its escrow and settlement bookkeeping.
struct Subscription {
    SubscriptionEntry entry;
    Escrow escrow;
    std::int64_t provider_counter = 0;
    std::int64_t consumer_counter = 0;
    bool consumer_authorized = true;
    std::int64_t settled_units = 0;
    std::int64_t full_settlements = 0;
    std::int64_t partial_settlements = 0;
    Tick disputed_at = -1;
    std::string dispute_cause;
    bool completed = false;

    // Flows, kept for the conservation audit.
    Money deposits_in;
    Money invoices_charged;
    Money paid_to_provider;
    Money fees_paid;
    Money refunded;
    Money frozen;

    bool operator==(const Subscription&) const = default;
};

// Parameters fixed at deployment.
struct DscTerms {
    crypto::PublicKey provider_pk;
    crypto::PublicKey consumer_pk;
    BrokerId broker{};
    Money broker_fee;
    Tick start_time = 0;
    Tick end_time = 0;
    std::int64_t match_round = 0;
    std::int64_t listing_id = 0;
    std::int64_t query_id = 0;

    bool operator==(const DscTerms&) const = default;
};

struct DscState {
    DscTerms terms;
    std::vector<Subscription> subscriptions;

    Money escrow_total() const;
    bool operator==(const DscState&) const = default;
};

DscState make_dsc(const DscTerms& terms);

// Deposit each party locks per subscription: one window's charge plus the
// broker fee.
Money minimum_deposit(const SubscriptionEntry& entry, Money broker_fee);

// Bytes the consumer signs to approve the terms of a new subscription.
Bytes subscription_terms(const Address& dsc, const SubscriptionEntry& entry, Money provider_deposit,
                         Money consumer_deposit);

// ABI CreateContract. Returns the new subscription index.
std::size_t create_contract(DscState& dsc, CallContext& ctx, SubscriptionEntry entry, Money provider_deposit,
                            Money consumer_deposit, const crypto::Signature& consumer_signature);

struct ExecuteResult {
    crypto::SessionKey session_key{};
    SubscriptionEntry notification;
};

// ABI ExecuteContract.
ExecuteResult execute_contract(DscState& dsc, CallContext& ctx, std::size_t index, const crypto::SessionKey& key);

enum class SettlementKind { waiting, invoice, dispute };
std::string_view to_string(SettlementKind k);

struct SettlementOutcome {
    SettlementKind kind = SettlementKind::waiting;
    std::int64_t units = 0;
    Money amount;
};

// ABI Settlement. The first party's report is recorded; the second decides.
SettlementOutcome settlement(DscState& dsc, CallContext& ctx, std::size_t index, std::int64_t counter,
                             bool authorize_payment);

struct ClosingReport {
    bool disputed = false;
    std::int64_t final_units = 0;
    Money final_invoice;
    Money fee_each;
    Money provider_refund;
    Money consumer_refund;
    Money frozen;
};

// ABI RemoveSubscription.
ClosingReport remove_subscription(DscState& dsc, CallContext& ctx, std::size_t index);

// ABI LodgeDispute, used by a party whose counterpart stopped delivering.
// Returns false (and changes nothing) when the entry is already disputed.
bool lodge_dispute(DscState& dsc, CallContext& ctx, std::size_t index, std::string cause);

}  // namespace datamarket::contracts
