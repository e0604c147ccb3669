#include "datamarket/contracts/dsc.hpp"

#include <algorithm>

namespace datamarket::contracts {
namespace {

Subscription& at(DscState& dsc, std::size_t index) {
    if (index >= dsc.subscriptions.size()) throw ContractError("bad_index");
    return dsc.subscriptions[index];
}

enum class Party { provider, consumer };

Party party_of(const DscState& dsc, const CallContext& ctx) {
    if (ctx.caller_is(dsc.terms.provider_pk)) return Party::provider;
    if (ctx.caller_is(dsc.terms.consumer_pk)) return Party::consumer;
    throw ContractError("not_party");
}

void mark_disputed(DscState& dsc, Subscription& sub, CallContext& ctx, std::size_t index, std::string cause,
                   bool consumer_at_fault = false) {
    sub.entry.status = SubscriptionStatus::disputed;
    sub.disputed_at = ctx.now;
    sub.dispute_cause = cause;
    ctx.events.push_back(DisputeLodged{ctx.self, static_cast<std::int64_t>(index), std::move(cause)});
    if (consumer_at_fault) {
        ctx.events.push_back(ReputationChange{dsc.terms.consumer_pk, identity::ReputationEvent::dispute_at_fault});
    } else {
        ctx.events.push_back(ReputationChange{dsc.terms.provider_pk, identity::ReputationEvent::dispute_lodged});
        ctx.events.push_back(ReputationChange{dsc.terms.consumer_pk, identity::ReputationEvent::dispute_lodged});
    }
}

}  // namespace

std::string_view to_string(SubscriptionStatus s) {
    switch (s) {
        case SubscriptionStatus::created: return "created";
        case SubscriptionStatus::active: return "active";
        case SubscriptionStatus::disputed: return "disputed";
        case SubscriptionStatus::completed: return "completed";
        case SubscriptionStatus::removed: return "removed";
    }
    return "?";
}

std::string_view to_string(SettlementKind k) {
    switch (k) {
        case SettlementKind::waiting: return "waiting";
        case SettlementKind::invoice: return "invoice";
        case SettlementKind::dispute: return "dispute";
    }
    return "?";
}

void SubscriptionEntry::validate() const {
    if (start_time >= end_time || payment_granularity < 1 || cost.is_negative() || measurement_frequency <= 0 ||
        data_type.empty())
        throw ContractError("invalid_subscription");
    if (status == SubscriptionStatus::active && (!session_key || *session_key == crypto::SessionKey{}))
        throw ContractError("invalid_subscription");
}

std::int64_t SubscriptionEntry::scheduled_units() const {
    if (measurement_frequency <= 0 || end_time <= start_time) return 0;
    return (end_time - start_time + measurement_frequency - 1) / measurement_frequency;
}

Money DscState::escrow_total() const {
    Money total;
    for (const auto& s : subscriptions) total += s.escrow.total();
    return total;
}

DscState make_dsc(const DscTerms& terms) {
    if (terms.end_time <= terms.start_time) throw ContractError("invalid_term");
    if (terms.broker_fee.is_negative()) throw ContractError("malformed");
    if (terms.provider_pk == terms.consumer_pk) throw ContractError("malformed");
    return DscState{terms, {}};
}

Money minimum_deposit(const SubscriptionEntry& entry, Money broker_fee) {
    return entry.cost * entry.payment_granularity + broker_fee;
}

Bytes subscription_terms(const Address& dsc, const SubscriptionEntry& e, Money provider_deposit,
                         Money consumer_deposit) {
    crypto::Encoder enc;
    enc.str("dsc-terms")
        .str(dsc.str())
        .i64(e.device_id)
        .str(e.data_type)
        .i64(e.start_time)
        .i64(e.measurement_frequency)
        .i64(e.cost.micros())
        .i64(e.end_time)
        .i64(e.payment_granularity)
        .i64(provider_deposit.micros())
        .i64(consumer_deposit.micros());
    return enc.take();
}

std::size_t create_contract(DscState& dsc, CallContext& ctx, SubscriptionEntry entry, Money provider_deposit,
                            Money consumer_deposit, const crypto::Signature& consumer_signature) {
    if (!ctx.caller_is(dsc.terms.provider_pk)) throw ContractError("wrong_caller");
    if (entry.status != SubscriptionStatus::created || entry.session_key) throw ContractError("invalid_subscription");
    entry.validate();
    Money minimum = minimum_deposit(entry, dsc.terms.broker_fee);
    if (provider_deposit < minimum || consumer_deposit < minimum) throw ContractError("deposit_too_small");
    if (!crypto::verify(dsc.terms.consumer_pk, subscription_terms(ctx.self, entry, provider_deposit, consumer_deposit),
                        consumer_signature))
        throw ContractError("missing_cosignature");

    auto provider = ctx.account(dsc.terms.provider_pk);
    auto consumer = ctx.account(dsc.terms.consumer_pk);
    if (ctx.bank.balance(provider) < provider_deposit || ctx.bank.balance(consumer) < consumer_deposit)
        throw ContractError("insufficient_funds");
    ctx.bank.debit(provider, provider_deposit);
    ctx.bank.debit(consumer, consumer_deposit);

    Subscription sub;
    sub.escrow = Escrow{provider_deposit, consumer_deposit, entry.end_time + entry.lock_margin(), Money{}};
    sub.deposits_in = provider_deposit + consumer_deposit;
    sub.entry = std::move(entry);
    dsc.subscriptions.push_back(std::move(sub));
    return dsc.subscriptions.size() - 1;
}

ExecuteResult execute_contract(DscState& dsc, CallContext& ctx, std::size_t index, const crypto::SessionKey& key) {
    Subscription& sub = at(dsc, index);
    if (!ctx.caller_is(dsc.terms.provider_pk)) throw ContractError("wrong_caller");
    if (sub.entry.status != SubscriptionStatus::created) throw ContractError("wrong_status");
    if (ctx.now < sub.entry.start_time) throw ContractError("too_early");
    if (ctx.now >= sub.entry.end_time) throw ContractError("expired");
    if (key == crypto::SessionKey{}) throw ContractError("invalid_session_key");

    sub.entry.session_key = key;
    sub.entry.status = SubscriptionStatus::active;
    ctx.events.push_back(Activated{ctx.self, static_cast<std::int64_t>(index), dsc.terms.broker, dsc.terms.provider_pk,
                                   dsc.terms.consumer_pk, key});
    return ExecuteResult{key, sub.entry};
}

SettlementOutcome settlement(DscState& dsc, CallContext& ctx, std::size_t index, std::int64_t counter,
                             bool authorize_payment) {
    Subscription& sub = at(dsc, index);
    Party party = party_of(dsc, ctx);
    if (sub.entry.status != SubscriptionStatus::active) throw ContractError("wrong_status");
    if (counter < 1) throw ContractError("zero_counter");
    const std::int64_t n = sub.entry.payment_granularity;
    if (counter > n) throw ContractError("counter_exceeds_granularity");

    std::int64_t& mine = party == Party::provider ? sub.provider_counter : sub.consumer_counter;
    std::int64_t other = party == Party::provider ? sub.consumer_counter : sub.provider_counter;
    if (mine != 0) throw ContractError("already_reported");
    mine = counter;
    if (party == Party::consumer) sub.consumer_authorized = authorize_payment;
    if (other == 0) return {SettlementKind::waiting, 0, Money{}};

    if (sub.provider_counter != sub.consumer_counter) {
        mark_disputed(dsc, sub, ctx, index, "counter_mismatch");
        return {SettlementKind::dispute, 0, Money{}};
    }
    if (counter < n) {
        // Agreed remainder at expiry; paid out by RemoveSubscription.
        if (ctx.now >= sub.entry.end_time) return {SettlementKind::waiting, 0, Money{}};
        throw ContractError("not_due");
    }

    Money invoice = sub.entry.cost * n;
    sub.escrow.consumer_deposit -= invoice;
    ctx.bank.credit(ctx.account(dsc.terms.provider_pk), invoice);
    sub.paid_to_provider += invoice;
    sub.settled_units += n;
    sub.full_settlements += 1;
    sub.provider_counter = 0;
    sub.consumer_counter = 0;
    ctx.events.push_back(Invoiced{ctx.self, static_cast<std::int64_t>(index), n, invoice, false});

    // The consumer re-funds its deposit with the invoiced amount. Refusing
    // leaves the provider paid out of the deposit and ends the subscription.
    auto consumer = ctx.account(dsc.terms.consumer_pk);
    if (sub.consumer_authorized && ctx.bank.balance(consumer) >= invoice) {
        ctx.bank.debit(consumer, invoice);
        sub.escrow.consumer_deposit += invoice;
        sub.invoices_charged += invoice;
    } else {
        sub.escrow.pending_invoice += invoice;
        mark_disputed(dsc, sub, ctx, index, "payment_refused", true);
    }
    return {SettlementKind::invoice, n, invoice};
}

ClosingReport remove_subscription(DscState& dsc, CallContext& ctx, std::size_t index) {
    Subscription& sub = at(dsc, index);
    party_of(dsc, ctx);
    auto status = sub.entry.status;
    if (status == SubscriptionStatus::removed || status == SubscriptionStatus::completed)
        throw ContractError("wrong_status");
    if (status == SubscriptionStatus::disputed) {
        if (ctx.now < sub.disputed_at + sub.entry.lock_margin()) throw ContractError("too_early");
    } else if (ctx.now < sub.entry.end_time) {
        throw ContractError("too_early");
    }

    ClosingReport report;
    if (status == SubscriptionStatus::active) {
        if (sub.provider_counter == sub.consumer_counter) {
            std::int64_t units = sub.provider_counter;
            if (units > 0) {
                Money invoice = sub.entry.cost * units;
                sub.escrow.consumer_deposit -= invoice;
                ctx.bank.credit(ctx.account(dsc.terms.provider_pk), invoice);
                sub.paid_to_provider += invoice;
                sub.settled_units += units;
                sub.partial_settlements += 1;
                report.final_units = units;
                report.final_invoice = invoice;
                ctx.events.push_back(Invoiced{ctx.self, static_cast<std::int64_t>(index), units, invoice, true});
                // Same re-funding rule as a full window; a consumer short of
                // funds simply gets less of its deposit back.
                auto consumer = ctx.account(dsc.terms.consumer_pk);
                if (ctx.bank.balance(consumer) >= invoice) {
                    ctx.bank.debit(consumer, invoice);
                    sub.escrow.consumer_deposit += invoice;
                    sub.invoices_charged += invoice;
                }
            }
            sub.provider_counter = 0;
            sub.consumer_counter = 0;
            sub.entry.status = SubscriptionStatus::completed;
            sub.completed = true;
            ctx.events.push_back(ReputationChange{dsc.terms.provider_pk, identity::ReputationEvent::contract_completed});
            ctx.events.push_back(ReputationChange{dsc.terms.consumer_pk, identity::ReputationEvent::contract_completed});
        } else {
            mark_disputed(dsc, sub, ctx, index, "final_counter_mismatch");
        }
    }

    const bool disputed = sub.entry.status == SubscriptionStatus::disputed;
    Money fee = dsc.terms.broker_fee;
    Money provider_fee = std::min(fee, sub.escrow.provider_deposit);
    Money consumer_fee = std::min(fee, sub.escrow.consumer_deposit);
    sub.escrow.provider_deposit -= provider_fee;
    sub.escrow.consumer_deposit -= consumer_fee;
    ctx.bank.credit_fee(dsc.terms.broker, provider_fee + consumer_fee);
    sub.fees_paid += provider_fee + consumer_fee;
    report.fee_each = fee;

    if (disputed) {
        report.frozen = sub.escrow.total();
        ctx.bank.frozen += report.frozen;
        sub.frozen += report.frozen;
    } else {
        report.provider_refund = sub.escrow.provider_deposit;
        report.consumer_refund = sub.escrow.consumer_deposit;
        ctx.bank.credit(ctx.account(dsc.terms.provider_pk), report.provider_refund);
        ctx.bank.credit(ctx.account(dsc.terms.consumer_pk), report.consumer_refund);
        sub.refunded += report.provider_refund + report.consumer_refund;
    }
    sub.escrow.provider_deposit = Money{};
    sub.escrow.consumer_deposit = Money{};
    sub.entry.status = SubscriptionStatus::removed;
    report.disputed = disputed;

    ctx.events.push_back(Closed{ctx.self, static_cast<std::int64_t>(index), disputed, dsc.terms.broker, fee,
                                report.provider_refund, report.consumer_refund, report.frozen});
    return report;
}

bool lodge_dispute(DscState& dsc, CallContext& ctx, std::size_t index, std::string cause) {
    Subscription& sub = at(dsc, index);
    party_of(dsc, ctx);
    if (sub.entry.status == SubscriptionStatus::disputed) return false;
    if (sub.entry.status != SubscriptionStatus::active) throw ContractError("wrong_status");
    mark_disputed(dsc, sub, ctx, index, cause.empty() ? "lodged" : std::move(cause));
    return true;
}

}  // namespace datamarket::contracts
