#include "datamarket/contracts/context.hpp"

namespace datamarket::contracts {

Money Bank::balance(ParticipantId id) const {
    auto it = balances.find(id);
    return it == balances.end() ? Money{} : it->second;
}

void Bank::debit(ParticipantId id, Money amount) {
    auto it = balances.find(id);
    if (it == balances.end() || it->second < amount) throw ContractError("insufficient_funds");
    it->second -= amount;
}

void Bank::credit(ParticipantId id, Money amount) { balances[id] += amount; }

void Bank::credit_fee(BrokerId broker, Money amount) { fee_accounts[broker] += amount; }

Money Bank::holdings() const {
    Money total = frozen;
    for (const auto& [_, m] : balances) total += m;
    for (const auto& [_, m] : fee_accounts) total += m;
    return total;
}

ParticipantId CallContext::account(const crypto::PublicKey& pk) const {
    auto id = account_of ? account_of(pk) : std::nullopt;
    if (!id) throw ContractError("unknown_party");
    return *id;
}

bool CallContext::caller_is(const crypto::PublicKey& pk) const {
    if (caller == pk) return true;
    if (!account_of) return false;
    auto a = account_of(caller);
    auto b = account_of(pk);
    return a && b && *a == *b;
}

}  // namespace datamarket::contracts
