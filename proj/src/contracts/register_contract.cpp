#include "datamarket/contracts/register_contract.hpp"

#include <algorithm>

namespace datamarket::contracts {

const LookupEntry* RegisterState::find(std::string_view name) const {
    auto it = std::find_if(lookup.begin(), lookup.end(), [&](const LookupEntry& e) { return e.contract_name == name; });
    return it == lookup.end() ? nullptr : &*it;
}

void register_contract(RegisterState& state, CallContext& ctx, LookupEntry entry) {
    if (!ctx.caller_is(entry.provider_pk) && !ctx.caller_is(entry.consumer_pk)) throw ContractError("wrong_caller");
    if (entry.contract_name.empty()) throw ContractError("malformed");
    if (state.find(entry.contract_name)) throw ContractError("duplicate_name");
    if (!ctx.address_exists || !ctx.address_exists(entry.contract_address)) throw ContractError("dangling_address");
    ctx.events.push_back(Registered{entry.contract_name, entry.contract_address});
    state.lookup.push_back(std::move(entry));
}

std::pair<Address, std::vector<std::string>> get_contract(const RegisterState& state, std::string_view name) {
    const LookupEntry* e = state.find(name);
    if (!e) throw ContractError("unknown_name");
    return {e->contract_address, e->contract_abis};
}

std::string join_abis(const std::vector<std::string>& abis) {
    std::string out;
    for (const auto& a : abis) {
        if (!out.empty()) out += ',';
        out += a;
    }
    return out;
}

std::vector<std::string> split_abis(std::string_view joined) {
    std::vector<std::string> out;
    while (!joined.empty()) {
        auto comma = joined.find(',');
        out.emplace_back(joined.substr(0, comma));
        if (comma == std::string_view::npos) break;
        joined.remove_prefix(comma + 1);
    }
    return out;
}

}  // namespace datamarket::contracts
