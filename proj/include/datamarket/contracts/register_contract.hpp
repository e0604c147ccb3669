#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "datamarket/contracts/context.hpp"

namespace datamarket::contracts {

// One row of the contract lookup table.
struct LookupEntry {
    std::string contract_name;
    crypto::PublicKey provider_pk;
    crypto::PublicKey consumer_pk;
    Address contract_address;
    std::vector<std::string> contract_abis;

    bool operator==(const LookupEntry&) const = default;
};

struct RegisterState {
    std::vector<LookupEntry> lookup;

    const LookupEntry* find(std::string_view name) const;
    bool operator==(const RegisterState&) const = default;
};

// ABI RegisterContract. The caller must be one of the two parties named in
// the entry, the name must be unused and the address must exist.
void register_contract(RegisterState& state, CallContext& ctx, LookupEntry entry);

// ABI GetContract. Read-only.
std::pair<Address, std::vector<std::string>> get_contract(const RegisterState& state, std::string_view name);

std::string join_abis(const std::vector<std::string>& abis);
std::vector<std::string> split_abis(std::string_view joined);

}  // namespace datamarket::contracts
