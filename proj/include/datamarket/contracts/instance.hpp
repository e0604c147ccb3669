#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "datamarket/common/sim_time.hpp"
#include "datamarket/common/value.hpp"
#include "datamarket/contracts/dsc.hpp"
#include "datamarket/contracts/register_contract.hpp"

namespace datamarket::contracts {

enum class Kind { register_contract, dsc };

std::string_view to_string(Kind k);
Kind parse_kind(std::string_view text);

// ABI names exported by each kind. Fixed at deployment.
const std::vector<std::string>& abi_names(Kind kind);
bool is_read_only(Kind kind, std::string_view abi);

struct ContractInstance {
    Address address;
    Kind kind = Kind::register_contract;
    std::variant<RegisterState, DscState> state;
    std::vector<std::string> abis;

    const RegisterState& as_register() const { return std::get<RegisterState>(state); }
    const DscState& as_dsc() const { return std::get<DscState>(state); }

    void encode(crypto::Encoder& enc) const;
    crypto::Digest digest() const;

    bool operator==(const ContractInstance&) const = default;
};

// Argument layouts used by ledger transactions.
Args dsc_init_args(const DscTerms& terms);
Args create_contract_args(const SubscriptionEntry& entry, Money provider_deposit, Money consumer_deposit,
                          const crypto::Signature& consumer_signature);
Args register_contract_args(const LookupEntry& entry);

ContractInstance instantiate(Kind kind, Address address, const Args& init_args);

// Executes one ABI call. Throws ContractError on failure; the caller is
// responsible for discarding partial state.
Args invoke(ContractInstance& instance, std::string_view abi, const Args& args, CallContext& ctx);

// Delimited dumps whose columns mirror the subscription and lookup tables.
std::string subscription_table_header();
std::string subscription_table(const DscState& dsc, const TimeBase& time);
std::string lookup_table_header();
std::string lookup_table(const RegisterState& reg);

}  // namespace datamarket::contracts
