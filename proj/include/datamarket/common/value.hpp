#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "datamarket/common/crypto.hpp"
#include "datamarket/common/money.hpp"
#include "datamarket/common/types.hpp"

namespace datamarket {

// Typed argument carried by ledger transactions and returned by contract calls.
using Value = std::variant<std::int64_t, Money, std::string, Bytes>;
using Args = std::vector<Value>;

struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

void encode_value(crypto::Encoder& enc, const Value& v);
std::string describe(const Value& v);

std::int64_t arg_int(const Args& args, std::size_t i);
Money arg_money(const Args& args, std::size_t i);
const std::string& arg_string(const Args& args, std::size_t i);
const Bytes& arg_bytes(const Args& args, std::size_t i);

template <std::size_t N>
std::array<std::uint8_t, N> arg_array(const Args& args, std::size_t i) {
    const Bytes& b = arg_bytes(args, i);
    if (b.size() != N) throw ArgumentError("argument " + std::to_string(i) + " has wrong length");
    std::array<std::uint8_t, N> out{};
    std::copy(b.begin(), b.end(), out.begin());
    return out;
}

inline crypto::PublicKey arg_key(const Args& args, std::size_t i) { return {arg_array<32>(args, i)}; }

template <std::size_t N>
Bytes to_bytes(const std::array<std::uint8_t, N>& a) {
    return Bytes(a.begin(), a.end());
}
inline Bytes to_bytes(const crypto::PublicKey& pk) { return to_bytes(pk.bytes); }

}  // namespace datamarket
