#pragma once

#include <cstdint>
#include <string>

#include "datamarket/common/value.hpp"
#include "datamarket/identity/participant.hpp"

namespace datamarket::ledger {

struct Transaction {
    crypto::PublicKey sender;
    Address target;
    std::string abi;
    Args args;
    std::uint64_t nonce = 0;
    Tick time = 0;
    crypto::Signature signature;

    // The signed payload: target, abi, args and nonce.
    Bytes signing_bytes() const;
    crypto::Digest id() const;
    bool signature_valid() const;
};

Transaction make_transaction(const identity::KeyPair& key, Address target, std::string abi, Args args,
                             std::uint64_t nonce, Tick time);

// Deterministic block order: submission time, then sender key bytes, then nonce.
bool tx_order(const Transaction& a, const Transaction& b);

}  // namespace datamarket::ledger
