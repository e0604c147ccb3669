#include "datamarket/ledger/transaction.hpp"

#include <tuple>

namespace datamarket::ledger {

Bytes Transaction::signing_bytes() const {
    crypto::Encoder enc;
    enc.str("tx").str(target.str()).str(abi).u64(args.size());
    for (const auto& a : args) encode_value(enc, a);
    enc.u64(nonce);
    return enc.take();
}

crypto::Digest Transaction::id() const {
    crypto::Encoder enc;
    enc.bytes(sender.bytes).bytes(signing_bytes()).bytes(signature.bytes).i64(time);
    return crypto::hash(enc);
}

bool Transaction::signature_valid() const { return identity::verify(sender, signing_bytes(), signature); }

Transaction make_transaction(const identity::KeyPair& key, Address target, std::string abi, Args args,
                             std::uint64_t nonce, Tick time) {
    Transaction tx;
    tx.sender = key.public_key;
    tx.target = std::move(target);
    tx.abi = std::move(abi);
    tx.args = std::move(args);
    tx.nonce = nonce;
    tx.time = time;
    tx.signature = identity::sign(key, tx.signing_bytes());
    return tx;
}

bool tx_order(const Transaction& a, const Transaction& b) {
    return std::tie(a.time, a.sender, a.nonce) < std::tie(b.time, b.sender, b.nonce);
}

}  // namespace datamarket::ledger
