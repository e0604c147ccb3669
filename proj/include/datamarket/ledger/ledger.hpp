#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "datamarket/contracts/instance.hpp"
#include "datamarket/ledger/transaction.hpp"

namespace datamarket::ledger {

enum class RejectReason { bad_signature, stale_nonce, unknown_target, unknown_abi, unknown_sender, retired_key };

std::string_view to_string(RejectReason r);

struct SubmitReceipt {
    bool accepted = false;
    std::optional<RejectReason> reason;
};

struct TxResult {
    crypto::Digest tx_id{};
    crypto::PublicKey sender;
    Address target;
    std::string abi;
    bool ok = false;
    std::string error;
    Args outputs;
    std::vector<contracts::Event> events;
};

// On-chain record of one broker match round. Other brokers that recompute a
// different match digest from the same book attach a flag.
struct AnchorRecord {
    std::int64_t round = 0;
    BrokerId broker{};
    crypto::Digest book_digest{};
    crypto::Digest match_digest{};
    std::int64_t pair_count = 0;
    Tick time = 0;
    std::map<BrokerId, crypto::Digest> flags;

    bool flagged() const { return !flags.empty(); }
    bool operator==(const AnchorRecord&) const = default;
};

struct WorldState {
    contracts::Bank bank;
    std::map<crypto::PublicKey, ParticipantId> key_directory;
    std::set<crypto::PublicKey> retired_keys;
    std::map<crypto::PublicKey, BrokerId> broker_keys;
    std::map<crypto::PublicKey, std::uint64_t> nonces;
    std::map<Address, contracts::ContractInstance> contracts;
    std::map<std::int64_t, AnchorRecord> anchors;

    std::optional<ParticipantId> account_of(const crypto::PublicKey& pk) const;
    std::set<BrokerId> members() const;
    Money escrow_total() const;
    // Everything that counts towards the fixed money supply.
    Money conservation_total() const { return bank.holdings() + escrow_total(); }

    void encode(crypto::Encoder& enc) const;
    crypto::Digest digest() const;

    bool operator==(const WorldState&) const = default;
};

struct Block {
    std::uint64_t height = 0;
    Tick time = 0;
    std::vector<Transaction> txs;
    std::vector<BrokerId> validators;
    crypto::Digest prev_digest{};
    crypto::Digest state_digest{};
    crypto::Digest digest{};
};

crypto::Digest compute_block_digest(const Block& b);

struct GenesisAccount {
    ParticipantId id{};
    crypto::PublicKey public_key;
    Money balance;
};

struct GenesisBroker {
    BrokerId id{};
    ParticipantId account{};
    crypto::PublicKey public_key;
};

struct Genesis {
    std::vector<GenesisAccount> accounts;
    std::vector<GenesisBroker> brokers;

    WorldState initial_state() const;
};

// Contract address derived from the deployer's key and nonce.
Address derive_address(const crypto::PublicKey& deployer, std::uint64_t nonce);

// Applies one transaction to `state`. Never throws for transaction-level
// errors: a failed result leaves state unchanged apart from the consumed
// nonce.
TxResult apply_transaction(WorldState& state, const Transaction& tx, Tick now);

std::size_t quorum_size(std::size_t members);

struct SealResult {
    const Block* block = nullptr;
    std::vector<TxResult> results;
};

// Broker-validated replicated log. A single sequencer orders pending
// transactions; every live broker re-executes the block and it commits only
// when a quorum of members agrees on the resulting state digest.
class Ledger {
public:
    explicit Ledger(Genesis genesis);

    SubmitReceipt submit_transaction(Transaction tx);

    // Returns nullopt when fewer than a quorum of members are live or agree;
    // the pending queue is kept for the next attempt.
    std::optional<SealResult> seal_block(Tick now, std::span<const BrokerId> live);

    const WorldState& state() const { return state_; }
    const contracts::ContractInstance& get_contract_state(const Address& address) const;
    const std::vector<Block>& chain() const { return chain_; }
    const Genesis& genesis() const { return genesis_; }
    std::size_t pending_count() const { return pending_.size(); }

    Money total_supply() const { return supply_; }
    Money conservation_residual() const { return state_.conservation_total() - supply_; }

    // Test hook: a faulty validator reports a corrupted state digest.
    void set_validator_fault(BrokerId broker, bool faulty);

private:
    bool known_abi(const Address& target, const std::string& abi) const;

    Genesis genesis_;
    WorldState state_;
    Money supply_;
    std::vector<Block> chain_;
    std::vector<Transaction> pending_;
    std::map<crypto::PublicKey, std::uint64_t> pending_nonces_;
    std::set<BrokerId> faulty_validators_;
};

// One line per block: height|digest|tx_count|validators
std::string chain_export(const std::vector<Block>& chain);

}  // namespace datamarket::ledger
