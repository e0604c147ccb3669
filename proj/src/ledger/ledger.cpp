#include "datamarket/ledger/ledger.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace datamarket::ledger {
namespace {

const std::set<std::string, std::less<>> kKeyAbis{"RotateKey"};
const std::set<std::string, std::less<>> kAnchorAbis{"AnchorMatchRound", "FlagMatchRound"};
const std::set<std::string, std::less<>> kBrokerAbis{"AdmitBroker"};

struct TxFailure {
    std::string code;
};

[[noreturn]] void fail(std::string code) { throw TxFailure{std::move(code)}; }

crypto::Digest arg_digest(const Args& args, std::size_t i) { return arg_array<32>(args, i); }

BrokerId require_broker(const WorldState& s, const crypto::PublicKey& pk) {
    auto it = s.broker_keys.find(pk);
    if (it == s.broker_keys.end()) fail("not_broker");
    return it->second;
}

void apply_system(WorldState& s, const Transaction& tx, Tick now, ParticipantId sender, TxResult& r) {
    const auto& args = tx.args;
    if (tx.target == Address::deploy()) {
        contracts::Kind kind;
        try {
            kind = contracts::parse_kind(tx.abi);
        } catch (const contracts::ContractError&) {
            fail("unknown_abi");
        }
        Address address = derive_address(tx.sender, tx.nonce);
        if (s.contracts.count(address)) fail("address_in_use");
        auto inst = contracts::instantiate(kind, address, args);
        s.contracts.emplace(address, std::move(inst));
        r.outputs = {address.str()};
        return;
    }
    if (tx.target == Address::keys()) {
        if (tx.abi != "RotateKey") fail("unknown_abi");
        auto fresh = arg_key(args, 0);
        if (s.key_directory.count(fresh)) fail("key_in_use");
        s.key_directory[fresh] = sender;
        s.retired_keys.insert(tx.sender);
        if (auto b = s.broker_keys.find(tx.sender); b != s.broker_keys.end()) {
            s.broker_keys[fresh] = b->second;
            s.broker_keys.erase(b);
        }
        return;
    }
    if (tx.target == Address::anchor()) {
        BrokerId broker = require_broker(s, tx.sender);
        auto round = arg_int(args, 0);
        if (tx.abi == "AnchorMatchRound") {
            if (s.anchors.count(round)) fail("duplicate_round");
            AnchorRecord rec;
            rec.round = round;
            rec.broker = broker;
            rec.book_digest = arg_digest(args, 1);
            rec.match_digest = arg_digest(args, 2);
            rec.pair_count = arg_int(args, 3);
            rec.time = now;
            s.anchors.emplace(round, std::move(rec));
            return;
        }
        if (tx.abi == "FlagMatchRound") {
            auto it = s.anchors.find(round);
            if (it == s.anchors.end()) fail("unknown_round");
            if (it->second.broker == broker) fail("self_flag");
            auto honest = arg_digest(args, 1);
            if (honest == it->second.match_digest) fail("no_mismatch");
            it->second.flags.emplace(broker, honest);
            return;
        }
        fail("unknown_abi");
    }
    if (tx.target == Address::brokers()) {
        if (tx.abi != "AdmitBroker") fail("unknown_abi");
        require_broker(s, tx.sender);
        auto id = arg_int(args, 0);
        auto account = arg_int(args, 1);
        auto pk = arg_key(args, 2);
        auto accept = arg_int(args, 3);
        auto total = arg_int(args, 4);
        if (id < 0 || account < 0) fail("malformed");
        if (total <= 0 || accept * 2 <= total) fail("not_admitted");
        BrokerId bid{static_cast<std::uint32_t>(id)};
        for (const auto& [_, b] : s.broker_keys)
            if (b == bid) fail("already_broker");
        if (s.key_directory.count(pk)) fail("key_in_use");
        s.key_directory[pk] = ParticipantId{static_cast<std::uint32_t>(account)};
        s.broker_keys[pk] = bid;
        s.bank.balances.try_emplace(ParticipantId{static_cast<std::uint32_t>(account)}, Money{});
        s.bank.fee_accounts.try_emplace(bid, Money{});
        return;
    }
    fail("unknown_target");
}

}  // namespace

std::string_view to_string(RejectReason r) {
    switch (r) {
        case RejectReason::bad_signature: return "bad_signature";
        case RejectReason::stale_nonce: return "stale_nonce";
        case RejectReason::unknown_target: return "unknown_target";
        case RejectReason::unknown_abi: return "unknown_abi";
        case RejectReason::unknown_sender: return "unknown_sender";
        case RejectReason::retired_key: return "retired_key";
    }
    return "?";
}

std::optional<ParticipantId> WorldState::account_of(const crypto::PublicKey& pk) const {
    auto it = key_directory.find(pk);
    if (it == key_directory.end()) return std::nullopt;
    return it->second;
}

std::set<BrokerId> WorldState::members() const {
    std::set<BrokerId> out;
    for (const auto& [_, b] : broker_keys) out.insert(b);
    return out;
}

Money WorldState::escrow_total() const {
    Money total;
    for (const auto& [_, c] : contracts)
        if (c.kind == contracts::Kind::dsc) total += c.as_dsc().escrow_total();
    return total;
}

void WorldState::encode(crypto::Encoder& enc) const {
    enc.str("world").u64(bank.balances.size());
    for (const auto& [id, m] : bank.balances) enc.u64(to_underlying(id)).i64(m.micros());
    enc.u64(bank.fee_accounts.size());
    for (const auto& [id, m] : bank.fee_accounts) enc.u64(to_underlying(id)).i64(m.micros());
    enc.i64(bank.frozen.micros());
    enc.u64(key_directory.size());
    for (const auto& [pk, id] : key_directory) enc.bytes(pk.bytes).u64(to_underlying(id));
    enc.u64(retired_keys.size());
    for (const auto& pk : retired_keys) enc.bytes(pk.bytes);
    enc.u64(broker_keys.size());
    for (const auto& [pk, id] : broker_keys) enc.bytes(pk.bytes).u64(to_underlying(id));
    enc.u64(nonces.size());
    for (const auto& [pk, n] : nonces) enc.bytes(pk.bytes).u64(n);
    enc.u64(contracts.size());
    for (const auto& [_, c] : contracts) c.encode(enc);
    enc.u64(anchors.size());
    for (const auto& [round, a] : anchors) {
        enc.i64(round).u64(to_underlying(a.broker)).bytes(a.book_digest).bytes(a.match_digest).i64(a.pair_count).i64(a.time);
        enc.u64(a.flags.size());
        for (const auto& [b, d] : a.flags) enc.u64(to_underlying(b)).bytes(d);
    }
}

crypto::Digest WorldState::digest() const {
    crypto::Encoder enc;
    encode(enc);
    return crypto::hash(enc);
}

crypto::Digest compute_block_digest(const Block& b) {
    crypto::Encoder enc;
    enc.str("block").bytes(b.prev_digest).u64(b.height).i64(b.time).u64(b.txs.size());
    for (const auto& tx : b.txs) enc.bytes(tx.id());
    enc.bytes(b.state_digest);
    return crypto::hash(enc);
}

WorldState Genesis::initial_state() const {
    WorldState s;
    for (const auto& a : accounts) {
        if (a.balance.is_negative()) throw std::invalid_argument("negative genesis balance");
        if (!s.key_directory.emplace(a.public_key, a.id).second) throw std::invalid_argument("duplicate genesis key");
        s.bank.balances[a.id] += a.balance;
    }
    for (const auto& b : brokers) {
        s.key_directory.try_emplace(b.public_key, b.account);
        s.broker_keys[b.public_key] = b.id;
        s.bank.balances.try_emplace(b.account, Money{});
        s.bank.fee_accounts.try_emplace(b.id, Money{});
    }
    return s;
}

Address derive_address(const crypto::PublicKey& deployer, std::uint64_t nonce) {
    crypto::Encoder enc;
    enc.str("address").bytes(deployer.bytes).u64(nonce);
    auto d = crypto::hash(enc);
    return Address{"0X" + crypto::to_hex(std::span<const std::uint8_t>(d.data(), 20), true)};
}

TxResult apply_transaction(WorldState& s, const Transaction& tx, Tick now) {
    TxResult r;
    r.tx_id = tx.id();
    r.sender = tx.sender;
    r.target = tx.target;
    r.abi = tx.abi;

    if (!tx.signature_valid()) {
        r.error = "bad_signature";
        return r;
    }
    auto sender = s.account_of(tx.sender);
    if (!sender) {
        r.error = "unknown_sender";
        return r;
    }
    if (s.retired_keys.count(tx.sender)) {
        r.error = "retired_key";
        return r;
    }
    auto& last_nonce = s.nonces[tx.sender];
    if (tx.nonce <= last_nonce) {
        r.error = "stale_nonce";
        return r;
    }
    last_nonce = tx.nonce;

    try {
        if (tx.target.is_system()) {
            WorldState scratch = s;
            apply_system(scratch, tx, now, *sender, r);
            s = std::move(scratch);
        } else {
            auto it = s.contracts.find(tx.target);
            if (it == s.contracts.end()) fail("unknown_target");
            contracts::Bank bank = s.bank;
            contracts::ContractInstance inst = it->second;
            std::vector<contracts::Event> events;
            contracts::CallContext ctx{now,
                                       tx.sender,
                                       tx.target,
                                       bank,
                                       events,
                                       [&s](const crypto::PublicKey& pk) { return s.account_of(pk); },
                                       [&s](const Address& a) { return s.contracts.count(a) > 0; }};
            r.outputs = contracts::invoke(inst, tx.abi, tx.args, ctx);
            s.bank = std::move(bank);
            it->second = std::move(inst);
            r.events = std::move(events);
        }
        r.ok = true;
    } catch (const TxFailure& f) {
        r.error = f.code;
    } catch (const contracts::ContractError& e) {
        r.error = e.code();
    } catch (const ArgumentError&) {
        r.error = "malformed";
    }
    if (!r.ok) {
        r.outputs.clear();
        r.events.clear();
    }
    return r;
}

std::size_t quorum_size(std::size_t members) { return members / 2 + 1; }

Ledger::Ledger(Genesis genesis) : genesis_(std::move(genesis)), state_(genesis_.initial_state()) {
    supply_ = state_.conservation_total();
}

bool Ledger::known_abi(const Address& target, const std::string& abi) const {
    if (target == Address::deploy()) return abi == "register" || abi == "dsc";
    if (target == Address::keys()) return kKeyAbis.count(abi) > 0;
    if (target == Address::anchor()) return kAnchorAbis.count(abi) > 0;
    if (target == Address::brokers()) return kBrokerAbis.count(abi) > 0;
    const auto& abis = state_.contracts.at(target).abis;
    return std::find(abis.begin(), abis.end(), abi) != abis.end();
}

SubmitReceipt Ledger::submit_transaction(Transaction tx) {
    auto reject = [](RejectReason r) { return SubmitReceipt{false, r}; };
    if (!tx.signature_valid()) return reject(RejectReason::bad_signature);
    if (!state_.account_of(tx.sender)) return reject(RejectReason::unknown_sender);
    if (state_.retired_keys.count(tx.sender)) return reject(RejectReason::retired_key);
    std::uint64_t floor = 0;
    if (auto it = state_.nonces.find(tx.sender); it != state_.nonces.end()) floor = it->second;
    if (auto it = pending_nonces_.find(tx.sender); it != pending_nonces_.end()) floor = std::max(floor, it->second);
    if (tx.nonce <= floor) return reject(RejectReason::stale_nonce);
    if (!tx.target.is_system() && !state_.contracts.count(tx.target)) return reject(RejectReason::unknown_target);
    if (!known_abi(tx.target, tx.abi)) return reject(RejectReason::unknown_abi);

    pending_nonces_[tx.sender] = tx.nonce;
    pending_.push_back(std::move(tx));
    return SubmitReceipt{true, std::nullopt};
}

std::optional<SealResult> Ledger::seal_block(Tick now, std::span<const BrokerId> live) {
    auto members = state_.members();
    std::vector<BrokerId> voters;
    for (auto b : live)
        if (members.count(b)) voters.push_back(b);
    std::sort(voters.begin(), voters.end());
    voters.erase(std::unique(voters.begin(), voters.end()), voters.end());
    const std::size_t quorum = quorum_size(members.size());
    if (members.empty() || voters.size() < quorum) return std::nullopt;

    std::vector<Transaction> ordered = pending_;
    std::stable_sort(ordered.begin(), ordered.end(), tx_order);

    struct Execution {
        WorldState state;
        std::vector<TxResult> results;
        std::vector<BrokerId> voters;
    };
    std::map<crypto::Digest, Execution> by_digest;
    for (auto v : voters) {
        WorldState replica = state_;
        std::vector<TxResult> results;
        results.reserve(ordered.size());
        for (const auto& tx : ordered) results.push_back(apply_transaction(replica, tx, now));
        crypto::Digest d = replica.digest();
        if (faulty_validators_.count(v)) {
            d[0] ^= 0xFF;
            d[1] ^= static_cast<std::uint8_t>(to_underlying(v) + 1);
        }
        auto [it, fresh] = by_digest.try_emplace(d);
        if (fresh) {
            it->second.state = std::move(replica);
            it->second.results = std::move(results);
        }
        it->second.voters.push_back(v);
    }
    auto best = std::max_element(by_digest.begin(), by_digest.end(), [](const auto& a, const auto& b) {
        return a.second.voters.size() < b.second.voters.size();
    });
    if (best->second.voters.size() < quorum) return std::nullopt;

    Block block;
    block.height = chain_.size();
    block.time = now;
    block.txs = std::move(ordered);
    block.validators = best->second.voters;
    block.prev_digest = chain_.empty() ? state_.digest() : chain_.back().digest;
    block.state_digest = best->first;
    block.digest = compute_block_digest(block);

    state_ = std::move(best->second.state);
    chain_.push_back(std::move(block));
    pending_.clear();
    pending_nonces_.clear();
    return SealResult{&chain_.back(), std::move(best->second.results)};
}

const contracts::ContractInstance& Ledger::get_contract_state(const Address& address) const {
    auto it = state_.contracts.find(address);
    if (it == state_.contracts.end()) throw std::out_of_range("unknown_address: " + address.str());
    return it->second;
}

void Ledger::set_validator_fault(BrokerId broker, bool faulty) {
    if (faulty)
        faulty_validators_.insert(broker);
    else
        faulty_validators_.erase(broker);
}

std::string chain_export(const std::vector<Block>& chain) {
    std::ostringstream out;
    for (const auto& b : chain) {
        out << b.height << '|' << crypto::to_hex(b.digest) << '|' << b.txs.size() << '|';
        for (std::size_t i = 0; i < b.validators.size(); ++i) out << (i ? "," : "") << to_underlying(b.validators[i]);
        out << '\n';
    }
    return out.str();
}

}  // namespace datamarket::ledger
