#include "datamarket/ledger/serialization.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

namespace datamarket::ledger {
namespace {

using nlohmann::json;

template <std::size_t N>
std::array<std::uint8_t, N> fixed_from_hex(const json& j) {
    Bytes b = crypto::from_hex(j.get<std::string>());
    if (b.size() != N) throw std::invalid_argument("wrong length hex field");
    std::array<std::uint8_t, N> out{};
    std::copy(b.begin(), b.end(), out.begin());
    return out;
}

crypto::PublicKey key_from_json(const json& j) { return {fixed_from_hex<32>(j)}; }

}  // namespace

json to_json(const Value& v) {
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::int64_t>) {
                return json{{"i", x}};
            } else if constexpr (std::is_same_v<T, Money>) {
                return json{{"m", x.micros()}};
            } else if constexpr (std::is_same_v<T, std::string>) {
                return json{{"s", x}};
            } else {
                return json{{"b", crypto::to_hex(x)}};
            }
        },
        v);
}

Value value_from_json(const json& j) {
    if (j.contains("i")) return j.at("i").get<std::int64_t>();
    if (j.contains("m")) return Money::from_micros(j.at("m").get<std::int64_t>());
    if (j.contains("s")) return j.at("s").get<std::string>();
    if (j.contains("b")) return crypto::from_hex(j.at("b").get<std::string>());
    throw std::invalid_argument("untyped value in chain dump");
}

json to_json(const Transaction& tx) {
    json args = json::array();
    for (const auto& a : tx.args) args.push_back(to_json(a));
    return json{{"sender", crypto::to_hex(tx.sender)}, {"target", tx.target.str()}, {"abi", tx.abi},
                {"args", args},  {"nonce", tx.nonce},  {"time", tx.time},
                {"sig", crypto::to_hex(tx.signature.bytes)}};
}

Transaction transaction_from_json(const json& j) {
    Transaction tx;
    tx.sender = key_from_json(j.at("sender"));
    tx.target = Address{j.at("target").get<std::string>()};
    tx.abi = j.at("abi").get<std::string>();
    for (const auto& a : j.at("args")) tx.args.push_back(value_from_json(a));
    tx.nonce = j.at("nonce").get<std::uint64_t>();
    tx.time = j.at("time").get<Tick>();
    tx.signature = crypto::Signature{fixed_from_hex<64>(j.at("sig"))};
    return tx;
}

json to_json(const Block& b) {
    json txs = json::array();
    for (const auto& tx : b.txs) txs.push_back(to_json(tx));
    json validators = json::array();
    for (auto v : b.validators) validators.push_back(to_underlying(v));
    return json{{"height", b.height},
                {"time", b.time},
                {"prev", crypto::to_hex(b.prev_digest)},
                {"state", crypto::to_hex(b.state_digest)},
                {"digest", crypto::to_hex(b.digest)},
                {"validators", validators},
                {"txs", txs}};
}

Block block_from_json(const json& j) {
    Block b;
    b.height = j.at("height").get<std::uint64_t>();
    b.time = j.at("time").get<Tick>();
    b.prev_digest = fixed_from_hex<32>(j.at("prev"));
    b.state_digest = fixed_from_hex<32>(j.at("state"));
    b.digest = fixed_from_hex<32>(j.at("digest"));
    for (const auto& v : j.at("validators")) b.validators.push_back(BrokerId{v.get<std::uint32_t>()});
    for (const auto& t : j.at("txs")) b.txs.push_back(transaction_from_json(t));
    return b;
}

json to_json(const Genesis& g) {
    json accounts = json::array();
    for (const auto& a : g.accounts)
        accounts.push_back({{"id", to_underlying(a.id)}, {"pk", crypto::to_hex(a.public_key)}, {"balance", a.balance.micros()}});
    json brokers = json::array();
    for (const auto& b : g.brokers)
        brokers.push_back({{"id", to_underlying(b.id)}, {"account", to_underlying(b.account)}, {"pk", crypto::to_hex(b.public_key)}});
    return json{{"genesis", {{"accounts", accounts}, {"brokers", brokers}}}};
}

Genesis genesis_from_json(const json& j) {
    const json& g = j.at("genesis");
    Genesis out;
    for (const auto& a : g.at("accounts"))
        out.accounts.push_back({ParticipantId{a.at("id").get<std::uint32_t>()}, key_from_json(a.at("pk")),
                                Money::from_micros(a.at("balance").get<std::int64_t>())});
    for (const auto& b : g.at("brokers"))
        out.brokers.push_back({BrokerId{b.at("id").get<std::uint32_t>()}, ParticipantId{b.at("account").get<std::uint32_t>()},
                               key_from_json(b.at("pk"))});
    return out;
}

void write_chain_jsonl(std::ostream& out, const Genesis& genesis, const std::vector<Block>& chain) {
    out << to_json(genesis).dump() << '\n';
    for (const auto& b : chain) out << to_json(b).dump() << '\n';
}

ChainDump read_chain_jsonl(std::istream& in) {
    ChainDump dump;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = json::parse(line);
        if (first) {
            dump.genesis = genesis_from_json(j);
            first = false;
        } else {
            dump.blocks.push_back(block_from_json(j));
        }
    }
    if (first) throw std::invalid_argument("empty chain dump");
    return dump;
}

}  // namespace datamarket::ledger
