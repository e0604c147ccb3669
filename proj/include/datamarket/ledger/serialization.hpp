#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "datamarket/ledger/ledger.hpp"

namespace datamarket::ledger {

nlohmann::json to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Transaction& tx);
Transaction transaction_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Block& b);
Block block_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Genesis& g);
Genesis genesis_from_json(const nlohmann::json& j);

// Full chain dump for audit and replay: the genesis record on the first
// line, then one JSON block per line.
void write_chain_jsonl(std::ostream& out, const Genesis& genesis, const std::vector<Block>& chain);

struct ChainDump {
    Genesis genesis;
    std::vector<Block> blocks;
};
ChainDump read_chain_jsonl(std::istream& in);

}  // namespace datamarket::ledger
