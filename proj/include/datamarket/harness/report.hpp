#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "datamarket/common/crypto.hpp"
#include "datamarket/common/money.hpp"
#include "datamarket/ledger/ledger.hpp"

namespace datamarket::harness {

struct ContractRow {
    std::string name;
    std::string address;
    std::string provider;
    std::string consumer;
    std::string listing;
    std::string query;
    std::uint32_t broker = 0;
    std::int64_t round = 0;
    Money price;
    Tick start = 0;
    Tick end = 0;
    std::string status;
    std::int64_t transfers = 0;
    std::int64_t full_settlements = 0;
    std::int64_t partial_settlements = 0;
    std::int64_t settled_units = 0;
    Money revenue;
    std::int64_t disputes = 0;
    Tick dispute_tick = -1;
    std::string dispute_cause;
    Money fees;
    Money provider_refund;
    Money consumer_refund;
    Money frozen;
};

struct BrokerRow {
    std::uint32_t id = 0;
    bool live = true;
    std::size_t participants = 0;
    std::int64_t fee_tokens = 0;
    Money fees;
    std::int64_t anchored_rounds = 0;
    std::int64_t flagged_rounds = 0;
};

struct ParticipantRow {
    std::string name;
    std::string role;
    Money balance;
    std::string reputation;
    std::string home_broker;
    std::size_t keys = 0;
};

struct RunReport {
    std::uint64_t seed = 0;
    Tick ticks_run = 0;
    std::vector<ContractRow> contracts;
    std::vector<BrokerRow> brokers;
    std::vector<ParticipantRow> participants;

    Money residual;
    Money max_abs_residual;
    std::int64_t ticks_checked = 0;

    std::uint64_t blocks = 0;
    std::uint64_t transactions = 0;
    std::uint64_t failed_transactions = 0;
    std::uint64_t multicast_messages = 0;
    std::uint64_t multicast_deliveries = 0;
    std::uint64_t match_rounds = 0;
    std::uint64_t flagged_rounds = 0;
    std::vector<std::int64_t> collusion_rounds;
    std::int64_t negotiations = 0;
    std::int64_t negotiation_failures = 0;
    std::size_t eavesdrop_frames = 0;
    std::size_t eavesdrop_recovered = 0;
    std::size_t plaintext_leaks = 0;

    // time|event_kind|dsc|sub|party|detail
    std::vector<std::string> trade_trace;
    // round|broker|book_digest|match_digest|pair_count
    std::vector<std::string> match_audit;
    // tick|participant|balance, one line each time a balance moves
    std::vector<std::string> balance_log;
    std::string chain_export;
    std::string subscription_tables;
    std::string lookup_table;

    ledger::Genesis genesis;
    std::vector<ledger::Block> blocks_full;
    std::map<std::string, std::string> contract_digests;  // address -> hex
    std::string final_state_digest;

    std::string contracts_table() const;
    std::string brokers_table() const;
    std::string participants_table() const;
    std::string summary_table() const;

    // Digest over every emitted file, for determinism checks.
    crypto::Digest digest() const;
};

inline constexpr const char* kContractsHeader =
    "contract|address|provider|consumer|listing|query|broker|round|price|start|end|status|transfers|"
    "full_settlements|partial_settlements|settled_units|revenue|disputes|dispute_tick|dispute_cause|fees|"
    "provider_refund|consumer_refund|frozen";
inline constexpr const char* kBrokersHeader = "broker|live|participants|fee_tokens|fees|anchored_rounds|flagged_rounds";
inline constexpr const char* kParticipantsHeader = "participant|role|balance|reputation|home_broker|keys";
inline constexpr const char* kSummaryHeader = "metric|value";
inline constexpr const char* kTraceHeader = "time|event_kind|dsc|sub|party|detail";
inline constexpr const char* kMatchAuditHeader = "round|broker|book_digest|match_digest|pair_count";
inline constexpr const char* kChainHeader = "height|digest|tx_count|validators";

// Writes contracts.txt, brokers.txt, participants.txt, summary.txt,
// trading_trace.txt, match_audit.txt, chain.txt, chain.jsonl,
// subscriptions.txt and lookup.txt into `dir`, creating it if needed.
// Throws std::runtime_error when a file cannot be written.
void emit_metrics(const RunReport& report, const std::filesystem::path& dir);

// Chain export plus the full block log next to it (`<path>.jsonl`).
void write_chain(const RunReport& report, const std::filesystem::path& path);

}  // namespace datamarket::harness
