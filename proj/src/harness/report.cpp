#include "datamarket/harness/report.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "datamarket/ledger/serialization.hpp"

namespace datamarket::harness {
namespace {

std::string join_lines(const char* header, const std::vector<std::string>& lines) {
    std::string out = std::string(header) + '\n';
    for (const auto& l : lines) out += l + '\n';
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string chain_jsonl(const RunReport& r) {
    std::ostringstream out;
    ledger::write_chain_jsonl(out, r.genesis, r.blocks_full);
    return out.str();
}

}  // namespace

std::string RunReport::contracts_table() const {
    std::ostringstream out;
    out << kContractsHeader << '\n';
    for (const auto& c : contracts) {
        out << c.name << '|' << c.address << '|' << c.provider << '|' << c.consumer << '|' << c.listing << '|'
            << c.query << '|' << c.broker << '|' << c.round << '|' << c.price.to_string() << '|' << c.start << '|'
            << c.end << '|' << c.status << '|' << c.transfers << '|' << c.full_settlements << '|'
            << c.partial_settlements << '|' << c.settled_units << '|' << c.revenue.to_string() << '|' << c.disputes
            << '|' << c.dispute_tick << '|' << c.dispute_cause << '|' << c.fees.to_string() << '|'
            << c.provider_refund.to_string() << '|' << c.consumer_refund.to_string() << '|' << c.frozen.to_string()
            << '\n';
    }
    return out.str();
}

std::string RunReport::brokers_table() const {
    std::ostringstream out;
    out << kBrokersHeader << '\n';
    for (const auto& b : brokers)
        out << b.id << '|' << (b.live ? "yes" : "no") << '|' << b.participants << '|' << b.fee_tokens << '|'
            << b.fees.to_string() << '|' << b.anchored_rounds << '|' << b.flagged_rounds << '\n';
    return out.str();
}

std::string RunReport::participants_table() const {
    std::ostringstream out;
    out << kParticipantsHeader << '\n';
    for (const auto& p : participants)
        out << p.name << '|' << p.role << '|' << p.balance.to_string() << '|' << p.reputation << '|' << p.home_broker
            << '|' << p.keys << '\n';
    return out.str();
}

std::string RunReport::summary_table() const {
    std::ostringstream out;
    out << kSummaryHeader << '\n';
    auto row = [&](const char* k, const auto& v) { out << k << '|' << v << '\n'; };
    std::int64_t transfers = 0, completed = 0, disputed = 0;
    Money revenue, fees;
    for (const auto& c : contracts) {
        transfers += c.transfers;
        revenue += c.revenue;
        fees += c.fees;
        completed += c.status == "completed" ? 1 : 0;
        disputed += c.disputes;
    }
    row("seed", seed);
    row("ticks", ticks_run);
    row("contracts", contracts.size());
    row("completed_contracts", completed);
    row("disputed_contracts", disputed);
    row("transfers", transfers);
    row("provider_revenue", revenue.to_string());
    row("broker_fees", fees.to_string());
    row("conservation_residual", residual.to_string());
    row("max_abs_residual", max_abs_residual.to_string());
    row("ticks_checked", ticks_checked);
    row("blocks", blocks);
    row("transactions", transactions);
    row("failed_transactions", failed_transactions);
    row("multicast_messages", multicast_messages);
    row("multicast_deliveries", multicast_deliveries);
    row("match_rounds", match_rounds);
    row("flagged_rounds", flagged_rounds);
    row("negotiations", negotiations);
    row("negotiation_failures", negotiation_failures);
    row("eavesdrop_frames", eavesdrop_frames);
    row("eavesdrop_recovered", eavesdrop_recovered);
    row("plaintext_leaks", plaintext_leaks);
    row("final_state_digest", final_state_digest);
    return out.str();
}

crypto::Digest RunReport::digest() const {
    crypto::Encoder enc;
    enc.str(contracts_table())
        .str(brokers_table())
        .str(participants_table())
        .str(summary_table())
        .str(join_lines(kTraceHeader, trade_trace))
        .str(join_lines(kMatchAuditHeader, match_audit))
        .str(chain_export)
        .str(chain_jsonl(*this))
        .str(subscription_tables)
        .str(lookup_table);
    return crypto::hash(enc);
}

void emit_metrics(const RunReport& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    write_file(dir / "contracts.txt", r.contracts_table());
    write_file(dir / "brokers.txt", r.brokers_table());
    write_file(dir / "participants.txt", r.participants_table());
    write_file(dir / "summary.txt", r.summary_table());
    write_file(dir / "trading_trace.txt", join_lines(kTraceHeader, r.trade_trace));
    write_file(dir / "match_audit.txt", join_lines(kMatchAuditHeader, r.match_audit));
    write_file(dir / "chain.txt", std::string(kChainHeader) + '\n' + r.chain_export);
    write_file(dir / "chain.jsonl", chain_jsonl(r));
    write_file(dir / "subscriptions.txt", r.subscription_tables);
    write_file(dir / "lookup.txt", r.lookup_table);
}

void write_chain(const RunReport& r, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    write_file(path, std::string(kChainHeader) + '\n' + r.chain_export);
    write_file(std::filesystem::path(path.string() + ".jsonl"), chain_jsonl(r));
}

}  // namespace datamarket::harness
