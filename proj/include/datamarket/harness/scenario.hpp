#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "datamarket/broker/admission.hpp"
#include "datamarket/broker/book.hpp"
#include "datamarket/common/money.hpp"
#include "datamarket/common/sim_time.hpp"
#include "datamarket/identity/participant.hpp"
#include "datamarket/trading/negotiation.hpp"

namespace datamarket::harness {

// Parse or validation failure. Line and column are 1-based; zero when the
// problem is not tied to a position.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(int line, int column, const std::string& message);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

struct BrokerSpec {
    BrokerId id{};
    Location location;
};

struct ParticipantSpec {
    std::string name;
    identity::Role role = identity::Role::consumer;
    Money balance;
    Location location;
};

struct ListingSpec {
    std::string name;
    std::string provider;
    std::int64_t device_id = 0;
    std::string data_type;
    Money unit_cost;
    // Lowest price the provider will negotiate down to.
    Money min_price;
    Tick sampling_frequency = 1;
    Tick duration_offered = 0;
    Location location;
    bool archived = false;
    Tick at = 0;
};

struct QuerySpec {
    std::string name;
    std::string consumer;
    std::string data_type;
    broker::DataAge data_age = broker::DataAge::real_time;
    Location location;
    double radius = kUnbounded;
    Money budget;
    Tick frequency_required = 1;
    // Requested subscription window. Without a start the subscription begins
    // a setup lead after the deal; without an end it lasts `period`.
    std::optional<Tick> start;
    std::optional<Tick> end;
    Tick period = 0;
    std::optional<std::int64_t> granularity;
    Tick at = 0;
};

enum class FaultKind {
    broker_crash,
    broker_recover,
    counter_tamper,
    payment_refusal,
    delivery_stall,
    eavesdrop,
    broker_collusion_bias,
};

std::string_view to_string(FaultKind k);
FaultKind parse_fault_kind(std::string_view text);
bool targets_broker(FaultKind k);

struct FaultSpec {
    FaultKind kind = FaultKind::broker_crash;
    std::string target;
    Tick at = 0;
    std::map<std::string, std::string> params;

    std::int64_t param_int(const std::string& key, std::int64_t fallback) const;
    BrokerId target_broker() const;
};

struct AdmissionSpec {
    BrokerId candidate{};
    Location location;
    Tick at = 0;
    std::map<BrokerId, broker::Vote> votes;
};

struct RotationSpec {
    std::string participant;
    Tick at = 0;
};

struct Economics {
    Money broker_fee = Money::parse("0.1");
    std::int64_t granularity = 100;
    Tick setup_lead = 60;
};

struct NegotiationConfig {
    int max_rounds = 5;
    trading::RequesterRole requester = trading::RequesterRole::consumer;
    int margin_percent = 10;
};

struct Scenario {
    std::uint64_t seed = 0;
    TimeBase time;
    Tick duration = 0;
    Tick hop_delay = 0;
    Economics economics;
    NegotiationConfig negotiation;
    std::vector<BrokerSpec> brokers;
    std::vector<ParticipantSpec> participants;
    std::vector<ListingSpec> listings;
    std::vector<QuerySpec> queries;
    std::vector<FaultSpec> faults;
    std::vector<AdmissionSpec> admissions;
    std::vector<RotationSpec> rotations;

    const ParticipantSpec* find_participant(std::string_view name) const;
    bool has_broker(BrokerId id) const;
};

// Parses the YAML scenario format documented in the README and checks every
// cross reference. Throws ScenarioError.
Scenario load_scenario(std::string_view text);
Scenario load_scenario_file(const std::filesystem::path& path);

}  // namespace datamarket::harness
