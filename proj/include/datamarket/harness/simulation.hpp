#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "datamarket/broker/network.hpp"
#include "datamarket/harness/report.hpp"
#include "datamarket/harness/scenario.hpp"
#include "datamarket/identity/participant.hpp"
#include "datamarket/ledger/ledger.hpp"

namespace datamarket::harness {

// A run-time invariant (funds conservation, token accounting, channel
// separation) failed. The run stops at the offending tick.
class InvariantViolation : public std::runtime_error {
public:
    InvariantViolation(Tick tick, const std::string& what)
        : std::runtime_error("tick " + std::to_string(tick) + ": " + what), tick_(tick) {}
    Tick tick() const { return tick_; }

private:
    Tick tick_;
};

// Drives one scenario end to end: registration, intake, multicast, matching,
// negotiation, contract deployment, metered delivery, settlement and
// removal, with faults injected at their scheduled ticks.
class Simulation {
public:
    explicit Simulation(Scenario scenario, std::optional<std::uint64_t> seed_override = std::nullopt);
    ~Simulation();
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    // Runs through tick `until` (inclusive) or to the end of the scenario.
    // Throws InvariantViolation.
    RunReport run(std::optional<Tick> until = std::nullopt);

    // Receives every trading-trace line as it is produced.
    void set_trace_sink(std::function<void(const std::string&)> sink);

    const Scenario& scenario() const;
    const ledger::Ledger& ledger() const;
    const broker::BrokerNetwork& network() const;
    const identity::Participant& participant(std::string_view name) const;
    // "time|seq|target|label" for every kernel event that ran.
    const std::vector<std::string>& event_log() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

RunReport run_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed = std::nullopt,
                       std::optional<Tick> until = std::nullopt);

}  // namespace datamarket::harness
