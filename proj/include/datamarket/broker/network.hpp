#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "datamarket/broker/book.hpp"
#include "datamarket/broker/matching.hpp"

namespace datamarket::broker {

struct NoBrokerError : std::runtime_error {
    NoBrokerError() : std::runtime_error("no_broker") {}
};

struct BrokerState {
    BrokerId id{};
    Location location;
    bool live = true;
    std::set<ParticipantId> registered;
    // Merged view of every broker's retained items.
    Book book;
    // Own submissions not yet multicast to peers.
    Book unsent;
    std::int64_t fee_tokens = 0;
    std::set<Address> token_dscs;
};

// Minimum Euclidean distance over live brokers, lowest id on ties.
std::optional<BrokerId> nearest_live_broker(const Location& where, const std::vector<BrokerState>& brokers);

struct FailoverReport {
    BrokerId failed{};
    std::vector<std::pair<ParticipantId, BrokerId>> moved;
    std::vector<ParticipantId> unassigned;
    std::size_t resubmitted = 0;
};

// The broker tier as seen by the simulator. Each broker only changes its own
// state except through multicast deliveries.
class BrokerNetwork {
public:
    void add_broker(BrokerId id, Location location);

    // Throws NoBrokerError when every broker is down.
    BrokerId register_participant(ParticipantId p, Location where);
    std::optional<BrokerId> home_of(ParticipantId p) const;
    bool is_unassigned(ParticipantId p) const { return unassigned_.count(p) > 0; }

    // Intake through the owner's home broker. Assigns a network-unique id.
    SubmissionId submit_listing(Listing l);
    SubmissionId submit_query(Query q);

    // Sends the origin's unsent delta to every other live broker. Returns the
    // number of (entry, recipient) deliveries.
    std::size_t multicast_lists(BrokerId origin);

    // Honest match lists for the origin's registered participants.
    std::vector<MatchResult> match(BrokerId b, std::int64_t round) const;

    // Marks the broker down and re-homes its participants. Entries the failed
    // broker had not multicast yet are resubmitted by their owners.
    FailoverReport handle_broker_failure(BrokerId failed);

    // Brings a broker back, resynchronising its book from the lowest-id live
    // peer and re-homing participants left without a broker. Returns the
    // number of book entries it gained.
    std::size_t recover_broker(BrokerId b);

    // False when this DSC already earned the broker a token.
    bool award_fee_token(BrokerId b, const Address& dsc);

    // Removes an item from every live book once a DSC referencing it has been
    // registered on the ledger.
    void retire(SubmissionId id);
    bool is_retired(SubmissionId id) const { return retired_.count(id) > 0; }

    const BrokerState& broker(BrokerId b) const;
    const std::vector<BrokerState>& brokers() const { return brokers_; }
    std::vector<BrokerId> live_brokers() const;
    std::map<BrokerId, std::int64_t> token_holdings() const;

    std::uint64_t multicast_messages() const { return messages_; }
    std::uint64_t multicast_deliveries() const { return deliveries_; }

private:
    BrokerState& mut(BrokerId b);
    SubmissionId next_id() { return SubmissionId{++last_id_}; }

    std::vector<BrokerState> brokers_;
    std::map<ParticipantId, Location> locations_;
    std::map<ParticipantId, BrokerId> home_;
    std::set<ParticipantId> unassigned_;
    std::set<SubmissionId> retired_;
    std::uint64_t last_id_ = 0;
    std::uint64_t messages_ = 0;
    std::uint64_t deliveries_ = 0;
};

}  // namespace datamarket::broker
