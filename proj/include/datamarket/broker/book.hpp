#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "datamarket/common/crypto.hpp"
#include "datamarket/common/money.hpp"
#include "datamarket/common/types.hpp"

namespace datamarket::broker {

enum class DataAge { real_time, archived };

std::string_view to_string(DataAge a);
DataAge parse_data_age(std::string_view text);

// A provider's advertised offer.
struct Listing {
    SubmissionId id{};
    ParticipantId owner{};
    crypto::PublicKey provider_pk;
    std::int64_t device_id = 0;
    std::string data_type;
    Money unit_cost;
    Tick sampling_frequency = 1;
    Tick duration_offered = 0;
    Location location;
    bool archived = false;

    // Throws std::invalid_argument when unit_cost < 0 or frequency <= 0.
    void validate() const;
    bool operator==(const Listing&) const = default;
};

// A consumer's demand.
struct Query {
    SubmissionId id{};
    ParticipantId owner{};
    crypto::PublicKey consumer_pk;
    std::string data_type;
    DataAge data_age = DataAge::real_time;
    Location location;
    double radius = kUnbounded;
    Money budget;
    Tick frequency_required = 1;

    void validate() const;
    bool operator==(const Query&) const = default;
};

// Retained listings and queries as seen by one broker. Entries are keyed by
// submission id, which is unique network-wide, so merging a peer's delta is
// idempotent.
struct Book {
    std::map<SubmissionId, Listing> listings;
    std::map<SubmissionId, Query> queries;

    bool empty() const { return listings.empty() && queries.empty(); }
    std::size_t size() const { return listings.size() + queries.size(); }

    // Returns how many entries were new.
    std::size_t merge(const Book& other);
    bool erase(SubmissionId id);
    bool contains(SubmissionId id) const;

    crypto::Digest digest() const;
    bool operator==(const Book&) const = default;
};

}  // namespace datamarket::broker
