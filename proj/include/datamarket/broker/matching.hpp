#pragma once

#include <compare>
#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "datamarket/broker/book.hpp"

namespace datamarket::broker {

// The four-clause match predicate plus the data-age rule: same data type,
// listing inside the query radius, unit cost within budget, listing sampled
// at least as often as required, archived queries only against archived
// listings.
bool satisfies(const Query& q, const Listing& l);

enum class Side { consumer, provider };

struct Counterpart {
    crypto::PublicKey pk;
    ParticipantId participant{};
    SubmissionId item{};
    std::string data_type;
    // Listing unit cost when the requester is a consumer, query budget when
    // the requester is a provider.
    Money quoted_price;

    bool operator==(const Counterpart&) const = default;
};

struct MatchResult {
    crypto::PublicKey requester_pk;
    ParticipantId requester{};
    SubmissionId requester_item{};
    Side side = Side::consumer;
    std::vector<Counterpart> counterparts;
    BrokerId broker{};
    std::int64_t round = 0;

    bool operator==(const MatchResult&) const = default;
};

struct MatchPair {
    SubmissionId query{};
    SubmissionId listing{};
    auto operator<=>(const MatchPair&) const = default;
};

// Listings grouped by data type and sorted by unit cost, so a query only
// scans the affordable prefix of its own type.
class MatchIndex {
public:
    explicit MatchIndex(const Book& book);
    std::vector<const Listing*> candidates(const Query& q) const;

private:
    std::unordered_map<std::string, std::vector<const Listing*>> by_type_;
};

// All satisfying (query, listing) pairs in the book.
std::set<MatchPair> match_pairs(const Book& book);

// Match lists for every item owned by one of `owners`: consumers get listings
// cheapest first, providers get queries with the highest budget first.
std::vector<MatchResult> build_results(const Book& book, const std::set<ParticipantId>& owners, BrokerId broker,
                                       std::int64_t round);

std::set<MatchPair> pairs_of(const std::vector<MatchResult>& results);

// Canonical digest of a round's output; independent of round number and
// broker so an honest peer recomputing the same book gets the same value.
crypto::Digest match_digest(const std::vector<MatchResult>& results);

}  // namespace datamarket::broker
