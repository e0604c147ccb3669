#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "datamarket/broker/book.hpp"
#include "datamarket/broker/matching.hpp"

namespace testkit {

using namespace datamarket;

// Seeded source of random test inputs.
struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}

    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
    }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng); }
    Money money(std::int64_t lo_micros, std::int64_t hi_micros) { return Money::from_micros(range(lo_micros, hi_micros)); }
    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(range(0, static_cast<std::int64_t>(v.size()) - 1))];
    }
};

// A book over a few data types with clustered prices, frequencies and
// positions so that every clause of the predicate both passes and fails.
inline broker::Book random_book(Gen& g, int listings, int queries) {
    static const std::vector<std::string> types{"T", "H", "P", "CO2"};
    broker::Book b;
    std::uint64_t id = 0;
    auto place = [&] { return Location{static_cast<double>(g.range(-50, 50)), static_cast<double>(g.range(-50, 50))}; };
    for (int i = 0; i < listings; ++i) {
        broker::Listing l;
        l.id = SubmissionId{++id};
        l.owner = ParticipantId{static_cast<std::uint32_t>(g.range(0, 40))};
        l.data_type = g.pick(types);
        l.unit_cost = g.money(0, 100'000);
        l.sampling_frequency = g.range(1, 60);
        l.location = place();
        l.archived = g.coin(0.2);
        b.listings[l.id] = l;
    }
    for (int i = 0; i < queries; ++i) {
        broker::Query q;
        q.id = SubmissionId{++id};
        q.owner = ParticipantId{static_cast<std::uint32_t>(g.range(0, 40))};
        q.data_type = g.pick(types);
        q.data_age = g.coin(0.2) ? broker::DataAge::archived : broker::DataAge::real_time;
        q.budget = g.money(0, 100'000);
        q.frequency_required = g.range(1, 60);
        q.location = place();
        q.radius = g.coin(0.3) ? kUnbounded : static_cast<double>(g.range(0, 60));
        b.queries[q.id] = q;
    }
    return b;
}

inline std::set<std::pair<std::uint64_t, std::uint64_t>> as_ids(const std::set<broker::MatchPair>& pairs) {
    std::set<std::pair<std::uint64_t, std::uint64_t>> out;
    for (const auto& p : pairs) out.emplace(to_underlying(p.query), to_underlying(p.listing));
    return out;
}

}  // namespace testkit
