#include "datamarket/broker/matching.hpp"

#include <algorithm>
#include <map>

namespace datamarket::broker {

bool satisfies(const Query& q, const Listing& l) {
    if (q.data_type != l.data_type) return false;
    if ((q.data_age == DataAge::archived) != l.archived) return false;
    if (l.unit_cost > q.budget) return false;
    if (l.sampling_frequency > q.frequency_required) return false;
    return q.location.squared_distance(l.location) <= q.radius * q.radius;
}

MatchIndex::MatchIndex(const Book& book) {
    for (const auto& [_, l] : book.listings) by_type_[l.data_type].push_back(&l);
    for (auto& [_, v] : by_type_)
        std::sort(v.begin(), v.end(), [](const Listing* a, const Listing* b) {
            if (a->unit_cost != b->unit_cost) return a->unit_cost < b->unit_cost;
            return a->id < b->id;
        });
}

std::vector<const Listing*> MatchIndex::candidates(const Query& q) const {
    std::vector<const Listing*> out;
    auto it = by_type_.find(q.data_type);
    if (it == by_type_.end()) return out;
    const auto& v = it->second;
    auto end = std::upper_bound(v.begin(), v.end(), q.budget,
                                [](Money budget, const Listing* l) { return budget < l->unit_cost; });
    for (auto p = v.begin(); p != end; ++p)
        if (satisfies(q, **p)) out.push_back(*p);
    return out;
}

std::set<MatchPair> match_pairs(const Book& book) {
    MatchIndex index(book);
    std::set<MatchPair> out;
    for (const auto& [qid, q] : book.queries)
        for (const Listing* l : index.candidates(q)) out.insert({qid, l->id});
    return out;
}

std::vector<MatchResult> build_results(const Book& book, const std::set<ParticipantId>& owners, BrokerId broker,
                                       std::int64_t round) {
    MatchIndex index(book);
    std::vector<MatchResult> results;
    std::map<SubmissionId, std::vector<const Query*>> by_listing;

    for (const auto& [qid, q] : book.queries) {
        auto found = index.candidates(q);
        for (const Listing* l : found)
            if (owners.count(l->owner)) by_listing[l->id].push_back(&q);
        if (!owners.count(q.owner) || found.empty()) continue;
        MatchResult r{q.consumer_pk, q.owner, qid, Side::consumer, {}, broker, round};
        for (const Listing* l : found) r.counterparts.push_back({l->provider_pk, l->owner, l->id, l->data_type, l->unit_cost});
        results.push_back(std::move(r));
    }
    for (auto& [lid, queries] : by_listing) {
        const Listing& l = book.listings.at(lid);
        std::sort(queries.begin(), queries.end(), [](const Query* a, const Query* b) {
            if (a->budget != b->budget) return a->budget > b->budget;
            return a->id < b->id;
        });
        MatchResult r{l.provider_pk, l.owner, lid, Side::provider, {}, broker, round};
        for (const Query* q : queries) r.counterparts.push_back({q->consumer_pk, q->owner, q->id, q->data_type, q->budget});
        results.push_back(std::move(r));
    }
    return results;
}

std::set<MatchPair> pairs_of(const std::vector<MatchResult>& results) {
    std::set<MatchPair> out;
    for (const auto& r : results)
        for (const auto& c : r.counterparts)
            out.insert(r.side == Side::consumer ? MatchPair{r.requester_item, c.item} : MatchPair{c.item, r.requester_item});
    return out;
}

crypto::Digest match_digest(const std::vector<MatchResult>& results) {
    std::vector<const MatchResult*> sorted;
    for (const auto& r : results) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](const MatchResult* a, const MatchResult* b) {
        return std::pair(a->side, a->requester_item) < std::pair(b->side, b->requester_item);
    });
    crypto::Encoder enc;
    enc.str("match").u64(sorted.size());
    for (const auto* r : sorted) {
        enc.u64(r->side == Side::consumer ? 0 : 1).u64(to_underlying(r->requester_item)).bytes(r->requester_pk.bytes);
        enc.u64(r->counterparts.size());
        for (const auto& c : r->counterparts) enc.u64(to_underlying(c.item)).bytes(c.pk.bytes).i64(c.quoted_price.micros());
    }
    return crypto::hash(enc);
}

}  // namespace datamarket::broker
