#include "datamarket/broker/network.hpp"

#include <algorithm>

namespace datamarket::broker {

std::optional<BrokerId> nearest_live_broker(const Location& where, const std::vector<BrokerState>& brokers) {
    std::optional<BrokerId> best;
    double best_d = 0.0;
    for (const auto& b : brokers) {
        if (!b.live) continue;
        double d = where.squared_distance(b.location);
        if (!best || d < best_d || (d == best_d && b.id < *best)) {
            best = b.id;
            best_d = d;
        }
    }
    return best;
}

void BrokerNetwork::add_broker(BrokerId id, Location location) {
    if (std::any_of(brokers_.begin(), brokers_.end(), [&](const BrokerState& b) { return b.id == id; }))
        throw std::invalid_argument("duplicate broker id");
    BrokerState b;
    b.id = id;
    b.location = location;
    for (const auto& peer : brokers_)
        if (peer.live) {
            b.book = peer.book;
            break;
        }
    brokers_.push_back(std::move(b));
    std::sort(brokers_.begin(), brokers_.end(), [](const BrokerState& a, const BrokerState& c) { return a.id < c.id; });
}

namespace {

template <class Vec>
auto& find_broker(Vec& brokers, BrokerId b) {
    for (auto& s : brokers)
        if (s.id == b) return s;
    throw std::out_of_range("unknown broker " + std::to_string(to_underlying(b)));
}

}  // namespace

BrokerState& BrokerNetwork::mut(BrokerId b) { return find_broker(brokers_, b); }

const BrokerState& BrokerNetwork::broker(BrokerId b) const { return find_broker(brokers_, b); }

BrokerId BrokerNetwork::register_participant(ParticipantId p, Location where) {
    auto chosen = nearest_live_broker(where, brokers_);
    if (!chosen) throw NoBrokerError{};
    if (auto old = home_.find(p); old != home_.end()) mut(old->second).registered.erase(p);
    locations_[p] = where;
    home_[p] = *chosen;
    unassigned_.erase(p);
    mut(*chosen).registered.insert(p);
    return *chosen;
}

std::optional<BrokerId> BrokerNetwork::home_of(ParticipantId p) const {
    auto it = home_.find(p);
    if (it == home_.end()) return std::nullopt;
    return it->second;
}

SubmissionId BrokerNetwork::submit_listing(Listing l) {
    auto home = home_of(l.owner);
    if (!home) throw NoBrokerError{};
    l.validate();
    l.id = next_id();
    auto& b = mut(*home);
    b.book.listings[l.id] = l;
    b.unsent.listings[l.id] = l;
    return l.id;
}

SubmissionId BrokerNetwork::submit_query(Query q) {
    auto home = home_of(q.owner);
    if (!home) throw NoBrokerError{};
    q.validate();
    q.id = next_id();
    auto& b = mut(*home);
    b.book.queries[q.id] = q;
    b.unsent.queries[q.id] = q;
    return q.id;
}

std::size_t BrokerNetwork::multicast_lists(BrokerId origin) {
    auto& o = mut(origin);
    if (!o.live || o.unsent.empty()) return 0;
    std::size_t delivered = 0;
    for (auto& peer : brokers_) {
        if (peer.id == origin || !peer.live) continue;
        peer.book.merge(o.unsent);
        delivered += o.unsent.size();
        ++messages_;
    }
    o.unsent = Book{};
    deliveries_ += delivered;
    return delivered;
}

std::vector<MatchResult> BrokerNetwork::match(BrokerId b, std::int64_t round) const {
    const auto& s = broker(b);
    return build_results(s.book, s.registered, b, round);
}

FailoverReport BrokerNetwork::handle_broker_failure(BrokerId failed) {
    auto& f = mut(failed);
    f.live = false;
    FailoverReport report;
    report.failed = failed;

    std::set<ParticipantId> orphans = std::move(f.registered);
    f.registered.clear();
    for (auto p : orphans) {
        auto next = nearest_live_broker(locations_.at(p), brokers_);
        if (!next) {
            home_.erase(p);
            unassigned_.insert(p);
            report.unassigned.push_back(p);
            continue;
        }
        home_[p] = *next;
        mut(*next).registered.insert(p);
        report.moved.emplace_back(p, *next);
    }

    // Owners whose items never left the failed broker submit them again.
    Book stranded = std::move(f.unsent);
    f.unsent = Book{};
    for (auto& [id, l] : stranded.listings) {
        if (auto home = home_of(l.owner)) {
            auto& b = mut(*home);
            b.book.listings[id] = l;
            b.unsent.listings[id] = l;
            ++report.resubmitted;
        } else {
            f.unsent.listings[id] = l;
        }
    }
    for (auto& [id, q] : stranded.queries) {
        if (auto home = home_of(q.owner)) {
            auto& b = mut(*home);
            b.book.queries[id] = q;
            b.unsent.queries[id] = q;
            ++report.resubmitted;
        } else {
            f.unsent.queries[id] = q;
        }
    }
    return report;
}

std::size_t BrokerNetwork::recover_broker(BrokerId id) {
    auto& b = mut(id);
    if (b.live) return 0;
    std::size_t before = b.book.size();
    for (const auto& peer : brokers_) {
        if (peer.id == id || !peer.live) continue;
        b.book = peer.book;
        break;
    }
    b.book.merge(b.unsent);
    for (auto r : retired_) {
        b.book.erase(r);
        b.unsent.erase(r);
    }
    b.live = true;

    std::vector<ParticipantId> waiting(unassigned_.begin(), unassigned_.end());
    for (auto p : waiting) register_participant(p, locations_.at(p));
    std::size_t after = b.book.size();
    return after > before ? after - before : 0;
}

bool BrokerNetwork::award_fee_token(BrokerId b, const Address& dsc) {
    auto& s = mut(b);
    for (const auto& other : brokers_)
        if (other.token_dscs.count(dsc)) return false;
    s.token_dscs.insert(dsc);
    ++s.fee_tokens;
    return true;
}

void BrokerNetwork::retire(SubmissionId id) {
    retired_.insert(id);
    for (auto& b : brokers_) {
        if (!b.live) continue;
        b.book.erase(id);
        b.unsent.erase(id);
    }
}

std::vector<BrokerId> BrokerNetwork::live_brokers() const {
    std::vector<BrokerId> out;
    for (const auto& b : brokers_)
        if (b.live) out.push_back(b.id);
    return out;
}

std::map<BrokerId, std::int64_t> BrokerNetwork::token_holdings() const {
    std::map<BrokerId, std::int64_t> out;
    for (const auto& b : brokers_) out[b.id] = b.fee_tokens;
    return out;
}

}  // namespace datamarket::broker
