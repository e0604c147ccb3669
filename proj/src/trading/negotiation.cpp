#include "datamarket/trading/negotiation.hpp"

#include <algorithm>

namespace datamarket::trading {

std::string_view to_string(NegotiationState s) {
    switch (s) {
        case NegotiationState::open: return "open";
        case NegotiationState::accepted: return "accepted";
        case NegotiationState::failed: return "failed";
    }
    return "?";
}

std::optional<Money> NegotiationSession::last_offer() const {
    std::optional<Money> out;
    for (const auto& thread : bids)
        for (const auto& b : thread)
            if (b.origin == BidOrigin::requester) out = b.price;
    return out;
}

RequesterStrategy default_requester_strategy(int margin_percent) {
    return [margin_percent](const NegotiationSession& s) {
        auto prev = s.last_offer();
        if (!prev) {
            return s.requester_role == RequesterRole::consumer ? s.reservation.scaled(100 - margin_percent, 100)
                                                               : s.reservation.scaled(100 + margin_percent, 100);
        }
        return Money::midpoint(*prev, s.reservation);
    };
}

RequesteeStrategy default_requestee_strategy(RequesterRole requester_role, std::vector<Money> reservations) {
    return [requester_role, reservations = std::move(reservations)](std::size_t i, Money offer) {
        Money own = reservations.at(i);
        Money mid = Money::midpoint(own, offer);
        // A provider never goes below its minimum, a consumer never above its budget.
        return requester_role == RequesterRole::consumer ? std::max(own, mid) : std::min(own, mid);
    };
}

bool admissible(const NegotiationSession& s, Money counter) {
    return s.requester_role == RequesterRole::consumer ? counter <= s.reservation : counter >= s.reservation;
}

NegotiationSession start_negotiation(crypto::PublicKey requester_pk, RequesterRole role, Money reservation,
                                     std::vector<Requestee> requestees, int max_rounds) {
    if (requestees.empty()) throw NegotiationError("empty counterpart list");
    if (max_rounds <= 0) throw NegotiationError("max_rounds must be positive");
    NegotiationSession s;
    s.requester_pk = requester_pk;
    s.requester_role = role;
    s.reservation = reservation;
    s.requestees = std::move(requestees);
    s.max_rounds = max_rounds;
    s.bids.resize(s.requestees.size());
    if (s.requestees.size() == 1) {
        Money quote = s.requestees.front().quoted_price;
        if (admissible(s, quote)) {
            s.state = NegotiationState::accepted;
            s.winner = 0;
            s.price = quote;
        } else {
            s.state = NegotiationState::failed;
        }
    }
    return s;
}

NegotiationSession negotiate_round(NegotiationSession s, const RequesterStrategy& requester,
                                   const RequesteeStrategy& requestee) {
    if (s.state != NegotiationState::open) throw NegotiationError("session is not open");
    if (s.round >= s.max_rounds) throw NegotiationError("round limit reached");

    Money offer = requester(s);
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < s.requestees.size(); ++i) {
        s.bids[i].push_back({offer, BidOrigin::requester});
        Money counter = requestee(i, offer);
        s.bids[i].push_back({counter, BidOrigin::requestee});
        if (!admissible(s, counter)) continue;
        if (!best) {
            best = i;
            continue;
        }
        Money incumbent = s.bids[*best].back().price;
        bool better = s.requester_role == RequesterRole::consumer ? counter < incumbent : counter > incumbent;
        if (better) best = i;
    }
    ++s.round;
    if (best) {
        s.state = NegotiationState::accepted;
        s.winner = best;
        s.price = s.bids[*best].back().price;
    } else if (s.round >= s.max_rounds) {
        s.state = NegotiationState::failed;
    }
    return s;
}

NegotiationSession negotiate(NegotiationSession s, const RequesterStrategy& requester,
                             const RequesteeStrategy& requestee) {
    while (s.state == NegotiationState::open) s = negotiate_round(std::move(s), requester, requestee);
    return s;
}

}  // namespace datamarket::trading
