#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "datamarket/common/crypto.hpp"
#include "datamarket/common/money.hpp"

namespace datamarket::trading {

enum class RequesterRole { consumer, provider };
enum class BidOrigin { requester, requestee };
enum class NegotiationState { open, accepted, failed };

std::string_view to_string(NegotiationState s);

struct Bid {
    Money price;
    BidOrigin origin = BidOrigin::requester;
    bool operator==(const Bid&) const = default;
};

struct Requestee {
    crypto::PublicKey pk;
    // Price from the match list: the provider's unit cost, or the consumer's
    // budget when the requester is a provider.
    Money quoted_price;
};

struct NegotiationSession {
    crypto::PublicKey requester_pk;
    RequesterRole requester_role = RequesterRole::consumer;
    // Consumer budget or provider minimum, depending on the requester role.
    Money reservation;
    std::vector<Requestee> requestees;
    int round = 0;
    int max_rounds = 5;
    // bids[i] is the exchange with requestee i, oldest first.
    std::vector<std::vector<Bid>> bids;
    NegotiationState state = NegotiationState::open;
    std::optional<std::size_t> winner;
    Money price;

    // Last offer the requester sent, if any.
    std::optional<Money> last_offer() const;
};

struct NegotiationError : std::logic_error {
    using std::logic_error::logic_error;
};

// Requester's next offer given the session so far.
using RequesterStrategy = std::function<Money(const NegotiationSession&)>;
// Requestee i's counter to an offer.
using RequesteeStrategy = std::function<Money(std::size_t requestee, Money offer)>;

// Opens with the reservation shifted by `margin_percent` in the requester's
// favour, then concedes halfway towards the reservation each round.
RequesterStrategy default_requester_strategy(int margin_percent = 10);

// Each requestee counters at the midpoint of its own reservation and the
// offer, never crossing its reservation. `reservations[i]` is a provider
// minimum when the requester is a consumer, and a consumer budget otherwise.
RequesteeStrategy default_requestee_strategy(RequesterRole requester_role, std::vector<Money> reservations);

// A counter is admissible for the requester when it does not exceed a
// consumer's budget or undercut a provider's minimum.
bool admissible(const NegotiationSession& s, Money counter);

// Opens a session with every counterpart. A single counterpart is accepted at
// its quoted price straight away when that price is admissible, and the
// session fails otherwise. Throws NegotiationError on an empty list.
NegotiationSession start_negotiation(crypto::PublicKey requester_pk, RequesterRole role, Money reservation,
                                     std::vector<Requestee> requestees, int max_rounds = 5);

// One bid / counter-bid exchange. Throws NegotiationError unless open.
NegotiationSession negotiate_round(NegotiationSession s, const RequesterStrategy& requester,
                                   const RequesteeStrategy& requestee);

// Runs rounds until the session is no longer open.
NegotiationSession negotiate(NegotiationSession s, const RequesterStrategy& requester,
                             const RequesteeStrategy& requestee);

}  // namespace datamarket::trading
