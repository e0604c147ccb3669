#include "datamarket/harness/simulation.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "datamarket/contracts/instance.hpp"
#include "datamarket/harness/kernel.hpp"
#include "datamarket/trading/channel.hpp"
#include "datamarket/trading/metering.hpp"
#include "datamarket/trading/negotiation.hpp"

namespace datamarket::harness {
namespace {

using TxCallback = std::function<void(const ledger::TxResult&)>;

constexpr std::uint64_t kBrokerStream = 1ULL << 40;
constexpr std::uint64_t kEavesdropStream = 1ULL << 41;

struct Deferred {
    Address target;
    std::string abi;
    Args args;
    TxCallback callback;
};

// Anyone who signs ledger transactions: marketplace participants and brokers.
struct Actor {
    identity::Participant p;
    std::uint64_t nonce = 0;
    std::uint64_t stream = 0;
    bool rotating = false;
    std::deque<Deferred> deferred;
};

struct BrokerActor {
    BrokerId id{};
    Actor actor;
};

struct Deal {
    std::string name;
    std::size_t provider = 0;
    std::size_t consumer = 0;
    std::size_t listing_spec = 0;
    std::size_t query_spec = 0;
    SubmissionId listing_id{};
    SubmissionId query_id{};
    BrokerId broker{};
    std::int64_t round = 0;
    Money price;
    Money budget;
    Money min_price;
    Tick start = 0;
    Tick end = 0;
    Tick frequency = 1;
    std::int64_t granularity = 1;
    contracts::DscTerms terms;

    Address address;
    std::size_t sub = 0;
    bool created = false;
    bool registered = false;
    bool activated = false;
    bool failed = false;
    bool disputed = false;
    bool closed = false;
    bool removal_pending = false;
    Tick dispute_tick = -1;
    std::string dispute_cause;

    std::optional<trading::DeliverySession> delivery;
    std::int64_t window_index = 1;
    bool provider_reported = false;
    bool consumer_reported = false;
    std::int64_t transfers = 0;
    Money provider_refund;
    Money consumer_refund;
};

struct PendingRound {
    BrokerId broker{};
    std::vector<broker::MatchResult> emitted;
    // Peers whose recomputation disagrees, with their honest result.
    std::vector<std::pair<BrokerId, std::vector<broker::MatchResult>>> dissent;
    bool released = false;
    bool biased = false;
};

std::string hex(const crypto::Digest& d) { return crypto::to_hex(d); }

bool contains_tag(std::span<const std::uint8_t> bytes) {
    const auto& tag = trading::kDataUnitTag;
    return std::search(bytes.begin(), bytes.end(), tag.begin(), tag.end()) != bytes.end();
}

}  // namespace

struct Simulation::Impl {
    Scenario sc;
    std::uint64_t seed;
    Kernel kernel;
    identity::ParticipantFactory factory;
    std::vector<Actor> agents;
    std::map<std::string, std::size_t, std::less<>> agent_by_name;
    std::map<ParticipantId, std::size_t> agent_by_id;
    std::vector<BrokerActor> brokers;
    std::unique_ptr<ledger::Ledger> chain;
    broker::BrokerNetwork network;
    Address register_address;

    std::map<crypto::Digest, TxCallback> callbacks;
    std::vector<Deal> deals;
    std::map<Address, std::size_t> deal_by_address;
    std::map<SubmissionId, std::size_t> listing_spec_of;
    std::map<SubmissionId, std::size_t> query_spec_of;
    std::set<SubmissionId> busy_queries;
    std::set<std::pair<SubmissionId, std::vector<SubmissionId>>> attempted;

    bool market_dirty = false;
    std::map<BrokerId, crypto::Digest> fingerprints;
    std::int64_t round_counter = 0;
    std::map<std::int64_t, PendingRound> rounds;
    std::map<BrokerId, std::int64_t> anchored_by;
    std::map<BrokerId, std::int64_t> flagged_by;

    trading::SessionKeyDirectory session_keys;
    trading::DisputeRegistry disputes;

    RunReport report;
    std::map<ParticipantId, Money> last_balance;
    std::function<void(const std::string&)> sink;
    Tick now = 0;
    bool ran = false;
    bool quorum_lost = false;

    Impl(Scenario s, std::optional<std::uint64_t> seed_override)
        : sc(std::move(s)),
          seed(seed_override.value_or(sc.seed)),
          kernel(seed),
          factory(splitmix64(seed ^ 0x6964656E74697479ULL)) {
        ledger::Genesis genesis;
        for (const auto& spec : sc.participants) {
            Actor a;
            a.p = factory.create(spec.role, spec.balance, spec.location, spec.name, 0);
            a.stream = agents.size() + 1;
            agent_by_name[spec.name] = agents.size();
            agent_by_id[a.p.id] = agents.size();
            genesis.accounts.push_back({a.p.id, a.p.public_key(), spec.balance});
            agents.push_back(std::move(a));
        }
        auto broker_specs = sc.brokers;
        std::sort(broker_specs.begin(), broker_specs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
        for (const auto& b : broker_specs) {
            BrokerActor ba;
            ba.id = b.id;
            ba.actor.p = factory.create(identity::Role::broker, Money{}, b.location,
                                        "broker-" + std::to_string(to_underlying(b.id)), 0);
            ba.actor.stream = kBrokerStream + to_underlying(b.id);
            genesis.brokers.push_back({b.id, ba.actor.p.id, ba.actor.p.public_key()});
            network.add_broker(b.id, b.location);
            brokers.push_back(std::move(ba));
        }
        chain = std::make_unique<ledger::Ledger>(std::move(genesis));
        for (const auto& a : agents) last_balance[a.p.id] = a.p.balance;
    }

    // ---- helpers -------------------------------------------------------

    void trace(std::string_view kind, const std::string& dsc, std::int64_t sub, const std::string& party,
               const std::string& detail) {
        std::string line = std::to_string(now) + '|' + std::string(kind) + '|' + (dsc.empty() ? "-" : dsc) + '|' +
                           (sub < 0 ? std::string("-") : std::to_string(sub)) + '|' + (party.empty() ? "-" : party) +
                           '|' + detail;
        if (sink) sink(line);
        report.trade_trace.push_back(std::move(line));
    }

    void trace_deal(std::string_view kind, const Deal& d, const std::string& party, const std::string& detail) {
        trace(kind, d.name, static_cast<std::int64_t>(d.sub), party, detail);
    }

    std::mt19937_64& rng(const Actor& a) { return kernel.rng().stream(a.stream); }

    BrokerActor* broker_actor(BrokerId id) {
        for (auto& b : brokers)
            if (b.id == id) return &b;
        return nullptr;
    }

    Actor* actor_by_key(const crypto::PublicKey& pk) {
        for (auto& a : agents)
            if (a.p.holds_key(pk)) return &a;
        return nullptr;
    }

    static const identity::KeyPair& key_for(const Actor& a, const crypto::PublicKey& pk) {
        for (const auto& k : a.p.keyring)
            if (k.public_key == pk) return k;
        return a.p.active_key();
    }

    const FaultSpec* active_fault(FaultKind kind, const Actor& a, const Deal& d) const {
        for (const auto& f : sc.faults) {
            if (f.kind != kind || f.target != a.p.name || now < f.at) continue;
            auto it = f.params.find("contract");
            if (it != f.params.end() && it->second != d.name) continue;
            return &f;
        }
        return nullptr;
    }

    void submit(Actor& a, Address target, std::string abi, Args args, TxCallback cb = {}) {
        if (a.rotating) {
            a.deferred.push_back({std::move(target), std::move(abi), std::move(args), std::move(cb)});
            return;
        }
        auto tx = ledger::make_transaction(a.p.active_key(), std::move(target), std::move(abi), std::move(args),
                                           ++a.nonce, now);
        auto id = tx.id();
        auto receipt = chain->submit_transaction(std::move(tx));
        if (!receipt.accepted) {
            ledger::TxResult r;
            r.tx_id = id;
            r.error = std::string(ledger::to_string(*receipt.reason));
            trace("tx_rejected", "", -1, a.p.name, r.error);
            if (cb) cb(r);
            return;
        }
        if (cb) callbacks[id] = std::move(cb);
    }

    // ---- main loop -----------------------------------------------------

    RunReport run(std::optional<Tick> until) {
        if (ran) throw std::logic_error("a Simulation runs once");
        ran = true;
        Tick last = sc.duration - 1;
        if (until) last = std::min(last, *until);
        schedule_scenario();

        for (Tick t = 0; t <= last; ++t) {
            now = t;
            for (int guard = 0;; ++guard) {
                if (guard > 100000) throw InvariantViolation(t, "tick did not reach quiescence");
                bool progress = false;
                if (kernel.has_due(t)) {
                    kernel.run_due(t);
                    progress = true;
                }
                if (broker_phase()) progress = true;
                if (chain->pending_count() > 0 && seal()) progress = true;
                if (!progress) break;
            }
            check_conservation(t);
            report.ticks_run = t + 1;
        }
        finish(last);
        return report;
    }

    void check_conservation(Tick t) {
        Money residual = chain->conservation_residual();
        Money magnitude = residual.is_negative() ? -residual : residual;
        if (magnitude > report.max_abs_residual) report.max_abs_residual = magnitude;
        report.residual = residual;
        ++report.ticks_checked;
        if (residual != Money{})
            throw InvariantViolation(t, "funds conservation residual " + residual.to_string() + " != 0");
    }

    bool seal() {
        auto live = network.live_brokers();
        auto sealed = chain->seal_block(now, live);
        if (!sealed) {
            if (!quorum_lost) trace("ledger_stalled", "", -1, "", "no validator quorum");
            quorum_lost = true;
            return false;
        }
        if (quorum_lost) trace("ledger_resumed", "", -1, "", "height " + std::to_string(sealed->block->height));
        quorum_lost = false;
        for (const auto& r : sealed->results) {
            ++report.transactions;
            if (!r.ok) ++report.failed_transactions;
            for (const auto& e : r.events) handle_event(e);
            auto it = callbacks.find(r.tx_id);
            if (it != callbacks.end()) {
                auto cb = std::move(it->second);
                callbacks.erase(it);
                cb(r);
            }
        }
        for (const auto& a : agents) {
            Money bal = chain->state().bank.balance(a.p.id);
            auto& prev = last_balance[a.p.id];
            if (bal != prev) {
                report.balance_log.push_back(std::to_string(now) + '|' + a.p.name + '|' + bal.to_string());
                prev = bal;
            }
        }
        return true;
    }

    // ---- scenario events ----------------------------------------------

    void schedule_scenario() {
        kernel.schedule(0, "broker-" + std::to_string(to_underlying(brokers.front().id)), "deploy_register",
                        [this] { deploy_register(); });
        for (std::size_t i = 0; i < agents.size(); ++i)
            kernel.schedule(0, agents[i].p.name, "register_participant", [this, i] { register_agent(i); });
        for (std::size_t i = 0; i < sc.listings.size(); ++i)
            kernel.schedule(sc.listings[i].at, sc.listings[i].provider, "submit_listing",
                            [this, i] { submit_listing(i); });
        for (std::size_t i = 0; i < sc.queries.size(); ++i)
            kernel.schedule(sc.queries[i].at, sc.queries[i].consumer, "submit_query", [this, i] { submit_query(i); });
        for (std::size_t i = 0; i < sc.faults.size(); ++i)
            kernel.schedule(sc.faults[i].at, sc.faults[i].target, std::string("fault:") + std::string(to_string(sc.faults[i].kind)),
                            [this, i] { inject_fault(i); });
        for (std::size_t i = 0; i < sc.admissions.size(); ++i)
            kernel.schedule(sc.admissions[i].at, "broker-" + std::to_string(to_underlying(sc.admissions[i].candidate)),
                            "admission_vote", [this, i] { admission(i); });
        for (std::size_t i = 0; i < sc.rotations.size(); ++i)
            kernel.schedule(sc.rotations[i].at, sc.rotations[i].participant, "rotate_key", [this, i] { rotate(i); });
    }

    void deploy_register() {
        auto& b = brokers.front();
        submit(b.actor, Address::deploy(), "register", {}, [this](const ledger::TxResult& r) {
            if (!r.ok) throw InvariantViolation(now, "register contract deployment failed: " + r.error);
            register_address = Address{arg_string(r.outputs, 0)};
            trace("register_deployed", "", -1, "", register_address.str());
        });
    }

    void register_agent(std::size_t i) {
        auto& a = agents[i];
        try {
            auto home = network.register_participant(a.p.id, a.p.location);
            a.p.home_broker = home;
            trace("registered", "", -1, a.p.name, "broker " + std::to_string(to_underlying(home)));
        } catch (const broker::NoBrokerError&) {
            trace("registration_failed", "", -1, a.p.name, "no_broker");
        }
        market_dirty = true;
    }

    void submit_listing(std::size_t i) {
        const auto& spec = sc.listings[i];
        auto& a = agents.at(agent_by_name.at(spec.provider));
        broker::Listing l;
        l.owner = a.p.id;
        l.provider_pk = a.p.public_key();
        l.device_id = spec.device_id;
        l.data_type = spec.data_type;
        l.unit_cost = spec.unit_cost;
        l.sampling_frequency = spec.sampling_frequency;
        l.duration_offered = spec.duration_offered;
        l.location = spec.location;
        l.archived = spec.archived;
        try {
            auto id = network.submit_listing(l);
            listing_spec_of[id] = i;
            market_dirty = true;
            trace("listing", "", -1, a.p.name, spec.name + " id=" + std::to_string(to_underlying(id)));
        } catch (const broker::NoBrokerError&) {
            if (now + 1 < sc.duration)
                kernel.schedule(now + 1, spec.provider, "submit_listing", [this, i] { submit_listing(i); });
        }
    }

    void submit_query(std::size_t i) {
        const auto& spec = sc.queries[i];
        auto& a = agents.at(agent_by_name.at(spec.consumer));
        broker::Query q;
        q.owner = a.p.id;
        q.consumer_pk = a.p.public_key();
        q.data_type = spec.data_type;
        q.data_age = spec.data_age;
        q.location = spec.location;
        q.radius = spec.radius;
        q.budget = spec.budget;
        q.frequency_required = spec.frequency_required;
        try {
            auto id = network.submit_query(q);
            query_spec_of[id] = i;
            market_dirty = true;
            trace("query", "", -1, a.p.name, spec.name + " id=" + std::to_string(to_underlying(id)));
        } catch (const broker::NoBrokerError&) {
            if (now + 1 < sc.duration)
                kernel.schedule(now + 1, spec.consumer, "submit_query", [this, i] { submit_query(i); });
        }
    }

    void inject_fault(std::size_t i) {
        const auto& f = sc.faults[i];
        switch (f.kind) {
            case FaultKind::broker_crash: {
                auto id = f.target_broker();
                if (!network.broker(id).live) return;
                auto rep = network.handle_broker_failure(id);
                for (const auto& [p, b] : rep.moved) agents.at(agent_by_id.at(p)).p.home_broker = b;
                for (auto p : rep.unassigned) agents.at(agent_by_id.at(p)).p.home_broker.reset();
                market_dirty = true;
                trace("broker_crash", "", -1, "broker-" + f.target,
                      "moved=" + std::to_string(rep.moved.size()) + " unassigned=" + std::to_string(rep.unassigned.size()) +
                          " resubmitted=" + std::to_string(rep.resubmitted));
                return;
            }
            case FaultKind::broker_recover: {
                auto id = f.target_broker();
                if (network.broker(id).live) return;
                auto gained = network.recover_broker(id);
                for (auto& a : agents) a.p.home_broker = network.home_of(a.p.id);
                market_dirty = true;
                trace("broker_recover", "", -1, "broker-" + f.target, "resynced=" + std::to_string(gained));
                return;
            }
            case FaultKind::broker_collusion_bias:
                market_dirty = true;
                trace("fault_armed", "", -1, "broker-" + f.target, std::string(to_string(f.kind)));
                return;
            case FaultKind::counter_tamper:
            case FaultKind::payment_refusal:
            case FaultKind::delivery_stall:
            case FaultKind::eavesdrop:
                trace("fault_armed", "", -1, f.target, std::string(to_string(f.kind)));
                return;
        }
    }

    void admission(std::size_t i) {
        const auto& spec = sc.admissions[i];
        broker::AdmissionOutcome outcome;
        try {
            outcome = broker::vote_broker_admission(spec.candidate, spec.votes, network.token_holdings(),
                                                    chain->state().members());
        } catch (const std::invalid_argument& e) {
            trace("admission_rejected", "", -1, "broker-" + std::to_string(to_underlying(spec.candidate)), e.what());
            return;
        }
        std::string detail = "accept=" + std::to_string(outcome.accept_weight) + "/" +
                             std::to_string(outcome.total_weight) + " ignored=" + std::to_string(outcome.ignored.size());
        if (!outcome.admitted) {
            trace("admission_rejected", "", -1, "broker-" + std::to_string(to_underlying(spec.candidate)), detail);
            return;
        }
        BrokerActor ba;
        ba.id = spec.candidate;
        ba.actor.p = factory.create(identity::Role::broker, Money{}, spec.location,
                                    "broker-" + std::to_string(to_underlying(spec.candidate)), now);
        ba.actor.stream = kBrokerStream + to_underlying(spec.candidate);
        Args args{static_cast<std::int64_t>(to_underlying(spec.candidate)),
                  static_cast<std::int64_t>(to_underlying(ba.actor.p.id)), to_bytes(ba.actor.p.public_key()),
                  outcome.accept_weight, outcome.total_weight};
        auto location = spec.location;
        auto sponsor = network.live_brokers();
        if (sponsor.empty()) return;
        brokers.push_back(std::move(ba));
        auto candidate = spec.candidate;
        submit(broker_actor(sponsor.front())->actor, Address::brokers(), "AdmitBroker", std::move(args),
               [this, candidate, location, detail](const ledger::TxResult& r) {
                   if (!r.ok) {
                       trace("admission_rejected", "", -1, "broker-" + std::to_string(to_underlying(candidate)), r.error);
                       return;
                   }
                   network.add_broker(candidate, location);
                   market_dirty = true;
                   trace("broker_admitted", "", -1, "broker-" + std::to_string(to_underlying(candidate)), detail);
               });
    }

    void rotate(std::size_t i) {
        auto& a = agents.at(agent_by_name.at(sc.rotations[i].participant));
        if (a.rotating) return;
        auto rotated = identity::rotate_key(a.p, factory, now);
        auto fresh = rotated.public_key();
        std::size_t idx = agent_by_name.at(sc.rotations[i].participant);
        submit(a, Address::keys(), "RotateKey", {to_bytes(fresh)},
               [this, idx, rotated](const ledger::TxResult& r) {
                   auto& actor = agents[idx];
                   actor.rotating = false;
                   if (r.ok) {
                       actor.p.keyring = rotated.keyring;
                       actor.p.active_key_index = rotated.active_key_index;
                       actor.nonce = 0;
                       trace("key_rotated", "", -1, actor.p.name, crypto::to_hex(actor.p.public_key()));
                   } else {
                       trace("key_rotation_failed", "", -1, actor.p.name, r.error);
                   }
                   auto pending = std::move(actor.deferred);
                   actor.deferred.clear();
                   for (auto& d : pending) submit(actor, std::move(d.target), std::move(d.abi), std::move(d.args), std::move(d.callback));
               });
        a.rotating = true;
    }

    // ---- broker tier ---------------------------------------------------

    crypto::Digest fingerprint(const broker::BrokerState& b) const {
        crypto::Encoder enc;
        enc.bytes(b.book.digest()).u64(b.registered.size());
        for (auto p : b.registered) enc.u64(to_underlying(p));
        return crypto::hash(enc);
    }

    bool colluding(BrokerId b) const {
        for (const auto& f : sc.faults)
            if (f.kind == FaultKind::broker_collusion_bias && f.target_broker() == b && now >= f.at) return true;
        return false;
    }

    static std::vector<broker::MatchResult> bias(std::vector<broker::MatchResult> results) {
        std::vector<broker::MatchResult> out;
        for (auto& r : results) {
            // Withhold the best counterpart, which is what a broker steering
            // business to a partner would do.
            if (!r.counterparts.empty()) r.counterparts.erase(r.counterparts.begin());
            if (!r.counterparts.empty()) out.push_back(std::move(r));
        }
        return out;
    }

    bool broker_phase() {
        if (!market_dirty) return false;
        market_dirty = false;
        auto live = network.live_brokers();
        for (auto b : live) network.multicast_lists(b);

        for (auto b : live) {
            const auto& state = network.broker(b);
            auto fp = fingerprint(state);
            auto seen = fingerprints.find(b);
            if (seen != fingerprints.end() && seen->second == fp) continue;
            fingerprints[b] = fp;

            std::int64_t round = round_counter + 1;
            auto honest = network.match(b, round);
            if (honest.empty()) continue;
            round_counter = round;
            ++report.match_rounds;

            PendingRound pending;
            pending.broker = b;
            pending.emitted = honest;
            if (colluding(b)) {
                pending.emitted = bias(honest);
                pending.biased = true;
                report.collusion_rounds.push_back(round);
                trace("biased_match", "", -1, "broker-" + std::to_string(to_underlying(b)),
                      "round " + std::to_string(round));
            }
            auto book_digest = state.book.digest();
            auto digest = broker::match_digest(pending.emitted);
            // Every peer holding the same book recomputes the round.
            for (auto peer : live) {
                if (peer == b) continue;
                const auto& ps = network.broker(peer);
                if (ps.book.digest() != book_digest) continue;
                auto recomputed = broker::build_results(ps.book, state.registered, b, round);
                if (broker::match_digest(recomputed) != digest) pending.dissent.emplace_back(peer, std::move(recomputed));
            }
            auto pairs = static_cast<std::int64_t>(broker::pairs_of(pending.emitted).size());
            rounds[round] = std::move(pending);
            submit(broker_actor(b)->actor, Address::anchor(), "AnchorMatchRound",
                   {round, to_bytes(book_digest), to_bytes(digest), pairs},
                   [this, round](const ledger::TxResult& r) { on_anchor(round, r); });
            report.match_audit.push_back(std::to_string(round) + '|' + std::to_string(to_underlying(b)) + '|' +
                                         hex(book_digest) + '|' + hex(digest) + '|' + std::to_string(pairs));
        }
        return true;
    }

    void on_anchor(std::int64_t round, const ledger::TxResult& r) {
        auto& pending = rounds.at(round);
        if (!r.ok) {
            trace("anchor_failed", "", -1, "broker-" + std::to_string(to_underlying(pending.broker)), r.error);
            return;
        }
        ++anchored_by[pending.broker];
        bool flag_sent = false;
        for (const auto& [peer, honest] : pending.dissent) {
            auto* pa = broker_actor(peer);
            if (!pa || !network.broker(peer).live) continue;
            flag_sent = true;
            submit(pa->actor, Address::anchor(), "FlagMatchRound", {round, to_bytes(broker::match_digest(honest))},
                   [this, round, peer](const ledger::TxResult& fr) { on_flag(round, peer, fr); });
        }
        if (!flag_sent) release(round, pending.emitted);
    }

    void on_flag(std::int64_t round, BrokerId peer, const ledger::TxResult& r) {
        auto& pending = rounds.at(round);
        if (!r.ok) {
            trace("flag_failed", "", -1, "broker-" + std::to_string(to_underlying(peer)), r.error);
            return;
        }
        if (pending.released) return;
        ++report.flagged_rounds;
        ++flagged_by[pending.broker];
        trace("match_flagged", "", -1, "broker-" + std::to_string(to_underlying(peer)),
              "round " + std::to_string(round) + " anchored by broker " + std::to_string(to_underlying(pending.broker)));
        for (const auto& [p, honest] : pending.dissent)
            if (p == peer) {
                release(round, honest);
                return;
            }
    }

    void release(std::int64_t round, std::vector<broker::MatchResult> results) {
        rounds.at(round).released = true;
        kernel.schedule(now + sc.hop_delay, "broker-" + std::to_string(to_underlying(rounds.at(round).broker)),
                        "deliver_matches", [this, results = std::move(results)] {
                            for (const auto& r : results) handle_match(r);
                        });
    }

    // ---- negotiation ---------------------------------------------------

    void handle_match(const broker::MatchResult& m) {
        const bool consumer_requests = sc.negotiation.requester == trading::RequesterRole::consumer;
        if ((m.side == broker::Side::consumer) != consumer_requests) return;
        if (network.is_retired(m.requester_item)) return;
        if (consumer_requests && busy_queries.count(m.requester_item)) return;

        std::vector<const broker::Counterpart*> open;
        for (const auto& c : m.counterparts) {
            if (network.is_retired(c.item)) continue;
            if (!consumer_requests && busy_queries.count(c.item)) continue;
            open.push_back(&c);
        }
        if (open.empty()) return;
        std::vector<SubmissionId> key;
        for (const auto* c : open) key.push_back(c->item);
        if (!attempted.emplace(m.requester_item, key).second) return;

        auto& requester = agents.at(agent_by_id.at(m.requester));
        std::vector<trading::Requestee> requestees;
        std::vector<Money> reservations;
        for (const auto* c : open) {
            requestees.push_back({c->pk, c->quoted_price});
            reservations.push_back(consumer_requests ? sc.listings.at(listing_spec_of.at(c->item)).min_price
                                                     : sc.queries.at(query_spec_of.at(c->item)).budget);
        }
        Money reservation = consumer_requests ? sc.queries.at(query_spec_of.at(m.requester_item)).budget
                                              : sc.listings.at(listing_spec_of.at(m.requester_item)).min_price;
        auto role = consumer_requests ? trading::RequesterRole::consumer : trading::RequesterRole::provider;

        ++report.negotiations;
        auto session = trading::start_negotiation(requester.p.public_key(), role, reservation, requestees,
                                                  sc.negotiation.max_rounds);
        session = trading::negotiate(std::move(session),
                                     trading::default_requester_strategy(sc.negotiation.margin_percent),
                                     trading::default_requestee_strategy(role, reservations));
        if (session.state != trading::NegotiationState::accepted) {
            ++report.negotiation_failures;
            trace("negotiation_failed", "", -1, requester.p.name,
                  "round " + std::to_string(m.round) + " counterparts=" + std::to_string(open.size()));
            return;
        }
        const auto* winner = open.at(*session.winner);
        SubmissionId listing = consumer_requests ? winner->item : m.requester_item;
        SubmissionId query = consumer_requests ? m.requester_item : winner->item;
        trace("negotiation_accepted", "", -1, requester.p.name,
              "round " + std::to_string(m.round) + " price=" + session.price.to_string() + " rounds=" +
                  std::to_string(session.round) + " counterparts=" + std::to_string(open.size()));
        open_deal(listing, query, m.broker, m.round, session.price);
    }

    // ---- contract lifecycle -------------------------------------------

    void open_deal(SubmissionId listing, SubmissionId query, BrokerId broker, std::int64_t round, Money price) {
        Deal d;
        d.listing_spec = listing_spec_of.at(listing);
        d.query_spec = query_spec_of.at(query);
        const auto& ls = sc.listings[d.listing_spec];
        const auto& qs = sc.queries[d.query_spec];
        d.name = "DSC" + std::to_string(deals.size() + 1);
        d.provider = agent_by_name.at(ls.provider);
        d.consumer = agent_by_name.at(qs.consumer);
        d.listing_id = listing;
        d.query_id = query;
        d.broker = broker;
        d.round = round;
        d.price = price;
        d.budget = qs.budget;
        d.min_price = ls.min_price;
        d.frequency = qs.frequency_required;
        d.granularity = qs.granularity.value_or(sc.economics.granularity);
        d.start = qs.start.value_or(now + sc.economics.setup_lead);
        if (d.start < now) d.start = now;
        d.end = qs.end.value_or(d.start + qs.period);
        busy_queries.insert(query);

        auto& prov = agents[d.provider];
        auto& cons = agents[d.consumer];
        d.terms = contracts::DscTerms{prov.p.public_key(), cons.p.public_key(), broker, sc.economics.broker_fee, d.start,
                                      d.end, round, static_cast<std::int64_t>(to_underlying(listing)),
                                      static_cast<std::int64_t>(to_underlying(query))};
        std::size_t idx = deals.size();
        deals.push_back(std::move(d));
        const auto& deal = deals.back();
        trace_deal("deal", deal, prov.p.name,
                   ls.name + "+" + qs.name + " price=" + deal.price.to_string() + " broker=" +
                       std::to_string(to_underlying(broker)) + " round=" + std::to_string(round));
        if (deal.end <= deal.start) {
            fail_deal(idx, "empty_term");
            return;
        }
        submit(prov, Address::deploy(), "dsc", contracts::dsc_init_args(deal.terms),
               [this, idx](const ledger::TxResult& r) { on_deployed(idx, r); });
    }

    void fail_deal(std::size_t idx, const std::string& why) {
        auto& d = deals[idx];
        d.failed = true;
        busy_queries.erase(d.query_id);
        trace_deal("deal_failed", d, agents[d.provider].p.name, why);
    }

    void on_deployed(std::size_t idx, const ledger::TxResult& r) {
        if (!r.ok) return fail_deal(idx, "deploy:" + r.error);
        auto& d = deals[idx];
        d.address = Address{arg_string(r.outputs, 0)};
        deal_by_address[d.address] = idx;
        trace_deal("deployed", d, agents[d.provider].p.name, d.address.str());

        const auto& ls = sc.listings[d.listing_spec];
        contracts::SubscriptionEntry entry;
        entry.device_id = ls.device_id;
        entry.data_type = ls.data_type;
        entry.start_time = d.start;
        entry.measurement_frequency = d.frequency;
        entry.cost = d.price;
        entry.end_time = d.end;
        entry.payment_granularity = d.granularity;
        Money deposit = contracts::minimum_deposit(entry, sc.economics.broker_fee);
        const auto& consumer_key = key_for(agents[d.consumer], d.terms.consumer_pk);
        auto cosign = identity::sign(consumer_key, contracts::subscription_terms(d.address, entry, deposit, deposit));
        submit(agents[d.provider], d.address, "CreateContract",
               contracts::create_contract_args(entry, deposit, deposit, cosign),
               [this, idx](const ledger::TxResult& cr) { on_created(idx, cr); });
    }

    void on_created(std::size_t idx, const ledger::TxResult& r) {
        if (!r.ok) return fail_deal(idx, "create:" + r.error);
        auto& d = deals[idx];
        d.sub = static_cast<std::size_t>(arg_int(r.outputs, 0));
        d.created = true;
        trace_deal("created", d, agents[d.provider].p.name, "escrow funded");
        Tick locked_until = d.end + d.granularity * d.frequency;
        kernel.schedule(locked_until, d.name, "remove_subscription", [this, idx] { remove(idx); });

        contracts::LookupEntry entry{d.name, d.terms.provider_pk, d.terms.consumer_pk, d.address,
                                     contracts::abi_names(contracts::Kind::dsc)};
        submit(agents[d.provider], register_address, "RegisterContract", contracts::register_contract_args(entry),
               [this, idx](const ledger::TxResult& rr) { on_registered(idx, rr); });
    }

    void on_registered(std::size_t idx, const ledger::TxResult& r) {
        auto& d = deals[idx];
        if (!r.ok) return fail_deal(idx, "register:" + r.error);
        d.registered = true;
        network.retire(d.query_id);
        busy_queries.erase(d.query_id);
        market_dirty = true;
        trace_deal("registered", d, agents[d.provider].p.name, d.name);
        kernel.schedule(std::max(d.start, now), d.name, "execute_contract", [this, idx] { execute(idx); });
    }

    void execute(std::size_t idx) {
        auto& d = deals[idx];
        // Both parties resolve the contract through the Register contract first.
        for (auto party : {d.consumer, d.provider}) {
            submit(agents[party], register_address, "GetContract", {d.name}, [this, idx, party](const ledger::TxResult& r) {
                auto& deal = deals[idx];
                bool matches = r.ok && arg_string(r.outputs, 0) == deal.address.str();
                trace_deal("lookup", deal, agents[party].p.name, matches ? deal.address.str() : "mismatch:" + r.error);
            });
        }
        auto& prov = agents[d.provider];
        crypto::SessionKey key{};
        while (key == crypto::SessionKey{}) key = random_bytes<16>(rng(prov));
        submit(prov, d.address, "ExecuteContract", {static_cast<std::int64_t>(d.sub), to_bytes(key)},
               [this, idx](const ledger::TxResult& r) {
                   if (!r.ok) trace_deal("execute_failed", deals[idx], agents[deals[idx].provider].p.name, r.error);
               });
    }

    void on_activated(const contracts::Activated& ev) {
        auto it = deal_by_address.find(ev.dsc);
        if (it == deal_by_address.end()) return;
        std::size_t idx = it->second;
        auto& d = deals[idx];
        d.activated = true;
        if (!network.award_fee_token(ev.broker, ev.dsc))
            throw InvariantViolation(now, "fee token awarded twice for " + ev.dsc.str());
        trace_deal("activated", d, agents[d.provider].p.name, "fee token to broker " + std::to_string(to_underlying(ev.broker)));

        session_keys.issue(ev.provider, ev.consumer, ev.session_key);
        auto channel = trading::open_channel(key_for(agents[d.provider], ev.provider), ev.consumer, ev.session_key,
                                             session_keys);
        if (!trading::verify_handshake(channel, ev.session_key))
            throw InvariantViolation(now, "channel handshake failed for " + d.name);

        trading::DeliverySession s;
        s.dsc = d.address;
        s.sub_index = d.sub;
        s.data_type = sc.listings[d.listing_spec].data_type;
        s.start_time = d.start;
        s.end_time = d.end;
        s.frequency = d.frequency;
        s.channel = std::move(channel);
        s.consumer_key = ev.session_key;
        s.provider_meter = {ev.provider, d.address, d.sub, d.granularity, 0, 0};
        s.consumer_meter = {ev.consumer, d.address, d.sub, d.granularity, 0, 0};
        d.delivery = std::move(s);

        Tick first = d.start;
        if (now > d.start) first = d.start + ((now - d.start + d.frequency - 1) / d.frequency) * d.frequency;
        if (first < d.end) kernel.schedule(first, d.name, "deliver", [this, idx, first] { deliver(idx, first); });
        kernel.schedule(std::max(d.end, now), d.name, "term_end", [this, idx] { term_end(idx); });
    }

    void deliver(std::size_t idx, Tick t) {
        auto& d = deals[idx];
        if (!d.delivery || !d.delivery->active || d.disputed || d.closed) return;
        auto& s = *d.delivery;
        auto& prov = agents[d.provider];
        auto& cons = agents[d.consumer];

        if (active_fault(FaultKind::delivery_stall, prov, d)) {
            trace_deal("missed", d, cons.p.name, "slot " + std::to_string(t));
            if (s.consumer_meter.window_count < s.consumer_meter.granularity && ++s.consecutive_missed == trading::kStallThreshold) {
                if (disputes.lodge_dispute(d.address, d.sub, cons.p.public_key(), now, "delivery_stall")) {
                    trace_deal("lodge_dispute", d, cons.p.name, "delivery_stall");
                    submit(cons, d.address, "LodgeDispute", {static_cast<std::int64_t>(d.sub), std::string("delivery_stall")});
                }
            }
        } else {
            auto value = static_cast<std::int64_t>(rng(prov)() % 100000);
            auto out = trading::transfer_data_unit(s, t, value);
            if (out.status == trading::TransferStatus::ack) {
                ++d.transfers;
                s.consecutive_missed = 0;
                trace_deal("transfer", d, prov.p.name, "ack");
                if (trading::check_settlement_due(s.provider_meter) == trading::SettlementDue::due) report_window(idx, true);
                if (trading::check_settlement_due(s.consumer_meter) == trading::SettlementDue::due) report_window(idx, false);
            } else {
                trace_deal(out.status == trading::TransferStatus::nack ? "nack" : "transfer_rejected", d, prov.p.name, out.reason);
            }
        }
        Tick next = t + s.frequency;
        if (next < s.end_time) kernel.schedule(next, d.name, "deliver", [this, idx, next] { deliver(idx, next); });
    }

    void report_window(std::size_t idx, bool provider_side) {
        auto& d = deals[idx];
        auto& s = *d.delivery;
        auto& meter = provider_side ? s.provider_meter : s.consumer_meter;
        bool& reported = provider_side ? d.provider_reported : d.consumer_reported;
        if (reported || meter.window_count == 0) return;
        reported = true;
        auto& party = agents[provider_side ? d.provider : d.consumer];

        std::int64_t value = meter.window_count;
        if (const auto* f = active_fault(FaultKind::counter_tamper, party, d); f && f->param_int("window", 1) == d.window_index) {
            std::int64_t honest = value;
            value = std::clamp<std::int64_t>(honest + f->param_int("delta", -1), 1, d.granularity);
            if (value == honest) value = honest > 1 ? honest - 1 : std::min<std::int64_t>(honest + 1, d.granularity);
            trace_deal("tamper", d, party.p.name, std::to_string(honest) + "->" + std::to_string(value));
        }
        std::int64_t authorize = 1;
        if (!provider_side) {
            if (const auto* f = active_fault(FaultKind::payment_refusal, party, d); f && f->param_int("window", 1) == d.window_index) {
                authorize = 0;
                trace_deal("payment_refusal", d, party.p.name, "window " + std::to_string(d.window_index));
            }
        }
        trace_deal("settlement_report", d, party.p.name,
                   "window " + std::to_string(d.window_index) + " counter " + std::to_string(value));
        std::string name = party.p.name;
        submit(party, d.address, "Settlement", {static_cast<std::int64_t>(d.sub), value, authorize},
               [this, idx, name](const ledger::TxResult& r) {
                   auto& deal = deals[idx];
                   if (!r.ok) {
                       trace_deal("settlement_failed", deal, name, r.error);
                       return;
                   }
                   trace_deal("settlement", deal, name, arg_string(r.outputs, 0));
               });
    }

    void term_end(std::size_t idx) {
        auto& d = deals[idx];
        if (!d.delivery || d.disputed || d.closed) return;
        d.delivery->active = false;
        d.delivery->channel.close();
        trace_deal("term_end", d, "", "transfers " + std::to_string(d.transfers));
        report_window(idx, true);
        report_window(idx, false);
    }

    void remove(std::size_t idx) {
        auto& d = deals[idx];
        if (d.closed || !d.created || d.removal_pending) return;
        d.removal_pending = true;
        submit(agents[d.provider], d.address, "RemoveSubscription", {static_cast<std::int64_t>(d.sub)},
               [this, idx](const ledger::TxResult& r) {
                   deals[idx].removal_pending = false;
                   if (!r.ok) trace_deal("remove_failed", deals[idx], agents[deals[idx].provider].p.name, r.error);
               });
    }

    // ---- ledger events -------------------------------------------------

    void handle_event(const contracts::Event& e) {
        std::visit(
            [this](const auto& ev) {
                using T = std::decay_t<decltype(ev)>;
                if constexpr (std::is_same_v<T, contracts::ReputationChange>) {
                    auto* a = actor_by_key(ev.party);
                    if (!a) return;
                    a->p = identity::adjust_reputation(std::move(a->p), ev.kind);
                    trace("reputation", "", -1, a->p.name,
                          std::string(identity::to_string(ev.kind)) + " -> " + a->p.reputation.to_string());
                } else if constexpr (std::is_same_v<T, contracts::Activated>) {
                    on_activated(ev);
                } else if constexpr (std::is_same_v<T, contracts::Invoiced>) {
                    auto it = deal_by_address.find(ev.dsc);
                    if (it == deal_by_address.end()) return;
                    auto& d = deals[it->second];
                    trace_deal(ev.final_remainder ? "final_invoice" : "invoice", d, agents[d.provider].p.name,
                               std::to_string(ev.units) + " units " + ev.amount.to_string());
                    if (!ev.final_remainder && d.delivery) {
                        d.delivery->provider_meter.reset_window();
                        d.delivery->consumer_meter.reset_window();
                        d.provider_reported = d.consumer_reported = false;
                        ++d.window_index;
                    }
                } else if constexpr (std::is_same_v<T, contracts::DisputeLodged>) {
                    auto it = deal_by_address.find(ev.dsc);
                    if (it == deal_by_address.end()) return;
                    std::size_t idx = it->second;
                    auto& d = deals[idx];
                    d.disputed = true;
                    d.dispute_tick = now;
                    d.dispute_cause = ev.cause;
                    if (d.delivery) {
                        d.delivery->active = false;
                        d.delivery->channel.close();
                    }
                    disputes.lodge_dispute(d.address, d.sub, agents[d.consumer].p.public_key(), now, ev.cause);
                    trace_deal("dispute", d, "", ev.cause);
                    kernel.schedule(now + d.granularity * d.frequency, d.name, "remove_subscription",
                                    [this, idx] { remove(idx); });
                } else if constexpr (std::is_same_v<T, contracts::Closed>) {
                    auto it = deal_by_address.find(ev.dsc);
                    if (it == deal_by_address.end()) return;
                    auto& d = deals[it->second];
                    d.closed = true;
                    d.provider_refund = ev.provider_refund;
                    d.consumer_refund = ev.consumer_refund;
                    trace_deal("removed", d, agents[d.provider].p.name,
                               std::string(ev.disputed ? "frozen " + ev.frozen.to_string()
                                                       : "refunds " + ev.provider_refund.to_string() + "/" +
                                                             ev.consumer_refund.to_string()) +
                                   " fee " + ev.fee_each.to_string());
                }
            },
            e);
    }

    // ---- wrap-up -------------------------------------------------------

    void finish(Tick last) {
        now = last;
        const auto& state = chain->state();

        for (const auto& f : sc.faults) {
            if (f.kind != FaultKind::eavesdrop) continue;
            auto& spy = kernel.rng().stream(kEavesdropStream + agent_by_name.at(f.target));
            auto guess = random_bytes<16>(spy);
            for (const auto& d : deals) {
                if (!d.delivery) continue;
                if (agents[d.provider].p.name != f.target && agents[d.consumer].p.name != f.target) continue;
                auto tag = std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(trading::kDataUnitTag.data()),
                                                         trading::kDataUnitTag.size());
                auto r = trading::eavesdrop(d.delivery->channel.transcript(), guess, tag);
                report.eavesdrop_frames += r.frames_captured;
                report.eavesdrop_recovered += r.plaintexts_recovered;
            }
            trace("eavesdrop", "", -1, f.target,
                  "frames " + std::to_string(report.eavesdrop_frames) + " recovered " +
                      std::to_string(report.eavesdrop_recovered));
        }

        for (const auto& b : chain->chain())
            for (const auto& tx : b.txs)
                for (const auto& v : tx.args) {
                    if (const auto* bytes = std::get_if<Bytes>(&v); bytes && contains_tag(*bytes)) ++report.plaintext_leaks;
                    if (const auto* s = std::get_if<std::string>(&v);
                        s && s->find(trading::kDataUnitTag) != std::string::npos)
                        ++report.plaintext_leaks;
                }

        std::map<BrokerId, std::int64_t> activated_per_broker;
        for (const auto& d : deals) {
            if (!d.activated) continue;
            ++activated_per_broker[d.broker];
            if (d.price > d.budget || d.price < d.min_price)
                throw InvariantViolation(last, d.name + " negotiated price outside [min, budget]");
            auto anchor = state.anchors.find(d.round);
            if (anchor == state.anchors.end())
                throw InvariantViolation(last, d.name + " has no anchored match round");
        }
        for (const auto& b : network.brokers())
            if (b.fee_tokens != activated_per_broker[b.id])
                throw InvariantViolation(last, "fee tokens of broker " + std::to_string(to_underlying(b.id)) +
                                                   " differ from activated contracts");
        if (report.plaintext_leaks != 0) throw InvariantViolation(last, "data unit plaintext found on the ledger");

        report.seed = seed;
        report.blocks = chain->chain().size();
        report.multicast_messages = network.multicast_messages();
        report.multicast_deliveries = network.multicast_deliveries();

        std::ostringstream tables;
        for (const auto& d : deals) {
            if (!d.created) continue;
            const auto& dsc = chain->get_contract_state(d.address).as_dsc();
            const auto& sub = dsc.subscriptions.at(d.sub);
            ContractRow row;
            row.name = d.name;
            row.address = d.address.str();
            row.provider = agents[d.provider].p.name;
            row.consumer = agents[d.consumer].p.name;
            row.listing = sc.listings[d.listing_spec].name;
            row.query = sc.queries[d.query_spec].name;
            row.broker = to_underlying(d.broker);
            row.round = d.round;
            row.price = d.price;
            row.start = d.start;
            row.end = d.end;
            if (sub.completed)
                row.status = "completed";
            else if (sub.disputed_at >= 0)
                row.status = "disputed";
            else
                row.status = std::string(contracts::to_string(sub.entry.status));
            row.transfers = d.transfers;
            row.full_settlements = sub.full_settlements;
            row.partial_settlements = sub.partial_settlements;
            row.settled_units = sub.settled_units;
            row.revenue = sub.paid_to_provider;
            row.disputes = sub.disputed_at >= 0 ? 1 : 0;
            row.dispute_tick = sub.disputed_at;
            row.dispute_cause = sub.dispute_cause;
            row.fees = sub.fees_paid;
            row.provider_refund = d.provider_refund;
            row.consumer_refund = d.consumer_refund;
            row.frozen = sub.frozen;
            report.contracts.push_back(std::move(row));
            tables << "# " << d.name << ' ' << d.address.str() << '\n' << contracts::subscription_table(dsc, sc.time);
        }
        report.subscription_tables = tables.str();
        if (!register_address.empty())
            report.lookup_table = contracts::lookup_table(chain->get_contract_state(register_address).as_register());

        for (const auto& b : network.brokers()) {
            BrokerRow row;
            row.id = to_underlying(b.id);
            row.live = b.live;
            row.participants = b.registered.size();
            row.fee_tokens = b.fee_tokens;
            auto fee = state.bank.fee_accounts.find(b.id);
            row.fees = fee == state.bank.fee_accounts.end() ? Money{} : fee->second;
            row.anchored_rounds = anchored_by[b.id];
            row.flagged_rounds = flagged_by[b.id];
            report.brokers.push_back(row);
        }
        for (const auto& a : agents) {
            ParticipantRow row;
            row.name = a.p.name;
            row.role = std::string(identity::to_string(a.p.role));
            row.balance = state.bank.balance(a.p.id);
            row.reputation = a.p.reputation.to_string();
            auto home = network.home_of(a.p.id);
            row.home_broker = home ? std::to_string(to_underlying(*home)) : "none";
            row.keys = a.p.keyring.size();
            report.participants.push_back(std::move(row));
        }

        report.chain_export = ledger::chain_export(chain->chain());
        report.genesis = chain->genesis();
        report.blocks_full = chain->chain();
        for (const auto& [addr, c] : state.contracts) report.contract_digests[addr.str()] = hex(c.digest());
        report.final_state_digest = hex(state.digest());
    }
};

Simulation::Simulation(Scenario scenario, std::optional<std::uint64_t> seed_override)
    : impl_(std::make_unique<Impl>(std::move(scenario), seed_override)) {}

Simulation::~Simulation() = default;

RunReport Simulation::run(std::optional<Tick> until) { return impl_->run(until); }

void Simulation::set_trace_sink(std::function<void(const std::string&)> sink) { impl_->sink = std::move(sink); }

const Scenario& Simulation::scenario() const { return impl_->sc; }
const ledger::Ledger& Simulation::ledger() const { return *impl_->chain; }
const broker::BrokerNetwork& Simulation::network() const { return impl_->network; }

const identity::Participant& Simulation::participant(std::string_view name) const {
    auto it = impl_->agent_by_name.find(name);
    if (it == impl_->agent_by_name.end()) throw std::out_of_range("unknown participant " + std::string(name));
    return impl_->agents[it->second].p;
}

const std::vector<std::string>& Simulation::event_log() const { return impl_->kernel.log(); }

RunReport run_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed, std::optional<Tick> until) {
    Simulation sim(scenario, seed);
    return sim.run(until);
}

}  // namespace datamarket::harness
