#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>

#include "datamarket/broker/admission.hpp"
#include "datamarket/broker/matching.hpp"
#include "datamarket/harness/report.hpp"
#include "datamarket/harness/scenario.hpp"
#include "datamarket/harness/simulation.hpp"
#include "datamarket/identity/participant.hpp"
#include "datamarket/trading/negotiation.hpp"

namespace py = pybind11;
using namespace datamarket;

namespace {

// Amounts cross the boundary as decimal strings so nothing is lost to floats.
Money money_arg(const py::handle& h) {
    if (py::isinstance<py::str>(h)) return Money::parse(h.cast<std::string>());
    if (py::isinstance<py::int_>(h)) return Money::units(h.cast<std::int64_t>());
    return Money::parse(py::str(h).cast<std::string>());
}

py::dict contract_dict(const harness::ContractRow& c) {
    py::dict d;
    d["name"] = c.name;
    d["address"] = c.address;
    d["provider"] = c.provider;
    d["consumer"] = c.consumer;
    d["listing"] = c.listing;
    d["query"] = c.query;
    d["broker"] = c.broker;
    d["round"] = c.round;
    d["price"] = c.price.to_string();
    d["start"] = c.start;
    d["end"] = c.end;
    d["status"] = c.status;
    d["transfers"] = c.transfers;
    d["full_settlements"] = c.full_settlements;
    d["partial_settlements"] = c.partial_settlements;
    d["settled_units"] = c.settled_units;
    d["revenue"] = c.revenue.to_string();
    d["disputes"] = c.disputes;
    d["dispute_tick"] = c.dispute_tick;
    d["dispute_cause"] = c.dispute_cause;
    d["fees"] = c.fees.to_string();
    d["provider_refund"] = c.provider_refund.to_string();
    d["consumer_refund"] = c.consumer_refund.to_string();
    d["frozen"] = c.frozen.to_string();
    return d;
}

py::dict report_dict(const harness::RunReport& r) {
    py::dict out;
    py::list contracts, brokers, participants;
    for (const auto& c : r.contracts) contracts.append(contract_dict(c));
    for (const auto& b : r.brokers) {
        py::dict d;
        d["id"] = b.id;
        d["live"] = b.live;
        d["participants"] = b.participants;
        d["fee_tokens"] = b.fee_tokens;
        d["fees"] = b.fees.to_string();
        d["anchored_rounds"] = b.anchored_rounds;
        d["flagged_rounds"] = b.flagged_rounds;
        brokers.append(d);
    }
    for (const auto& p : r.participants) {
        py::dict d;
        d["name"] = p.name;
        d["role"] = p.role;
        d["balance"] = p.balance.to_string();
        d["reputation"] = p.reputation;
        d["home_broker"] = p.home_broker;
        d["keys"] = p.keys;
        participants.append(d);
    }
    out["contracts"] = contracts;
    out["brokers"] = brokers;
    out["participants"] = participants;
    out["seed"] = r.seed;
    out["ticks_run"] = r.ticks_run;
    out["max_abs_residual"] = r.max_abs_residual.to_string();
    out["ticks_checked"] = r.ticks_checked;
    out["blocks"] = r.blocks;
    out["transactions"] = r.transactions;
    out["flagged_rounds"] = r.flagged_rounds;
    out["collusion_rounds"] = r.collusion_rounds;
    out["final_state_digest"] = r.final_state_digest;
    out["digest"] = crypto::to_hex(r.digest());
    out["summary"] = r.summary_table();
    out["chain_export"] = r.chain_export;
    out["trade_trace"] = r.trade_trace;
    return out;
}

broker::Book book_from(const py::list& listings, const py::list& queries) {
    broker::Book book;
    std::uint64_t next = 1;
    for (const auto& item : listings) {
        auto d = item.cast<py::dict>();
        broker::Listing l;
        l.id = SubmissionId{d.contains("id") ? d["id"].cast<std::uint64_t>() : next};
        l.data_type = d["data_type"].cast<std::string>();
        l.unit_cost = money_arg(d["unit_cost"]);
        l.sampling_frequency = d.contains("sampling_frequency") ? d["sampling_frequency"].cast<Tick>() : 1;
        if (d.contains("location")) {
            auto xy = d["location"].cast<std::pair<double, double>>();
            l.location = {xy.first, xy.second};
        }
        l.archived = d.contains("archived") && d["archived"].cast<bool>();
        l.validate();
        next = std::max(next, to_underlying(l.id) + 1);
        book.listings[l.id] = l;
    }
    for (const auto& item : queries) {
        auto d = item.cast<py::dict>();
        broker::Query q;
        q.id = SubmissionId{d.contains("id") ? d["id"].cast<std::uint64_t>() : next};
        q.data_type = d["data_type"].cast<std::string>();
        q.budget = money_arg(d["budget"]);
        q.frequency_required = d.contains("frequency_required") ? d["frequency_required"].cast<Tick>() : 1;
        if (d.contains("location")) {
            auto xy = d["location"].cast<std::pair<double, double>>();
            q.location = {xy.first, xy.second};
        }
        if (d.contains("radius") && !d["radius"].is_none()) q.radius = d["radius"].cast<double>();
        if (d.contains("data_age")) q.data_age = broker::parse_data_age(d["data_age"].cast<std::string>());
        q.validate();
        next = std::max(next, to_underlying(q.id) + 1);
        if (book.listings.count(q.id)) throw py::value_error("query id collides with a listing id");
        book.queries[q.id] = q;
    }
    return book;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Decentralised IoT data marketplace simulator";

    py::register_exception<harness::ScenarioError>(m, "ScenarioError", PyExc_ValueError);
    py::register_exception<harness::InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);

    m.def(
        "run_scenario",
        [](const std::string& text, std::optional<std::uint64_t> seed, std::optional<Tick> until) {
            auto scenario = harness::load_scenario(text);
            harness::RunReport r;
            {
                py::gil_scoped_release release;
                r = harness::run_scenario(scenario, seed, until);
            }
            return report_dict(r);
        },
        py::arg("text"), py::arg("seed") = py::none(), py::arg("until") = py::none(),
        "Runs a scenario given as YAML text and returns the report as a dict.");

    m.def(
        "run_scenario_file",
        [](const std::filesystem::path& path, std::optional<std::uint64_t> seed, std::optional<Tick> until,
           std::optional<std::filesystem::path> metrics_out) {
            auto scenario = harness::load_scenario_file(path);
            harness::RunReport r;
            {
                py::gil_scoped_release release;
                r = harness::run_scenario(scenario, seed, until);
            }
            if (metrics_out) harness::emit_metrics(r, *metrics_out);
            return report_dict(r);
        },
        py::arg("path"), py::arg("seed") = py::none(), py::arg("until") = py::none(),
        py::arg("metrics_out") = py::none());

    m.def(
        "validate_scenario",
        [](const std::string& text) {
            auto s = harness::load_scenario(text);
            py::dict d;
            d["seed"] = s.seed;
            d["duration"] = s.duration;
            d["brokers"] = s.brokers.size();
            d["participants"] = s.participants.size();
            d["listings"] = s.listings.size();
            d["queries"] = s.queries.size();
            d["faults"] = s.faults.size();
            return d;
        },
        py::arg("text"));

    m.def(
        "match_pairs",
        [](const py::list& listings, const py::list& queries) {
            std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
            for (const auto& p : broker::match_pairs(book_from(listings, queries)))
                out.emplace_back(to_underlying(p.query), to_underlying(p.listing));
            return out;
        },
        py::arg("listings"), py::arg("queries"),
        "(query id, listing id) for every satisfying pair. Ids default to list order.");

    m.def(
        "negotiate",
        [](const std::string& role, const py::handle& reservation, const py::list& quotes,
           const py::list& counterpart_reservations, int max_rounds, int margin_percent) {
            auto r = role == "consumer" ? trading::RequesterRole::consumer
                     : role == "provider" ? trading::RequesterRole::provider
                                          : throw py::value_error("role must be 'consumer' or 'provider'");
            if (quotes.size() != counterpart_reservations.size())
                throw py::value_error("quotes and counterpart_reservations differ in length");
            std::vector<trading::Requestee> requestees;
            std::vector<Money> reservations;
            for (std::size_t i = 0; i < quotes.size(); ++i) {
                crypto::PublicKey pk;
                pk.bytes[0] = static_cast<std::uint8_t>(i & 0xff);
                pk.bytes[1] = static_cast<std::uint8_t>(i >> 8);
                requestees.push_back({pk, money_arg(quotes[i])});
                reservations.push_back(money_arg(counterpart_reservations[i]));
            }
            auto s = trading::start_negotiation({}, r, money_arg(reservation), requestees, max_rounds);
            s = trading::negotiate(std::move(s), trading::default_requester_strategy(margin_percent),
                                   trading::default_requestee_strategy(r, reservations));
            py::dict d;
            d["state"] = std::string(trading::to_string(s.state));
            d["rounds"] = s.round;
            d["winner"] = s.winner ? py::cast(*s.winner) : py::none();
            d["price"] = s.state == trading::NegotiationState::accepted ? py::cast(s.price.to_string()) : py::none();
            return d;
        },
        py::arg("role"), py::arg("reservation"), py::arg("quotes"), py::arg("counterpart_reservations"),
        py::arg("max_rounds") = 5, py::arg("margin_percent") = 10);

    m.def(
        "apply_reputation",
        [](const std::string& start, const std::vector<std::string>& events) {
            auto r = identity::Reputation::parse(start);
            for (const auto& e : events) r = identity::apply_reputation(r, identity::parse_reputation_event(e));
            return r.to_string();
        },
        py::arg("start"), py::arg("events"));

    m.def(
        "vote_broker_admission",
        [](std::uint32_t candidate, const std::map<std::uint32_t, std::string>& votes,
           const std::map<std::uint32_t, std::int64_t>& tokens, const std::vector<std::uint32_t>& brokers) {
            std::map<BrokerId, broker::Vote> v;
            for (const auto& [id, ballot] : votes) {
                if (ballot != "accept" && ballot != "challenge") throw py::value_error("vote must be accept or challenge");
                v[BrokerId{id}] = ballot == "accept" ? broker::Vote::accept : broker::Vote::challenge;
            }
            std::map<BrokerId, std::int64_t> t;
            for (const auto& [id, n] : tokens) t[BrokerId{id}] = n;
            std::set<BrokerId> current;
            for (auto id : brokers) current.insert(BrokerId{id});
            auto out = broker::vote_broker_admission(BrokerId{candidate}, v, t, current);
            py::dict d;
            d["admitted"] = out.admitted;
            d["accept_weight"] = out.accept_weight;
            d["total_weight"] = out.total_weight;
            std::vector<std::uint32_t> ignored;
            for (auto b : out.ignored) ignored.push_back(to_underlying(b));
            d["ignored"] = ignored;
            return d;
        },
        py::arg("candidate"), py::arg("votes"), py::arg("tokens"), py::arg("brokers"));
}
