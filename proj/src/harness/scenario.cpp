#include "datamarket/harness/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace datamarket::harness {
namespace {

std::string position_text(int line, int column, const std::string& message) {
    if (line <= 0) return message;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& message) {
    const auto& mark = n.Mark();
    if (mark.is_null()) throw ScenarioError(0, 0, message);
    throw ScenarioError(mark.line + 1, mark.column + 1, message);
}

void check_keys(const YAML::Node& n, std::initializer_list<std::string_view> allowed) {
    if (!n.IsMap()) fail(n, "expected a mapping");
    for (const auto& kv : n) {
        auto key = kv.first.as<std::string>();
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(kv.first, "unknown key '" + key + "'");
    }
}

const YAML::Node require(const YAML::Node& parent, const char* key) {
    YAML::Node n = parent[key];
    if (!n) fail(parent, std::string("missing required key '") + key + "'");
    return n;
}

std::string scalar(const YAML::Node& n) {
    if (!n.IsScalar()) fail(n, "expected a scalar value");
    return n.Scalar();
}

std::int64_t integer(const YAML::Node& n) {
    auto text = scalar(n);
    try {
        std::size_t used = 0;
        long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        fail(n, "expected an integer, got '" + text + "'");
    }
}

double number(const YAML::Node& n) {
    auto text = scalar(n);
    if (text == ".inf" || text == "inf" || text == "infinity") return kUnbounded;
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        fail(n, "expected a number, got '" + text + "'");
    }
}

bool boolean(const YAML::Node& n) {
    auto text = scalar(n);
    if (text == "true" || text == "yes") return true;
    if (text == "false" || text == "no") return false;
    fail(n, "expected true or false, got '" + text + "'");
}

Money money(const YAML::Node& n) {
    auto text = scalar(n);
    try {
        return Money::parse(text);
    } catch (const std::exception&) {
        fail(n, "expected a decimal amount, got '" + text + "'");
    }
}

Location location(const YAML::Node& n) {
    if (n.IsSequence() && n.size() == 2) return {number(n[0]), number(n[1])};
    if (n.IsMap()) {
        check_keys(n, {"x", "y"});
        return {number(require(n, "x")), number(require(n, "y"))};
    }
    fail(n, "expected a location [x, y]");
}

bool is_integer_text(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Plain integers are ticks; strings with a unit (30min, 2h, 1d) are
// simulated minutes and must land on a tick boundary.
Tick duration_ticks(const YAML::Node& n, const TimeBase& time) {
    auto text = scalar(n);
    if (is_integer_text(text)) return integer(n);
    std::int64_t minutes = 0;
    try {
        minutes = parse_duration_minutes(text);
    } catch (const std::exception& e) {
        fail(n, e.what());
    }
    if (minutes % time.minutes_per_tick != 0) fail(n, "duration '" + text + "' is not a whole number of ticks");
    return minutes / time.minutes_per_tick;
}

// A tick number or a "dd/mm/yyyy HH:MM" calendar time.
Tick time_point(const YAML::Node& n, const TimeBase& time) {
    auto text = scalar(n);
    if (is_integer_text(text)) return integer(n);
    try {
        return time.datetime_to_tick(text);
    } catch (const std::exception& e) {
        fail(n, e.what());
    }
}

template <class F>
void each(const YAML::Node& root, const char* key, F&& f) {
    YAML::Node seq = root[key];
    if (!seq) return;
    if (!seq.IsSequence()) fail(seq, std::string("'") + key + "' must be a list");
    for (const auto& item : seq) f(item);
}

struct Loader {
    Scenario s;

    void top(const YAML::Node& root) {
        check_keys(root, {"seed", "epoch", "tick_minutes", "duration", "hop_delay", "economics", "negotiation",
                          "brokers", "participants", "listings", "queries", "faults", "admissions", "rotations"});
        if (auto n = root["seed"]) s.seed = static_cast<std::uint64_t>(integer(n));
        if (auto n = root["tick_minutes"]) {
            s.time.minutes_per_tick = integer(n);
            if (s.time.minutes_per_tick <= 0) fail(n, "tick_minutes must be positive");
        }
        if (auto n = root["epoch"]) {
            try {
                s.time.epoch_minutes = parse_datetime_minutes(scalar(n));
            } catch (const std::exception& e) {
                fail(n, e.what());
            }
        }
        s.duration = duration_ticks(require(root, "duration"), s.time);
        if (s.duration <= 0) fail(root["duration"], "duration must be positive");
        if (auto n = root["hop_delay"]) {
            s.hop_delay = duration_ticks(n, s.time);
            if (s.hop_delay < 0) fail(n, "hop_delay must be >= 0");
        }
        if (auto e = root["economics"]) economics(e);
        if (auto n = root["negotiation"]) negotiation(n);

        each(root, "brokers", [&](const YAML::Node& n) { broker(n); });
        if (s.brokers.empty()) fail(root, "at least one broker is required");
        each(root, "participants", [&](const YAML::Node& n) { participant(n); });
        each(root, "listings", [&](const YAML::Node& n) { listing(n); });
        each(root, "queries", [&](const YAML::Node& n) { query(n); });
        each(root, "faults", [&](const YAML::Node& n) { fault(n); });
        each(root, "admissions", [&](const YAML::Node& n) { admission(n); });
        each(root, "rotations", [&](const YAML::Node& n) { rotation(n); });
    }

    void economics(const YAML::Node& e) {
        check_keys(e, {"broker_fee", "granularity", "setup_lead"});
        if (auto n = e["broker_fee"]) {
            s.economics.broker_fee = money(n);
            if (s.economics.broker_fee.is_negative()) fail(n, "broker_fee must be >= 0");
        }
        if (auto n = e["granularity"]) {
            s.economics.granularity = integer(n);
            if (s.economics.granularity < 1) fail(n, "granularity must be >= 1");
        }
        if (auto n = e["setup_lead"]) s.economics.setup_lead = duration_ticks(n, s.time);
    }

    void negotiation(const YAML::Node& g) {
        check_keys(g, {"max_rounds", "requester", "margin_percent"});
        if (auto n = g["max_rounds"]) {
            s.negotiation.max_rounds = static_cast<int>(integer(n));
            if (s.negotiation.max_rounds < 1) fail(n, "max_rounds must be >= 1");
        }
        if (auto n = g["requester"]) {
            auto r = scalar(n);
            if (r == "consumer")
                s.negotiation.requester = trading::RequesterRole::consumer;
            else if (r == "provider")
                s.negotiation.requester = trading::RequesterRole::provider;
            else
                fail(n, "requester must be consumer or provider");
        }
        if (auto n = g["margin_percent"]) {
            s.negotiation.margin_percent = static_cast<int>(integer(n));
            if (s.negotiation.margin_percent < 0 || s.negotiation.margin_percent >= 100)
                fail(n, "margin_percent must be in [0, 100)");
        }
    }

    void broker(const YAML::Node& n) {
        check_keys(n, {"id", "location"});
        auto id = integer(require(n, "id"));
        if (id < 0) fail(n["id"], "broker id must be >= 0");
        BrokerSpec b{BrokerId{static_cast<std::uint32_t>(id)}, {}};
        if (auto l = n["location"]) b.location = location(l);
        if (s.has_broker(b.id)) fail(n, "duplicate broker id " + std::to_string(id));
        s.brokers.push_back(b);
    }

    void participant(const YAML::Node& n) {
        check_keys(n, {"id", "role", "balance", "location"});
        ParticipantSpec p;
        p.name = scalar(require(n, "id"));
        try {
            p.role = identity::parse_role(scalar(require(n, "role")));
        } catch (const std::exception& e) {
            fail(n["role"], e.what());
        }
        if (p.role == identity::Role::broker) fail(n["role"], "brokers are declared in the 'brokers' section");
        if (auto b = n["balance"]) p.balance = money(b);
        if (p.balance.is_negative()) fail(n["balance"], "balance must be >= 0");
        if (auto l = n["location"]) p.location = location(l);
        if (s.find_participant(p.name)) fail(n["id"], "duplicate participant id '" + p.name + "'");
        s.participants.push_back(std::move(p));
    }

    const ParticipantSpec& ref(const YAML::Node& n, bool want_provider) {
        auto name = scalar(n);
        const auto* p = s.find_participant(name);
        if (!p) fail(n, "unknown participant '" + name + "'");
        bool ok = want_provider ? (p->role == identity::Role::provider || p->role == identity::Role::idp)
                                : (p->role == identity::Role::consumer || p->role == identity::Role::idp);
        if (!ok) fail(n, "participant '" + name + "' cannot act as " + (want_provider ? "provider" : "consumer"));
        return *p;
    }

    void unique_item(const YAML::Node& n, const std::string& name) {
        bool taken = std::any_of(s.listings.begin(), s.listings.end(), [&](const auto& l) { return l.name == name; }) ||
                     std::any_of(s.queries.begin(), s.queries.end(), [&](const auto& q) { return q.name == name; });
        if (taken) fail(n, "duplicate listing/query id '" + name + "'");
    }

    void listing(const YAML::Node& n) {
        check_keys(n, {"id", "provider", "device_id", "data_type", "unit_cost", "min_price", "sampling_frequency",
                       "duration_offered", "location", "archived", "at"});
        ListingSpec l;
        const auto& owner = ref(require(n, "provider"), true);
        l.provider = owner.name;
        l.name = n["id"] ? scalar(n["id"]) : "L" + std::to_string(s.listings.size() + 1);
        unique_item(n, l.name);
        l.device_id = n["device_id"] ? integer(n["device_id"]) : static_cast<std::int64_t>(s.listings.size() + 1);
        l.data_type = scalar(require(n, "data_type"));
        l.unit_cost = money(require(n, "unit_cost"));
        if (l.unit_cost.is_negative()) fail(n["unit_cost"], "unit_cost must be >= 0");
        l.min_price = n["min_price"] ? money(n["min_price"]) : l.unit_cost;
        if (l.min_price.is_negative() || l.min_price > l.unit_cost)
            fail(n["min_price"], "min_price must be within [0, unit_cost]");
        l.sampling_frequency = duration_ticks(require(n, "sampling_frequency"), s.time);
        if (l.sampling_frequency <= 0) fail(n["sampling_frequency"], "sampling_frequency must be positive");
        if (auto d = n["duration_offered"]) l.duration_offered = duration_ticks(d, s.time);
        l.location = n["location"] ? location(n["location"]) : owner.location;
        if (auto a = n["archived"]) l.archived = boolean(a);
        if (auto a = n["at"]) l.at = time_point(a, s.time);
        if (l.at < 0 || l.at >= s.duration) fail(n, "listing submission time outside the run");
        s.listings.push_back(std::move(l));
    }

    void query(const YAML::Node& n) {
        check_keys(n, {"id", "consumer", "data_type", "data_age", "location", "radius", "budget", "frequency_required",
                       "start", "end", "period", "granularity", "at"});
        QuerySpec q;
        const auto& owner = ref(require(n, "consumer"), false);
        q.consumer = owner.name;
        q.name = n["id"] ? scalar(n["id"]) : "Q" + std::to_string(s.queries.size() + 1);
        unique_item(n, q.name);
        q.data_type = scalar(require(n, "data_type"));
        if (auto a = n["data_age"]) {
            try {
                q.data_age = broker::parse_data_age(scalar(a));
            } catch (const std::exception& e) {
                fail(a, e.what());
            }
        }
        q.location = n["location"] ? location(n["location"]) : owner.location;
        if (auto r = n["radius"]) {
            q.radius = number(r);
            if (q.radius < 0) fail(r, "radius must be >= 0");
        }
        q.budget = money(require(n, "budget"));
        if (q.budget.is_negative()) fail(n["budget"], "budget must be >= 0");
        q.frequency_required = duration_ticks(require(n, "frequency_required"), s.time);
        if (q.frequency_required <= 0) fail(n["frequency_required"], "frequency_required must be positive");
        if (auto v = n["start"]) q.start = time_point(v, s.time);
        if (auto v = n["end"]) q.end = time_point(v, s.time);
        if (auto v = n["period"]) q.period = duration_ticks(v, s.time);
        if (!q.end && q.period <= 0) fail(n, "query needs either 'end' or a positive 'period'");
        if (q.start && q.end && *q.end <= *q.start) fail(n["end"], "end must be after start");
        if (auto g = n["granularity"]) {
            q.granularity = integer(g);
            if (*q.granularity < 1) fail(g, "granularity must be >= 1");
        }
        if (auto a = n["at"]) q.at = time_point(a, s.time);
        if (q.at < 0 || q.at >= s.duration) fail(n, "query submission time outside the run");
        s.queries.push_back(std::move(q));
    }

    void fault(const YAML::Node& n) {
        check_keys(n, {"kind", "target", "at", "params"});
        FaultSpec f;
        try {
            f.kind = parse_fault_kind(scalar(require(n, "kind")));
        } catch (const std::exception& e) {
            fail(n["kind"], e.what());
        }
        f.target = scalar(require(n, "target"));
        f.at = n["at"] ? time_point(n["at"], s.time) : 0;
        if (f.at < 0 || f.at >= s.duration) fail(n, "fault time must lie in [0, duration)");
        if (auto p = n["params"]) {
            if (!p.IsMap()) fail(p, "params must be a mapping");
            for (const auto& kv : p) f.params[kv.first.as<std::string>()] = scalar(kv.second);
        }
        if (targets_broker(f.kind)) {
            if (!is_integer_text(f.target) || !s.has_broker(BrokerId{static_cast<std::uint32_t>(std::stoul(f.target))}))
                fail(n["target"], "unknown broker '" + f.target + "'");
        } else if (!s.find_participant(f.target)) {
            fail(n["target"], "unknown participant '" + f.target + "'");
        }
        for (const auto& key : {"window", "delta"})
            if (f.params.count(key) && !is_integer_text(f.params[key]) &&
                !(f.params[key].size() > 1 && f.params[key][0] == '-' && is_integer_text(f.params[key].substr(1))))
                fail(n["params"], std::string("param '") + key + "' must be an integer");
        if (f.params.count("window") && f.param_int("window", 1) < 1) fail(n["params"], "window must be >= 1");
        s.faults.push_back(std::move(f));
    }

    void admission(const YAML::Node& n) {
        check_keys(n, {"candidate", "location", "at", "votes"});
        AdmissionSpec a;
        auto id = integer(require(n, "candidate"));
        if (id < 0) fail(n["candidate"], "candidate id must be >= 0");
        a.candidate = BrokerId{static_cast<std::uint32_t>(id)};
        if (auto l = n["location"]) a.location = location(l);
        a.at = n["at"] ? time_point(n["at"], s.time) : 0;
        if (a.at < 0 || a.at >= s.duration) fail(n, "admission time must lie in [0, duration)");
        auto votes = require(n, "votes");
        if (!votes.IsMap()) fail(votes, "votes must map broker id to accept/challenge");
        for (const auto& kv : votes) {
            auto voter = integer(kv.first);
            auto v = scalar(kv.second);
            broker::Vote vote;
            if (v == "accept")
                vote = broker::Vote::accept;
            else if (v == "challenge")
                vote = broker::Vote::challenge;
            else
                fail(kv.second, "vote must be accept or challenge");
            a.votes[BrokerId{static_cast<std::uint32_t>(voter)}] = vote;
        }
        s.admissions.push_back(std::move(a));
    }

    void rotation(const YAML::Node& n) {
        check_keys(n, {"participant", "at"});
        RotationSpec r;
        r.participant = scalar(require(n, "participant"));
        if (!s.find_participant(r.participant)) fail(n["participant"], "unknown participant '" + r.participant + "'");
        r.at = n["at"] ? time_point(n["at"], s.time) : 0;
        if (r.at < 0 || r.at >= s.duration) fail(n, "rotation time must lie in [0, duration)");
        s.rotations.push_back(std::move(r));
    }
};

}  // namespace

ScenarioError::ScenarioError(int line, int column, const std::string& message)
    : std::runtime_error(position_text(line, column, message)), line_(line), column_(column) {}

std::string_view to_string(FaultKind k) {
    switch (k) {
        case FaultKind::broker_crash: return "broker_crash";
        case FaultKind::broker_recover: return "broker_recover";
        case FaultKind::counter_tamper: return "counter_tamper";
        case FaultKind::payment_refusal: return "payment_refusal";
        case FaultKind::delivery_stall: return "delivery_stall";
        case FaultKind::eavesdrop: return "eavesdrop";
        case FaultKind::broker_collusion_bias: return "broker_collusion_bias";
    }
    return "?";
}

FaultKind parse_fault_kind(std::string_view text) {
    for (auto k : {FaultKind::broker_crash, FaultKind::broker_recover, FaultKind::counter_tamper,
                   FaultKind::payment_refusal, FaultKind::delivery_stall, FaultKind::eavesdrop,
                   FaultKind::broker_collusion_bias})
        if (to_string(k) == text) return k;
    throw std::invalid_argument("unknown fault kind '" + std::string(text) + "'");
}

bool targets_broker(FaultKind k) {
    return k == FaultKind::broker_crash || k == FaultKind::broker_recover || k == FaultKind::broker_collusion_bias;
}

std::int64_t FaultSpec::param_int(const std::string& key, std::int64_t fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : std::stoll(it->second);
}

BrokerId FaultSpec::target_broker() const { return BrokerId{static_cast<std::uint32_t>(std::stoul(target))}; }

const ParticipantSpec* Scenario::find_participant(std::string_view name) const {
    for (const auto& p : participants)
        if (p.name == name) return &p;
    return nullptr;
}

bool Scenario::has_broker(BrokerId id) const {
    return std::any_of(brokers.begin(), brokers.end(), [&](const BrokerSpec& b) { return b.id == id; });
}

Scenario load_scenario(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ScenarioError(e.mark.is_null() ? 0 : e.mark.line + 1, e.mark.is_null() ? 0 : e.mark.column + 1, e.msg);
    }
    if (!root || !root.IsMap()) throw ScenarioError(1, 1, "scenario must be a mapping");
    Loader loader;
    try {
        loader.top(root);
    } catch (const YAML::Exception& e) {
        throw ScenarioError(e.mark.is_null() ? 0 : e.mark.line + 1, e.mark.is_null() ? 0 : e.mark.column + 1, e.msg);
    }
    return std::move(loader.s);
}

Scenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(0, 0, "cannot open scenario file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

}  // namespace datamarket::harness
