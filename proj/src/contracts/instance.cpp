#include "datamarket/contracts/instance.hpp"

#include <algorithm>
#include <sstream>

namespace datamarket::contracts {
namespace {

const std::vector<std::string> kRegisterAbis{"RegisterContract", "GetContract"};
const std::vector<std::string> kDscAbis{"ExecuteContract", "Settlement", "RemoveSubscription", "CreateContract",
                                        "LodgeDispute"};

std::size_t index_arg(const Args& args, std::size_t i) {
    auto v = arg_int(args, i);
    if (v < 0) throw ContractError("bad_index");
    return static_cast<std::size_t>(v);
}

void encode_entry(crypto::Encoder& enc, const SubscriptionEntry& e) {
    enc.i64(e.device_id).str(e.data_type).i64(e.start_time).i64(e.measurement_frequency);
    if (e.session_key)
        enc.tag('k').bytes(*e.session_key);
    else
        enc.tag('-');
    enc.i64(e.cost.micros()).i64(e.end_time).i64(e.payment_granularity).i64(static_cast<std::int64_t>(e.status));
}

void encode_dsc(crypto::Encoder& enc, const DscState& d) {
    const auto& t = d.terms;
    enc.bytes(t.provider_pk.bytes)
        .bytes(t.consumer_pk.bytes)
        .u64(to_underlying(t.broker))
        .i64(t.broker_fee.micros())
        .i64(t.start_time)
        .i64(t.end_time)
        .i64(t.match_round)
        .i64(t.listing_id)
        .i64(t.query_id)
        .u64(d.subscriptions.size());
    for (const auto& s : d.subscriptions) {
        encode_entry(enc, s.entry);
        enc.i64(s.escrow.provider_deposit.micros())
            .i64(s.escrow.consumer_deposit.micros())
            .i64(s.escrow.locked_until)
            .i64(s.escrow.pending_invoice.micros())
            .i64(s.provider_counter)
            .i64(s.consumer_counter)
            .u64(s.consumer_authorized ? 1 : 0)
            .i64(s.settled_units)
            .i64(s.full_settlements)
            .i64(s.partial_settlements)
            .i64(s.disputed_at)
            .str(s.dispute_cause)
            .u64(s.completed ? 1 : 0);
        for (Money m : {s.deposits_in, s.invoices_charged, s.paid_to_provider, s.fees_paid, s.refunded, s.frozen})
            enc.i64(m.micros());
    }
}

void encode_register(crypto::Encoder& enc, const RegisterState& r) {
    enc.u64(r.lookup.size());
    for (const auto& e : r.lookup) {
        enc.str(e.contract_name).bytes(e.provider_pk.bytes).bytes(e.consumer_pk.bytes).str(e.contract_address.str());
        enc.str(join_abis(e.contract_abis));
    }
}

std::string abi_column(const std::vector<std::string>& abis) {
    std::string out;
    for (const auto& a : abis) {
        if (!out.empty()) out += ", ";
        out += a + "()";
    }
    return out;
}

}  // namespace

std::string_view to_string(Kind k) { return k == Kind::register_contract ? "register" : "dsc"; }

Kind parse_kind(std::string_view text) {
    if (text == "register") return Kind::register_contract;
    if (text == "dsc") return Kind::dsc;
    throw ContractError("unknown_kind");
}

const std::vector<std::string>& abi_names(Kind kind) { return kind == Kind::register_contract ? kRegisterAbis : kDscAbis; }

bool is_read_only(Kind kind, std::string_view abi) { return kind == Kind::register_contract && abi == "GetContract"; }

void ContractInstance::encode(crypto::Encoder& enc) const {
    enc.str(address.str()).str(to_string(kind)).str(join_abis(abis));
    if (kind == Kind::register_contract)
        encode_register(enc, as_register());
    else
        encode_dsc(enc, as_dsc());
}

crypto::Digest ContractInstance::digest() const {
    crypto::Encoder enc;
    encode(enc);
    return crypto::hash(enc);
}

Args dsc_init_args(const DscTerms& t) {
    return {to_bytes(t.provider_pk), to_bytes(t.consumer_pk), std::int64_t{to_underlying(t.broker)}, t.broker_fee,
            t.start_time, t.end_time, t.match_round, t.listing_id, t.query_id};
}

Args create_contract_args(const SubscriptionEntry& e, Money provider_deposit, Money consumer_deposit,
                          const crypto::Signature& consumer_signature) {
    return {e.device_id,  e.data_type,       e.start_time,     e.measurement_frequency, e.cost, e.end_time,
            e.payment_granularity, provider_deposit, consumer_deposit, to_bytes(consumer_signature.bytes)};
}

Args register_contract_args(const LookupEntry& e) {
    return {e.contract_name, to_bytes(e.provider_pk), to_bytes(e.consumer_pk), e.contract_address.str(),
            join_abis(e.contract_abis)};
}

ContractInstance instantiate(Kind kind, Address address, const Args& init_args) {
    ContractInstance inst;
    inst.address = std::move(address);
    inst.kind = kind;
    inst.abis = abi_names(kind);
    try {
        if (kind == Kind::register_contract) {
            if (!init_args.empty()) throw ContractError("malformed");
            inst.state = RegisterState{};
        } else {
            DscTerms t;
            t.provider_pk = arg_key(init_args, 0);
            t.consumer_pk = arg_key(init_args, 1);
            auto broker = arg_int(init_args, 2);
            if (broker < 0) throw ContractError("malformed");
            t.broker = BrokerId{static_cast<std::uint32_t>(broker)};
            t.broker_fee = arg_money(init_args, 3);
            t.start_time = arg_int(init_args, 4);
            t.end_time = arg_int(init_args, 5);
            t.match_round = arg_int(init_args, 6);
            t.listing_id = arg_int(init_args, 7);
            t.query_id = arg_int(init_args, 8);
            if (init_args.size() != 9) throw ContractError("malformed");
            inst.state = make_dsc(t);
        }
    } catch (const ArgumentError&) {
        throw ContractError("malformed");
    }
    return inst;
}

Args invoke(ContractInstance& inst, std::string_view abi, const Args& args, CallContext& ctx) {
    if (std::find(inst.abis.begin(), inst.abis.end(), abi) == inst.abis.end()) throw ContractError("unknown_abi");
    try {
        if (inst.kind == Kind::register_contract) {
            auto& reg = std::get<RegisterState>(inst.state);
            if (abi == "RegisterContract") {
                LookupEntry e{arg_string(args, 0), arg_key(args, 1), arg_key(args, 2), Address{arg_string(args, 3)},
                              split_abis(arg_string(args, 4))};
                register_contract(reg, ctx, std::move(e));
                return {};
            }
            auto [address, abis] = get_contract(reg, arg_string(args, 0));
            return {address.str(), join_abis(abis)};
        }

        auto& dsc = std::get<DscState>(inst.state);
        if (abi == "CreateContract") {
            SubscriptionEntry e;
            e.device_id = arg_int(args, 0);
            e.data_type = arg_string(args, 1);
            e.start_time = arg_int(args, 2);
            e.measurement_frequency = arg_int(args, 3);
            e.cost = arg_money(args, 4);
            e.end_time = arg_int(args, 5);
            e.payment_granularity = arg_int(args, 6);
            crypto::Signature sig{arg_array<64>(args, 9)};
            auto idx = create_contract(dsc, ctx, std::move(e), arg_money(args, 7), arg_money(args, 8), sig);
            return {static_cast<std::int64_t>(idx)};
        }
        if (abi == "ExecuteContract") {
            auto r = execute_contract(dsc, ctx, index_arg(args, 0), arg_array<16>(args, 1));
            return {to_bytes(r.session_key), r.notification.data_type};
        }
        if (abi == "Settlement") {
            bool authorize = args.size() < 3 || arg_int(args, 2) != 0;
            auto r = settlement(dsc, ctx, index_arg(args, 0), arg_int(args, 1), authorize);
            return {std::string(to_string(r.kind)), r.units, r.amount};
        }
        if (abi == "RemoveSubscription") {
            auto r = remove_subscription(dsc, ctx, index_arg(args, 0));
            return {std::int64_t{r.disputed ? 1 : 0}, r.final_units, r.final_invoice, r.provider_refund,
                    r.consumer_refund, r.frozen};
        }
        if (abi == "LodgeDispute") {
            bool fresh = lodge_dispute(dsc, ctx, index_arg(args, 0), args.size() > 1 ? arg_string(args, 1) : "");
            return {std::int64_t{fresh ? 1 : 0}};
        }
    } catch (const ArgumentError&) {
        throw ContractError("malformed");
    }
    throw ContractError("unknown_abi");
}

std::string subscription_table_header() {
    return "Device id|Data type|Start Time|Measurement frequency|Session_key|cost|End time|Payment granularity";
}

std::string subscription_table(const DscState& dsc, const TimeBase& time) {
    std::ostringstream out;
    out << subscription_table_header() << '\n';
    for (const auto& s : dsc.subscriptions) {
        const auto& e = s.entry;
        out << e.device_id << '|' << e.data_type << '|' << time.format_datetime(e.start_time) << '|'
            << time.format_duration(e.measurement_frequency) << '|'
            << (e.session_key ? crypto::to_hex(*e.session_key) : std::string{}) << '|' << e.cost.to_string() << '|'
            << time.format_datetime(e.end_time) << '|' << e.payment_granularity << '\n';
    }
    return out.str();
}

std::string lookup_table_header() {
    return "Contract name|Provider public key|Consumer public key|Contract address|Contract ABI";
}

std::string lookup_table(const RegisterState& reg) {
    std::ostringstream out;
    out << lookup_table_header() << '\n';
    for (const auto& e : reg.lookup) {
        out << e.contract_name << '|' << crypto::to_hex(e.provider_pk) << '|' << crypto::to_hex(e.consumer_pk) << '|'
            << e.contract_address.str() << '|' << abi_column(e.contract_abis) << '\n';
    }
    return out.str();
}

}  // namespace datamarket::contracts
