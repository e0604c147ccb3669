#include "datamarket/trading/metering.hpp"

#include <algorithm>

namespace datamarket::trading {

SettlementDue check_settlement_due(const MeteringCounter& meter) {
    return meter.window_count >= meter.granularity ? SettlementDue::due : SettlementDue::not_due;
}

Bytes encode_data_unit(const DataUnit& unit) {
    crypto::Encoder enc;
    for (char c : kDataUnitTag) enc.tag(c);
    enc.str(unit.dsc.str()).i64(unit.sub_index).i64(unit.time).str(unit.data_type).i64(unit.value);
    return enc.take();
}

namespace {

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

    bool tag(std::string_view t) {
        if (b_.size() - pos_ < t.size()) return false;
        if (!std::equal(t.begin(), t.end(), b_.begin() + pos_)) return false;
        pos_ += t.size();
        return true;
    }
    std::optional<std::uint64_t> u64() {
        if (b_.size() - pos_ < 8) return std::nullopt;
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | b_[pos_++];
        return v;
    }
    std::optional<std::string> str() {
        auto n = u64();
        if (!n || b_.size() - pos_ < *n) return std::nullopt;
        std::string s(b_.begin() + pos_, b_.begin() + pos_ + *n);
        pos_ += *n;
        return s;
    }
    bool done() const { return pos_ == b_.size(); }

private:
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
};

}  // namespace

std::optional<DataUnit> decode_data_unit(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    if (!r.tag(kDataUnitTag)) return std::nullopt;
    auto dsc = r.str();
    auto sub = r.u64();
    auto time = r.u64();
    auto type = r.str();
    auto value = r.u64();
    if (!dsc || !sub || !time || !type || !value || !r.done()) return std::nullopt;
    return DataUnit{Address{*dsc}, static_cast<std::int64_t>(*sub), static_cast<Tick>(*time), *type,
                    static_cast<std::int64_t>(*value)};
}

std::string_view to_string(TransferStatus s) {
    switch (s) {
        case TransferStatus::ack: return "ack";
        case TransferStatus::nack: return "nack";
        case TransferStatus::rejected: return "rejected";
    }
    return "?";
}

TransferOutcome transfer_data_unit(DeliverySession& s, Tick t, std::int64_t value, bool corrupt) {
    if (!s.active) return {TransferStatus::rejected, "inactive"};
    if (!s.on_grid(t)) return {TransferStatus::rejected, "off_grid"};
    if (check_settlement_due(s.provider_meter) == SettlementDue::due) return {TransferStatus::rejected, "window_full"};

    DataUnit unit{s.dsc, static_cast<std::int64_t>(s.sub_index), t, s.data_type, value};
    Frame frame = s.channel.send(encode_data_unit(unit));
    if (corrupt && !frame.ciphertext.empty()) frame.ciphertext[frame.ciphertext.size() / 2] ^= 0x5A;

    auto plain = OffchainChannel::receive(frame, s.consumer_key);
    if (!plain) return {TransferStatus::nack, "undecryptable"};
    auto got = decode_data_unit(*plain);
    if (!got) return {TransferStatus::nack, "malformed"};
    if (got->dsc != s.dsc || got->sub_index != unit.sub_index || got->data_type != s.data_type || got->time != t)
        return {TransferStatus::nack, "unexpected_unit"};

    s.consumer_meter.record();
    s.provider_meter.record();
    return {TransferStatus::ack, {}};
}

std::optional<DisputeRecord> DisputeRegistry::lodge_dispute(const Address& dsc, std::size_t sub,
                                                            const crypto::PublicKey& reporter, Tick at,
                                                            std::string cause) {
    auto [it, fresh] = records_.try_emplace({dsc, sub}, DisputeRecord{dsc, sub, reporter, at, std::move(cause)});
    if (!fresh) return std::nullopt;
    return it->second;
}

bool DisputeRegistry::is_disputed(const Address& dsc, std::size_t sub) const { return records_.count({dsc, sub}) > 0; }

}  // namespace datamarket::trading
