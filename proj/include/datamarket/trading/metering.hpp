#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "datamarket/common/crypto.hpp"
#include "datamarket/trading/channel.hpp"

namespace datamarket::trading {

// Per-party count of acknowledged deliveries on one subscription.
struct MeteringCounter {
    crypto::PublicKey owner_pk;
    Address dsc;
    std::size_t sub_index = 0;
    std::int64_t granularity = 1;
    std::int64_t window_count = 0;
    std::int64_t total_count = 0;

    void record() {
        ++window_count;
        ++total_count;
    }
    // Called once a Settlement for the window went through.
    void reset_window() { window_count = 0; }
};

enum class SettlementDue { not_due, due };

SettlementDue check_settlement_due(const MeteringCounter& meter);

// One opaque sample as carried on the channel.
struct DataUnit {
    Address dsc;
    std::int64_t sub_index = 0;
    Tick time = 0;
    std::string data_type;
    std::int64_t value = 0;
};

// Every encoded unit starts with this tag, which lets a post-run scan look
// for plaintext that leaked into ledger traffic or ciphertext.
inline constexpr std::string_view kDataUnitTag = "DATAUNIT:";

Bytes encode_data_unit(const DataUnit& unit);
std::optional<DataUnit> decode_data_unit(std::span<const std::uint8_t> bytes);

// Provider-to-consumer delivery state for one active subscription.
struct DeliverySession {
    Address dsc;
    std::size_t sub_index = 0;
    std::string data_type;
    Tick start_time = 0;
    Tick end_time = 0;
    Tick frequency = 1;
    bool active = true;
    OffchainChannel channel;
    crypto::SessionKey consumer_key{};
    MeteringCounter provider_meter;
    MeteringCounter consumer_meter;
    int consecutive_missed = 0;

    bool on_grid(Tick t) const { return t >= start_time && t < end_time && (t - start_time) % frequency == 0; }
};

enum class TransferStatus { ack, nack, rejected };

std::string_view to_string(TransferStatus s);

struct TransferOutcome {
    TransferStatus status = TransferStatus::rejected;
    std::string reason;
};

// Sends the unit scheduled at `t`. The consumer decrypts and checks type and
// timestamp before acknowledging; both meters move only on an ack.
// `corrupt` flips a ciphertext byte in transit.
TransferOutcome transfer_data_unit(DeliverySession& session, Tick t, std::int64_t value, bool corrupt = false);

// Consecutive empty grid slots after which the consumer gives up on a
// provider and lodges a dispute.
inline constexpr int kStallThreshold = 3;

struct DisputeRecord {
    Address dsc;
    std::size_t sub_index = 0;
    crypto::PublicKey reporter;
    Tick at = 0;
    std::string cause;
};

// Off-chain view of which subscriptions are in dispute. The first record per
// subscription wins; later reports are ignored.
class DisputeRegistry {
public:
    std::optional<DisputeRecord> lodge_dispute(const Address& dsc, std::size_t sub, const crypto::PublicKey& reporter,
                                               Tick at, std::string cause);
    bool is_disputed(const Address& dsc, std::size_t sub) const;
    const std::map<std::pair<Address, std::size_t>, DisputeRecord>& records() const { return records_; }

private:
    std::map<std::pair<Address, std::size_t>, DisputeRecord> records_;
};

}  // namespace datamarket::trading
