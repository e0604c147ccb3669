#include "datamarket/broker/book.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace datamarket::broker {
namespace {

std::uint64_t double_bits(double v) {
    std::uint64_t bits = 0;
    static_assert(sizeof bits == sizeof v);
    std::memcpy(&bits, &v, sizeof v);
    return bits;
}

void encode_location(crypto::Encoder& enc, const Location& l) { enc.u64(double_bits(l.x)).u64(double_bits(l.y)); }

}  // namespace

std::string_view to_string(DataAge a) { return a == DataAge::archived ? "archived" : "real_time"; }

DataAge parse_data_age(std::string_view text) {
    if (text == "archived") return DataAge::archived;
    if (text == "real_time" || text == "real-time" || text == "realtime") return DataAge::real_time;
    throw std::invalid_argument("unknown data_age '" + std::string(text) + "'");
}

void Listing::validate() const {
    if (unit_cost.is_negative()) throw std::invalid_argument("listing unit_cost must be >= 0");
    if (sampling_frequency <= 0) throw std::invalid_argument("listing sampling_frequency must be > 0");
    if (data_type.empty()) throw std::invalid_argument("listing data_type must not be empty");
}

void Query::validate() const {
    if (budget.is_negative()) throw std::invalid_argument("query budget must be >= 0");
    if (!(radius >= 0.0)) throw std::invalid_argument("query radius must be >= 0");
    if (frequency_required <= 0) throw std::invalid_argument("query frequency_required must be > 0");
    if (data_type.empty()) throw std::invalid_argument("query data_type must not be empty");
}

std::size_t Book::merge(const Book& other) {
    std::size_t added = 0;
    for (const auto& [id, l] : other.listings) added += listings.emplace(id, l).second;
    for (const auto& [id, q] : other.queries) added += queries.emplace(id, q).second;
    return added;
}

bool Book::erase(SubmissionId id) { return listings.erase(id) + queries.erase(id) > 0; }

bool Book::contains(SubmissionId id) const { return listings.count(id) || queries.count(id); }

crypto::Digest Book::digest() const {
    crypto::Encoder enc;
    enc.str("book").u64(listings.size());
    for (const auto& [id, l] : listings) {
        enc.u64(to_underlying(id)).u64(to_underlying(l.owner)).bytes(l.provider_pk.bytes).i64(l.device_id);
        enc.str(l.data_type).i64(l.unit_cost.micros()).i64(l.sampling_frequency).i64(l.duration_offered);
        encode_location(enc, l.location);
        enc.u64(l.archived ? 1 : 0);
    }
    enc.u64(queries.size());
    for (const auto& [id, q] : queries) {
        enc.u64(to_underlying(id)).u64(to_underlying(q.owner)).bytes(q.consumer_pk.bytes).str(q.data_type);
        enc.u64(q.data_age == DataAge::archived ? 1 : 0);
        encode_location(enc, q.location);
        enc.u64(std::isinf(q.radius) ? ~0ULL : double_bits(q.radius));
        enc.i64(q.budget.micros()).i64(q.frequency_required);
    }
    return crypto::hash(enc);
}

}  // namespace datamarket::broker
