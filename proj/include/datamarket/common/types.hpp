#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

namespace datamarket {

// Simulated time. One tick is a fixed number of simulated minutes (scenario
// controlled, default 1).
using Tick = std::int64_t;

using Bytes = std::vector<std::uint8_t>;

enum class ParticipantId : std::uint32_t {};
enum class BrokerId : std::uint32_t {};
enum class SubmissionId : std::uint64_t {};

template <class E>
constexpr auto to_underlying(E e) noexcept {
    return static_cast<std::underlying_type_t<E>>(e);
}

struct Location {
    double x = 0.0;
    double y = 0.0;

    constexpr double squared_distance(const Location& o) const {
        double dx = x - o.x;
        double dy = y - o.y;
        return dx * dx + dy * dy;
    }
    constexpr bool operator==(const Location&) const = default;
};

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

// Ledger address of a deployed contract, rendered like "0XCA35...733C".
// A handful of reserved names address ledger-native system functions.
class Address {
public:
    Address() = default;
    explicit Address(std::string text) : text_(std::move(text)) {}

    static Address deploy() { return Address{"DEPLOY"}; }
    static Address keys() { return Address{"KEYS"}; }
    static Address anchor() { return Address{"ANCHOR"}; }
    static Address brokers() { return Address{"BROKERS"}; }

    bool is_system() const {
        return text_ == "DEPLOY" || text_ == "KEYS" || text_ == "ANCHOR" || text_ == "BROKERS";
    }
    bool empty() const { return text_.empty(); }
    const std::string& str() const { return text_; }

    auto operator<=>(const Address&) const = default;

private:
    std::string text_;
};

}  // namespace datamarket
