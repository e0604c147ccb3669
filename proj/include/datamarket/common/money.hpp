#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace datamarket {

// Fixed-point currency with six decimal places. All marketplace arithmetic
// (invoices, deposits, fees) is exact in this representation.
class Money {
public:
    static constexpr std::int64_t kScale = 1'000'000;

    constexpr Money() = default;

    static constexpr Money from_micros(std::int64_t micros) { return Money{micros}; }
    static constexpr Money units(std::int64_t whole) { return Money{whole * kScale}; }

    // Parses a plain decimal such as "0.02", "29.76" or "-3". More than six
    // fractional digits is an error rather than a silent rounding.
    static Money parse(std::string_view text);

    constexpr std::int64_t micros() const { return micros_; }
    double to_double() const { return static_cast<double>(micros_) / kScale; }

    // Shortest exact decimal with at least two fractional digits.
    std::string to_string() const;

    constexpr Money operator+(Money o) const { return Money{micros_ + o.micros_}; }
    constexpr Money operator-(Money o) const { return Money{micros_ - o.micros_}; }
    constexpr Money operator-() const { return Money{-micros_}; }
    constexpr Money& operator+=(Money o) { micros_ += o.micros_; return *this; }
    constexpr Money& operator-=(Money o) { micros_ -= o.micros_; return *this; }
    constexpr Money operator*(std::int64_t k) const { return Money{micros_ * k}; }
    friend constexpr Money operator*(std::int64_t k, Money m) { return m * k; }

    // floor(this * num / den), used for margins like "budget minus 10%".
    constexpr Money scaled(std::int64_t num, std::int64_t den) const {
        std::int64_t p = micros_ * num;
        std::int64_t q = p / den;
        if ((p % den != 0) && ((p < 0) != (den < 0))) --q;
        return Money{q};
    }

    static constexpr Money midpoint(Money a, Money b) {
        std::int64_t s = a.micros_ + b.micros_;
        return Money{s >= 0 ? s / 2 : -((-s + 1) / 2)};
    }

    constexpr bool is_negative() const { return micros_ < 0; }

    constexpr auto operator<=>(const Money&) const = default;

private:
    constexpr explicit Money(std::int64_t micros) : micros_(micros) {}
    std::int64_t micros_ = 0;
};

}  // namespace datamarket
