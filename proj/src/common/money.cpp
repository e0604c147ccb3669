#include "datamarket/common/money.hpp"

#include <stdexcept>

namespace datamarket {

Money Money::parse(std::string_view text) {
    auto fail = [&] { return std::invalid_argument("invalid amount: '" + std::string(text) + "'"); };
    if (text.empty()) throw fail();

    bool negative = false;
    std::size_t i = 0;
    if (text[0] == '-' || text[0] == '+') {
        negative = text[0] == '-';
        ++i;
    }
    std::int64_t whole = 0;
    std::int64_t frac = 0;
    int frac_digits = 0;
    bool any_digit = false;
    bool in_frac = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.') {
            if (in_frac) throw fail();
            in_frac = true;
            continue;
        }
        if (c < '0' || c > '9') throw fail();
        any_digit = true;
        if (in_frac) {
            if (++frac_digits > 6) throw fail();
            frac = frac * 10 + (c - '0');
        } else {
            if (whole > (INT64_MAX / kScale) / 10) throw fail();
            whole = whole * 10 + (c - '0');
        }
    }
    if (!any_digit) throw fail();
    for (int k = frac_digits; k < 6; ++k) frac *= 10;
    std::int64_t micros = whole * kScale + frac;
    return Money{negative ? -micros : micros};
}

std::string Money::to_string() const {
    std::int64_t v = micros_ < 0 ? -micros_ : micros_;
    std::string frac = std::to_string(v % kScale);
    frac.insert(0, 6 - frac.size(), '0');
    while (frac.size() > 2 && frac.back() == '0') frac.pop_back();
    std::string out = micros_ < 0 ? "-" : "";
    out += std::to_string(v / kScale);
    out += '.';
    out += frac;
    return out;
}

}  // namespace datamarket
