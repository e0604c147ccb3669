#include "datamarket/common/sim_time.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace datamarket {
namespace {

int parse_int(std::string_view s, std::string_view whole) {
    if (s.empty()) throw std::invalid_argument("bad date/time: '" + std::string(whole) + "'");
    int v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') throw std::invalid_argument("bad date/time: '" + std::string(whole) + "'");
        v = v * 10 + (c - '0');
    }
    return v;
}

}  // namespace

std::int64_t parse_datetime_minutes(std::string_view text) {
    using namespace std::chrono;
    // dd/mm/yyyy[ HH:MM]
    auto s1 = text.find('/');
    auto s2 = text.find('/', s1 == std::string_view::npos ? 0 : s1 + 1);
    if (s1 == std::string_view::npos || s2 == std::string_view::npos)
        throw std::invalid_argument("bad date/time: '" + std::string(text) + "'");
    auto space = text.find(' ', s2);
    int d = parse_int(text.substr(0, s1), text);
    int m = parse_int(text.substr(s1 + 1, s2 - s1 - 1), text);
    int y = parse_int(text.substr(s2 + 1, space == std::string_view::npos ? std::string_view::npos : space - s2 - 1), text);
    int hh = 0, mm = 0;
    if (space != std::string_view::npos) {
        auto rest = text.substr(space + 1);
        auto colon = rest.find(':');
        if (colon == std::string_view::npos) throw std::invalid_argument("bad date/time: '" + std::string(text) + "'");
        hh = parse_int(rest.substr(0, colon), text);
        mm = parse_int(rest.substr(colon + 1), text);
    }
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || hh > 23 || mm > 59) throw std::invalid_argument("bad date/time: '" + std::string(text) + "'");
    auto days_since = sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days_since) * 1440 + hh * 60 + mm;
}

std::string format_datetime_minutes(std::int64_t minutes) {
    using namespace std::chrono;
    std::int64_t day_index = minutes >= 0 ? minutes / 1440 : -((-minutes + 1439) / 1440);
    std::int64_t in_day = minutes - day_index * 1440;
    year_month_day ymd{sys_days{days{day_index}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02u/%02u/%04d %02d:%02d", static_cast<unsigned>(ymd.day()),
                  static_cast<unsigned>(ymd.month()), static_cast<int>(ymd.year()), static_cast<int>(in_day / 60),
                  static_cast<int>(in_day % 60));
    return buf;
}

std::int64_t parse_duration_minutes(std::string_view text) {
    std::size_t i = 0;
    std::int64_t v = 0;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') v = v * 10 + (text[i++] - '0');
    if (i == 0) throw std::invalid_argument("bad duration: '" + std::string(text) + "'");
    auto unit = text.substr(i);
    if (unit.empty() || unit == "m" || unit == "min" || unit == "mins") return v;
    if (unit == "h") return v * 60;
    if (unit == "d") return v * 1440;
    throw std::invalid_argument("bad duration unit: '" + std::string(text) + "'");
}

std::string TimeBase::format_datetime(Tick t) const { return format_datetime_minutes(epoch_minutes + t * minutes_per_tick); }

std::string TimeBase::format_duration(Tick ticks) const { return std::to_string(ticks * minutes_per_tick) + "mins"; }

Tick TimeBase::datetime_to_tick(std::string_view text) const {
    std::int64_t delta = parse_datetime_minutes(text) - epoch_minutes;
    if (delta % minutes_per_tick != 0) throw std::invalid_argument("time not on tick boundary: " + std::string(text));
    return delta / minutes_per_tick;
}

}  // namespace datamarket
