#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "datamarket/common/types.hpp"

namespace datamarket {

// Maps integer ticks onto the civil calendar used in subscription tables.
struct TimeBase {
    std::int64_t epoch_minutes = 0;  // minutes since 1970-01-01 00:00 UTC at tick 0
    std::int64_t minutes_per_tick = 1;

    std::string format_datetime(Tick t) const;         // "20/05/2018 00:00"
    std::string format_duration(Tick ticks) const;     // "30mins"
    Tick datetime_to_tick(std::string_view text) const;
};

// "dd/mm/yyyy HH:MM" -> minutes since the Unix epoch.
std::int64_t parse_datetime_minutes(std::string_view text);
std::string format_datetime_minutes(std::int64_t minutes);

// "30", "30min", "30mins", "2h", "1d" -> minutes.
std::int64_t parse_duration_minutes(std::string_view text);

}  // namespace datamarket
