#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace harvol {

using Date = std::chrono::sys_days;
using Instant = std::chrono::sys_seconds;

[[nodiscard]] Date make_date(int year, unsigned month, unsigned day);

/// Parses `YYYY-MM-DD`. Throws ValidationError on malformed or impossible dates.
[[nodiscard]] Date parse_date(std::string_view text);

/// Parses an ISO-8601 UTC timestamp: `YYYY-MM-DDTHH:MM[:SS]` followed by `Z`,
/// `+00:00`, or nothing (taken as UTC). A space may replace the `T`. Any other
/// offset is rejected.
[[nodiscard]] Instant parse_timestamp(std::string_view text);

[[nodiscard]] std::string format_date(Date date);             // 2022-02-28
[[nodiscard]] std::string format_timestamp(Instant instant);  // 2022-02-28T08:00:00Z
[[nodiscard]] std::string format_hour(Instant instant);       // 08:00

[[nodiscard]] bool is_weekday(Date date);

}  // namespace harvol
