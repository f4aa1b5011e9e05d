#include "harvol/calendar.hpp"

#include "harvol/errors.hpp"

#include <charconv>
#include <cstdio>

namespace harvol {
namespace {

int parse_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
    if (pos + len > text.size()) {
        throw ValidationError("calendar", "truncated date/time '" + std::string(whole) + "'");
    }
    int value = 0;
    const char* first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc{} || ptr != first + len) {
        throw ValidationError("calendar", "malformed date/time '" + std::string(whole) + "'");
    }
    return value;
}

void expect_char(std::string_view text, std::size_t pos, char c, std::string_view whole) {
    if (pos >= text.size() || text[pos] != c) {
        throw ValidationError("calendar", "malformed date/time '" + std::string(whole) + "'");
    }
}

}  // namespace

Date make_date(int year, unsigned month, unsigned day) {
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                          std::chrono::day{day}};
    if (!ymd.ok()) {
        throw ValidationError("calendar", "invalid calendar date " + std::to_string(year) + "-" +
                                              std::to_string(month) + "-" + std::to_string(day));
    }
    return Date{ymd};
}

Date parse_date(std::string_view text) {
    if (text.size() != 10) {
        throw ValidationError("calendar", "expected YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    expect_char(text, 4, '-', text);
    expect_char(text, 7, '-', text);
    const int y = parse_int(text, 0, 4, text);
    const int m = parse_int(text, 5, 2, text);
    const int d = parse_int(text, 8, 2, text);
    return make_date(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

Instant parse_timestamp(std::string_view text) {
    if (text.size() < 16) {
        throw ValidationError("calendar", "expected ISO-8601 timestamp, got '" + std::string(text) + "'");
    }
    const Date date = parse_date(text.substr(0, 10));
    if (text[10] != 'T' && text[10] != ' ') {
        throw ValidationError("calendar", "malformed timestamp '" + std::string(text) + "'");
    }
    const int hh = parse_int(text, 11, 2, text);
    expect_char(text, 13, ':', text);
    const int mm = parse_int(text, 14, 2, text);
    int ss = 0;
    std::size_t pos = 16;
    if (pos < text.size() && text[pos] == ':') {
        ss = parse_int(text, 17, 2, text);
        pos = 19;
    }
    const std::string_view zone = text.substr(pos);
    if (!(zone.empty() || zone == "Z" || zone == "+00:00" || zone == "+0000")) {
        throw ValidationError("calendar", "timestamp is not UTC: '" + std::string(text) + "'");
    }
    if (hh > 23 || mm > 59 || ss > 59) {
        throw ValidationError("calendar", "time out of range in '" + std::string(text) + "'");
    }
    return Instant{date} + std::chrono::hours{hh} + std::chrono::minutes{mm} + std::chrono::seconds{ss};
}

std::string format_date(Date date) {
    const std::chrono::year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string format_timestamp(Instant instant) {
    const Date date = std::chrono::floor<std::chrono::days>(instant);
    const std::chrono::hh_mm_ss hms{instant - Instant{date}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "T%02d:%02d:%02dZ", static_cast<int>(hms.hours().count()),
                  static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
    return format_date(date) + buf;
}

std::string format_hour(Instant instant) {
    const Date date = std::chrono::floor<std::chrono::days>(instant);
    const std::chrono::hh_mm_ss hms{instant - Instant{date}};
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d:%02d", static_cast<int>(hms.hours().count()),
                  static_cast<int>(hms.minutes().count()));
    return buf;
}

bool is_weekday(Date date) {
    const std::chrono::weekday wd{date};
    return wd != std::chrono::Saturday && wd != std::chrono::Sunday;
}

}  // namespace harvol
