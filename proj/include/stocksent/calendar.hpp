#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace stocksent {

/// Calendar date (proleptic Gregorian). Small value type, ordered.
struct Date {
    int year = 0;
    int month = 0;  // 1..12
    int day = 0;    // 1..31

    auto operator<=>(const Date&) const = default;
};

/// UTC instant with second precision (unix epoch seconds).
using Instant = std::int64_t;

// Civil <-> day-count conversions (days since 1970-01-01).
std::int64_t days_from_civil(const Date& d);
Date civil_from_days(std::int64_t days);
int day_of_week(const Date& d);  // 0 = Sunday .. 6 = Saturday
Date add_days(const Date& d, int n);

bool is_valid_date(const Date& d);

// "YYYY-MM-DD"
Date parse_date(std::string_view s);
std::string format_date(const Date& d);

// ISO-8601 with an explicit offset: "2017-10-18T13:51:24Z",
// "2017-10-18 13:51:24+00:00", "... -05:00". A trailing " UTC" is accepted
// as a zero offset.
Instant parse_instant(std::string_view s);
std::string format_instant(Instant t);  // always "YYYY-MM-DDTHH:MM:SSZ"

Date utc_date_of(Instant t);

// US Eastern time under the post-2007 daylight-saving rules (second Sunday
// of March 02:00 local to first Sunday of November 02:00 local). Years
// before 2007 are rejected: the rule set would be wrong for them.
bool eastern_dst_at_16(const Date& d);
Instant eastern_close_utc(const Date& d);  // 16:00 ET on d as a UTC instant
int eastern_offset_seconds(Instant t);     // -5h (EST) or -4h (EDT)

// Month helpers for split plans.
std::string month_name(int month);          // 1 -> "January"
int parse_month(std::string_view name);     // case-insensitive, throws

// US equity trading days: weekdays minus the exchange holidays (New Year,
// MLK, Washington, Good Friday, Memorial, Independence, Labor, Thanksgiving,
// Christmas, with weekend observance shifts). Valid for 2007 onward; no
// special one-off closures are modeled.
std::vector<Date> us_equity_trading_days(int year);
bool is_us_equity_trading_day(const Date& d);
Date easter_sunday(int year);

}  // namespace stocksent
