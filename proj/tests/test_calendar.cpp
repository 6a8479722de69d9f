#include <doctest.h>

#include "stocksent/calendar.hpp"
#include "stocksent/errors.hpp"

using namespace stocksent;

TEST_CASE("civil day conversions round-trip") {
    for (std::int64_t d = -200000; d <= 200000; d += 137) {
        CHECK(days_from_civil(civil_from_days(d)) == d);
    }
    CHECK(days_from_civil(Date{1970, 1, 1}) == 0);
    CHECK(day_of_week(Date{1970, 1, 1}) == 4);   // Thursday
    CHECK(day_of_week(Date{2017, 10, 18}) == 3); // Wednesday
}

TEST_CASE("date parsing and formatting") {
    Date d = parse_date("2017-01-03");
    CHECK(d == Date{2017, 1, 3});
    CHECK(format_date(d) == "2017-01-03");
    CHECK_THROWS_AS(parse_date("2017-13-01"), ParseError);
    CHECK_THROWS_AS(parse_date("2017-02-30"), ParseError);
    CHECK_THROWS_AS(parse_date("20170101"), ParseError);
}

TEST_CASE("instants parse ISO-8601 with explicit offsets") {
    Instant t = parse_instant("2017-10-18T13:51:24Z");
    CHECK(format_instant(t) == "2017-10-18T13:51:24Z");
    CHECK(parse_instant("2017-10-18 13:51:24+00:00") == t);
    CHECK(parse_instant("2017-10-18 13:51:24 UTC") == t);
    CHECK(parse_instant("2017-10-18 09:51:24-04:00") == t);
    CHECK_THROWS_AS(parse_instant("2017-10-18 13:51:24"), ParseError);
    CHECK_THROWS_AS(parse_instant("not a time"), ParseError);
}

TEST_CASE("US Eastern close instants honor daylight saving") {
    // October is summer time: 16:00 EDT = 20:00 UTC.
    CHECK(format_instant(eastern_close_utc(Date{2017, 10, 18})) ==
          "2017-10-18T20:00:00Z");
    // January is standard time: 16:00 EST = 21:00 UTC.
    CHECK(format_instant(eastern_close_utc(Date{2017, 1, 5})) ==
          "2017-01-05T21:00:00Z");
    // 2017 transitions: March 12 forward, November 5 back.
    CHECK(eastern_dst_at_16(Date{2017, 3, 11}) == false);
    CHECK(eastern_dst_at_16(Date{2017, 3, 12}) == true);
    CHECK(eastern_dst_at_16(Date{2017, 11, 4}) == true);
    CHECK(eastern_dst_at_16(Date{2017, 11, 5}) == false);
    CHECK_THROWS_AS(eastern_close_utc(Date{1999, 1, 4}), ConfigError);
}

TEST_CASE("eastern offset at arbitrary instants") {
    CHECK(eastern_offset_seconds(parse_instant("2017-07-01T12:00:00Z")) ==
          -4 * 3600);
    CHECK(eastern_offset_seconds(parse_instant("2017-01-01T12:00:00Z")) ==
          -5 * 3600);
    // 2017-03-12: transition at 07:00 UTC.
    CHECK(eastern_offset_seconds(parse_instant("2017-03-12T06:59:59Z")) ==
          -5 * 3600);
    CHECK(eastern_offset_seconds(parse_instant("2017-03-12T07:00:00Z")) ==
          -4 * 3600);
}

TEST_CASE("2017 trading calendar matches the US exchange schedule") {
    auto days = us_equity_trading_days(2017);
    CHECK(days.size() == 251);
    int per_month[13] = {0};
    for (const auto& d : days) per_month[d.month]++;
    const int expected[13] = {0, 20, 19, 23, 19, 22, 22, 20, 23, 20, 22, 21, 20};
    for (int m = 1; m <= 12; ++m) CHECK(per_month[m] == expected[m]);
    CHECK(days.front() == Date{2017, 1, 3});
    CHECK(days.back() == Date{2017, 12, 29});
    // Good Friday 2017 (April 14) is closed.
    CHECK_FALSE(is_us_equity_trading_day(Date{2017, 4, 14}));
    CHECK(is_us_equity_trading_day(Date{2017, 4, 13}));
    CHECK(easter_sunday(2017) == Date{2017, 4, 16});
}

TEST_CASE("month names") {
    CHECK(month_name(4) == "April");
    CHECK(parse_month("april") == 4);
    CHECK(parse_month("September") == 9);
    CHECK(parse_month("7") == 7);
    CHECK_THROWS_AS(parse_month("Smarch"), ConfigError);
}
