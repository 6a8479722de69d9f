#include "stocksent/calendar.hpp"

#include <array>
#include <cstdio>

#include "stocksent/errors.hpp"
#include "stocksent/util.hpp"

namespace stocksent {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> n = {31, 28, 31, 30, 31, 30,
                                              31, 31, 30, 31, 30, 31};
    if (m == 2) {
        bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return leap ? 29 : 28;
    }
    return n[m - 1];
}

// n-th (1-based) occurrence of weekday wd (0=Sun) in a month.
Date nth_weekday(int year, int month, int wd, int nth) {
    Date first{year, month, 1};
    int shift = (wd - day_of_week(first) + 7) % 7;
    return Date{year, month, 1 + shift + 7 * (nth - 1)};
}

Date last_weekday(int year, int month, int wd) {
    Date last{year, month, days_in_month(year, month)};
    int shift = (day_of_week(last) - wd + 7) % 7;
    return add_days(last, -shift);
}

// Holiday observed on the nearest weekday when it falls on a weekend.
Date observed(const Date& d) {
    int wd = day_of_week(d);
    if (wd == 0) return add_days(d, 1);   // Sunday -> Monday
    if (wd == 6) return add_days(d, -1);  // Saturday -> Friday
    return d;
}

std::vector<Date> us_equity_holidays(int year) {
    if (year < 2007)
        throw ConfigError("trading calendar rules start at 2007, got year " +
                          std::to_string(year));
    std::vector<Date> h;
    Date new_year = observed(Date{year, 1, 1});
    // A New Year observed on Dec 31 of the prior year does not close this one.
    if (new_year.year == year) h.push_back(new_year);
    h.push_back(nth_weekday(year, 1, 1, 3));   // MLK: 3rd Monday of January
    h.push_back(nth_weekday(year, 2, 1, 3));   // Washington: 3rd Monday of Feb
    h.push_back(add_days(easter_sunday(year), -2));  // Good Friday
    h.push_back(last_weekday(year, 5, 1));     // Memorial: last Monday of May
    h.push_back(observed(Date{year, 7, 4}));   // Independence Day
    h.push_back(nth_weekday(year, 9, 1, 1));   // Labor: 1st Monday of September
    h.push_back(nth_weekday(year, 11, 4, 4));  // Thanksgiving: 4th Thursday
    h.push_back(observed(Date{year, 12, 25})); // Christmas
    return h;
}

}  // namespace

std::int64_t days_from_civil(const Date& d) {
    // Howard Hinnant's algorithm.
    int y = d.year;
    unsigned m = static_cast<unsigned>(d.month);
    unsigned day = static_cast<unsigned>(d.day);
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int64_t>(era) * 146097 +
           static_cast<std::int64_t>(doe) - 719468;
}

Date civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned day = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
                static_cast<int>(day)};
}

int day_of_week(const Date& d) {
    std::int64_t z = days_from_civil(d);
    return static_cast<int>(((z % 7) + 11) % 7);  // 1970-01-01 was a Thursday
}

Date add_days(const Date& d, int n) { return civil_from_days(days_from_civil(d) + n); }

bool is_valid_date(const Date& d) {
    return d.month >= 1 && d.month <= 12 && d.day >= 1 &&
           d.day <= days_in_month(d.year, d.month);
}

Date parse_date(std::string_view s) {
    s = trim(s);
    if (s.size() != 10 || s[4] != '-' || s[7] != '-')
        throw ParseError("malformed date '" + std::string(s) + "' (want YYYY-MM-DD)");
    auto digits = [&](size_t pos, size_t n) {
        int v = 0;
        for (size_t i = pos; i < pos + n; ++i) {
            if (s[i] < '0' || s[i] > '9')
                throw ParseError("malformed date '" + std::string(s) + "'");
            v = v * 10 + (s[i] - '0');
        }
        return v;
    };
    Date d{digits(0, 4), digits(5, 2), digits(8, 2)};
    if (!is_valid_date(d))
        throw ParseError("invalid calendar date '" + std::string(s) + "'");
    return d;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

Instant parse_instant(std::string_view raw) {
    std::string_view s = trim(raw);
    // Optional " UTC" suffix means zero offset.
    bool utc_suffix = false;
    if (s.size() > 4 && (s.substr(s.size() - 4) == " UTC")) {
        utc_suffix = true;
        s = trim(s.substr(0, s.size() - 4));
    }
    if (s.size() < 19)
        throw ParseError("malformed timestamp '" + std::string(raw) + "'");
    Date d = parse_date(s.substr(0, 10));
    if (s[10] != 'T' && s[10] != ' ')
        throw ParseError("malformed timestamp '" + std::string(raw) + "'");
    auto two = [&](size_t pos) {
        if (s[pos] < '0' || s[pos] > '9' || s[pos + 1] < '0' || s[pos + 1] > '9')
            throw ParseError("malformed timestamp '" + std::string(raw) + "'");
        return (s[pos] - '0') * 10 + (s[pos + 1] - '0');
    };
    int hh = two(11), mm = two(14), ss = two(17);
    if (s[13] != ':' || s[16] != ':' || hh > 23 || mm > 59 || ss > 60)
        throw ParseError("malformed timestamp '" + std::string(raw) + "'");

    std::string_view rest = s.substr(19);
    int offset = 0;
    if (utc_suffix || rest.empty()) {
        if (!utc_suffix && rest.empty())
            throw ParseError("timestamp '" + std::string(raw) +
                             "' lacks an explicit UTC offset");
    } else if (rest == "Z" || rest == "z") {
        offset = 0;
    } else if ((rest[0] == '+' || rest[0] == '-') &&
               (rest.size() == 6 || rest.size() == 5)) {
        // +HH:MM or +HHMM
        int oh = (rest[1] - '0') * 10 + (rest[2] - '0');
        size_t mpos = rest.size() == 6 ? 4 : 3;
        int om = (rest[mpos] - '0') * 10 + (rest[mpos + 1] - '0');
        offset = (oh * 3600 + om * 60) * (rest[0] == '+' ? 1 : -1);
    } else {
        throw ParseError("malformed timestamp offset in '" + std::string(raw) + "'");
    }
    Instant local = days_from_civil(d) * kSecondsPerDay + hh * 3600 + mm * 60 + ss;
    return local - offset;
}

std::string format_instant(Instant t) {
    std::int64_t days = t >= 0 ? t / kSecondsPerDay
                               : (t - kSecondsPerDay + 1) / kSecondsPerDay;
    std::int64_t sod = t - days * kSecondsPerDay;
    Date d = civil_from_days(days);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", d.year,
                  d.month, d.day, static_cast<int>(sod / 3600),
                  static_cast<int>((sod / 60) % 60), static_cast<int>(sod % 60));
    return buf;
}

Date utc_date_of(Instant t) {
    std::int64_t days = t >= 0 ? t / kSecondsPerDay
                               : (t - kSecondsPerDay + 1) / kSecondsPerDay;
    return civil_from_days(days);
}

bool eastern_dst_at_16(const Date& d) {
    if (d.year < 2007)
        throw ConfigError("US Eastern DST rules implemented for 2007+, got " +
                          format_date(d));
    Date dst_start = nth_weekday(d.year, 3, 0, 2);  // second Sunday of March
    Date dst_end = nth_weekday(d.year, 11, 0, 1);   // first Sunday of November
    // Both transitions happen at 02:00 local, well before 16:00: the start
    // day is already on EDT at the close, the end day is back on EST.
    return d >= dst_start && d < dst_end;
}

Instant eastern_close_utc(const Date& d) {
    int offset = eastern_dst_at_16(d) ? -4 * 3600 : -5 * 3600;
    return days_from_civil(d) * kSecondsPerDay + 16 * 3600 - offset;
}

int eastern_offset_seconds(Instant t) {
    Date d = utc_date_of(t);
    if (d.year < 2007)
        throw ConfigError("US Eastern DST rules implemented for 2007+");
    // Transition instants in UTC: 02:00 EST = 07:00 UTC, 02:00 EDT = 06:00 UTC.
    Date dst_start = nth_weekday(d.year, 3, 0, 2);
    Date dst_end = nth_weekday(d.year, 11, 0, 1);
    Instant start_utc = days_from_civil(dst_start) * kSecondsPerDay + 7 * 3600;
    Instant end_utc = days_from_civil(dst_end) * kSecondsPerDay + 6 * 3600;
    return (t >= start_utc && t < end_utc) ? -4 * 3600 : -5 * 3600;
}

std::string month_name(int month) {
    static constexpr std::array<const char*, 12> names = {
        "January", "February", "March",     "April",   "May",      "June",
        "July",    "August",   "September", "October", "November", "December"};
    if (month < 1 || month > 12)
        throw ConfigError("month index out of range: " + std::to_string(month));
    return names[month - 1];
}

int parse_month(std::string_view name) {
    for (int m = 1; m <= 12; ++m) {
        if (iequals(name, month_name(m))) return m;
    }
    // Also accept a plain 1..12.
    try {
        long long v = parse_int(name);
        if (v >= 1 && v <= 12) return static_cast<int>(v);
    } catch (const ParseError&) {
    }
    throw ConfigError("unknown month '" + std::string(name) + "'");
}

Date easter_sunday(int year) {
    // Anonymous Gregorian computus.
    int a = year % 19;
    int b = year / 100, c = year % 100;
    int d = b / 4, e = b % 4;
    int f = (b + 8) / 25;
    int g = (b - f + 1) / 3;
    int h = (19 * a + b - d - g + 15) % 30;
    int i = c / 4, k = c % 4;
    int l = (32 + 2 * e + 2 * i - h - k) % 7;
    int m = (a + 11 * h + 22 * l) / 451;
    int month = (h + l - 7 * m + 114) / 31;
    int day = ((h + l - 7 * m + 114) % 31) + 1;
    return Date{year, month, day};
}

std::vector<Date> us_equity_trading_days(int year) {
    auto holidays = us_equity_holidays(year);
    auto is_holiday = [&](const Date& d) {
        for (const auto& h : holidays)
            if (h == d) return true;
        return false;
    };
    std::vector<Date> out;
    for (Date d{year, 1, 1}; d.year == year; d = add_days(d, 1)) {
        int wd = day_of_week(d);
        if (wd == 0 || wd == 6) continue;
        if (is_holiday(d)) continue;
        out.push_back(d);
    }
    return out;
}

bool is_us_equity_trading_day(const Date& d) {
    int wd = day_of_week(d);
    if (wd == 0 || wd == 6) return false;
    for (const auto& h : us_equity_holidays(d.year))
        if (h == d) return false;
    return true;
}

}  // namespace stocksent
