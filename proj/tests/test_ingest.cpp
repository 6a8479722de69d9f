#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "stocksent/errors.hpp"
#include "stocksent/ingest.hpp"
#include "stocksent/util.hpp"

using namespace stocksent;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "stocksent_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("single price row round-trips") {
    auto p = temp_file("prices_one.csv");
    write_file(p, "company,date,adjusted_close\nApp,2017-01-03,27.25\n");
    auto bars = load_prices(p, TableFormat::csv);
    REQUIRE(bars.size() == 1);
    CHECK(bars[0].company == "App");
    CHECK(bars[0].date == Date{2017, 1, 3});
    CHECK(bars[0].adjusted_close == doctest::Approx(27.25));
}

TEST_CASE("duplicate (company, date) price rows are rejected") {
    auto p = temp_file("prices_dup.csv");
    write_file(p,
               "company,date,adjusted_close\n"
               "App,2017-01-03,27.25\n"
               "App,2017-01-03,27.30\n");
    CHECK_THROWS_AS(load_prices(p, TableFormat::csv), IntegrityError);
}

TEST_CASE("two 251-day series make 502 bars") {
    std::string csv = "company,date,adjusted_close\n";
    auto days = us_equity_trading_days(2017);
    REQUIRE(days.size() == 251);
    for (const auto& d : days) csv += "AAPL," + format_date(d) + ",100.0\n";
    for (const auto& d : days) csv += "TSLA," + format_date(d) + ",200.0\n";
    auto p = temp_file("prices_502.csv");
    write_file(p, csv);
    CHECK(load_prices(p, TableFormat::csv).size() == 502);
}

TEST_CASE("malformed price rows carry a row number") {
    auto p = temp_file("prices_bad.csv");
    write_file(p, "company,date,adjusted_close\nApp,2017-01-03,not_a_number\n");
    CHECK_THROWS_WITH_AS(load_prices(p, TableFormat::csv),
                         doctest::Contains("row 2"), ParseError);
    write_file(p, "company,date,adjusted_close\nApp,2017-01-03,-5\n");
    CHECK_THROWS_AS(load_prices(p, TableFormat::csv), ParseError);
}

TEST_CASE("prices load from jsonl too") {
    auto p = temp_file("prices.jsonl");
    write_file(p,
               "{\"company\":\"App\",\"date\":\"2017-01-04\",\"adjusted_close\":27.5}\n"
               "{\"company\":\"App\",\"date\":\"2017-01-03\",\"adjusted_close\":27.2}\n");
    auto bars = load_prices(p, TableFormat::jsonl);
    REQUIRE(bars.size() == 2);
    CHECK(bars[0].date == Date{2017, 1, 3});  // sorted
}

TEST_CASE("derive_labels follows the strict-increase rule") {
    auto bar = [](const char* d, double c) {
        return PriceBar{"App", parse_date(d), c};
    };
    SUBCASE("strict increase is up") {
        std::vector<PriceBar> ps = {bar("2017-01-03", 1.0), bar("2017-01-04", 2.0)};
        auto labels = derive_labels(ps);
        REQUIRE(labels.size() == 1);
        CHECK(labels[0].up == 1);
        CHECK(labels[0].date == Date{2017, 1, 4});
    }
    SUBCASE("a flat day is down") {
        std::vector<PriceBar> ps = {bar("2017-01-03", 2.0), bar("2017-01-04", 2.0)};
        CHECK(derive_labels(ps)[0].up == 0);
    }
    SUBCASE("hand-evaluated sequence") {
        std::vector<PriceBar> ps = {bar("2017-01-03", 3.0), bar("2017-01-04", 2.5),
                                    bar("2017-01-05", 2.6), bar("2017-01-06", 2.6)};
        auto labels = derive_labels(ps);
        REQUIRE(labels.size() == 3);
        CHECK(labels[0].up == 0);
        CHECK(labels[1].up == 1);
        CHECK(labels[2].up == 0);
    }
    SUBCASE("fewer than two bars is an error") {
        std::vector<PriceBar> ps = {bar("2017-01-03", 3.0)};
        CHECK_THROWS_AS(derive_labels(ps), InsufficientDataError);
    }
}

TEST_CASE("label properties on random series") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> price(1.0, 100.0);
    auto days = us_equity_trading_days(2017);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<PriceBar> ps;
        size_t n = 2 + rng() % 60;
        for (size_t i = 0; i < n; ++i)
            ps.push_back(PriceBar{"X", days[i], price(rng)});
        auto labels = derive_labels(ps);
        CHECK(labels.size() == ps.size() - 1);

        // up/down counts partition the labels
        size_t ups = 0, downs = 0;
        for (const auto& l : labels) (l.up ? ups : downs)++;
        CHECK(ups + downs == ps.size() - 1);

        // scale invariance
        double scale = 0.25 + 3.0 * std::generate_canonical<double, 53>(rng);
        std::vector<PriceBar> scaled = ps;
        for (auto& b : scaled) b.adjusted_close *= scale;
        auto labels2 = derive_labels(scaled);
        for (size_t i = 0; i < labels.size(); ++i)
            CHECK(labels[i].up == labels2[i].up);
    }
}

TEST_CASE("messages load, sort and reject duplicates") {
    auto p = temp_file("msgs.jsonl");
    SUBCASE("paper-style timestamp is preserved") {
        write_file(p,
                   R"({"id":"a","timestamp_utc":"2017-10-18T13:51:24Z","ticker":"AAPL","body":"hello"})"
                   "\n");
        auto msgs = load_messages(p, TableFormat::jsonl);
        REQUIRE(msgs.size() == 1);
        CHECK(format_instant(msgs[0].timestamp_utc) == "2017-10-18T13:51:24Z");
    }
    SUBCASE("empty file gives an empty collection") {
        write_file(p, "");
        CHECK(load_messages(p, TableFormat::jsonl).empty());
    }
    SUBCASE("out-of-order rows come back sorted by timestamp") {
        write_file(p,
                   R"({"id":"b","timestamp_utc":"2017-10-18T14:00:00Z","ticker":"AAPL","body":"later"})"
                   "\n"
                   R"({"id":"a","timestamp_utc":"2017-10-18T13:00:00Z","ticker":"AAPL","body":"earlier"})"
                   "\n");
        auto msgs = load_messages(p, TableFormat::jsonl);
        REQUIRE(msgs.size() == 2);
        CHECK(msgs[0].id == "a");
        CHECK(msgs[1].id == "b");
    }
    SUBCASE("missing body is a parse error") {
        write_file(p, R"({"id":"a","timestamp_utc":"2017-10-18T13:00:00Z","ticker":"AAPL"})"
                      "\n");
        CHECK_THROWS_AS(load_messages(p, TableFormat::jsonl), ParseError);
    }
    SUBCASE("duplicate ids are an integrity error") {
        write_file(p,
                   R"({"id":"a","timestamp_utc":"2017-10-18T13:00:00Z","ticker":"AAPL","body":"x"})"
                   "\n"
                   R"({"id":"a","timestamp_utc":"2017-10-18T14:00:00Z","ticker":"AAPL","body":"y"})"
                   "\n");
        CHECK_THROWS_AS(load_messages(p, TableFormat::jsonl), IntegrityError);
    }
}

TEST_CASE("load-write-load is the identity") {
    std::mt19937_64 rng(11);
    std::vector<RawMessage> msgs;
    for (int i = 0; i < 50; ++i) {
        RawMessage m;
        m.id = "id" + std::to_string(i);
        m.timestamp_utc = 1500000000 + static_cast<Instant>(rng() % 10000000);
        m.ticker = i % 2 ? "AAPL" : "TSLA";
        m.body = "body with, comma \"quote\" and number " + std::to_string(rng() % 100);
        msgs.push_back(std::move(m));
    }
    for (auto fmt : {TableFormat::jsonl, TableFormat::csv}) {
        auto p = temp_file(fmt == TableFormat::jsonl ? "rt.jsonl" : "rt.csv");
        write_messages(p, msgs, fmt);
        auto loaded = load_messages(p, fmt);
        write_messages(p, loaded, fmt);
        auto again = load_messages(p, fmt);
        CHECK(loaded == again);
        CHECK(loaded.size() == msgs.size());
    }

    std::vector<PriceBar> bars;
    auto days = us_equity_trading_days(2017);
    for (int i = 0; i < 30; ++i)
        bars.push_back(PriceBar{"AAPL", days[static_cast<size_t>(i)],
                                50.0 + static_cast<double>(rng() % 1000) / 7.0});
    for (auto fmt : {TableFormat::jsonl, TableFormat::csv}) {
        auto p = temp_file(fmt == TableFormat::jsonl ? "rtp.jsonl" : "rtp.csv");
        write_prices(p, bars, fmt);
        auto loaded = load_prices(p, fmt);
        CHECK(loaded == bars);
    }
}
