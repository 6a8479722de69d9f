#include "stocksent/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "stocksent/csv.hpp"
#include "stocksent/errors.hpp"
#include "stocksent/util.hpp"

namespace stocksent {

using nlohmann::json;

namespace {

// Column lookup by header name; throws if the header is missing a column.
size_t column_index(const CsvRow& header, const std::string& name) {
    for (size_t i = 0; i < header.fields.size(); ++i) {
        if (iequals(trim(header.fields[i]), name)) return i;
    }
    throw ParseError("CSV header lacks column '" + name + "'", header.line);
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
    std::string text = read_file(p);
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) lines.push_back(std::move(cur));
    return lines;
}

json parse_json_line(const std::string& line, long lineno) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
        throw ParseError("malformed JSON line", lineno);
    return j;
}

std::string require_string(const json& j, const char* key, long lineno) {
    if (!j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty())
        throw ParseError(std::string("missing or empty field '") + key + "'", lineno);
    return j[key].get<std::string>();
}

}  // namespace

TableFormat format_from_extension(const std::filesystem::path& p) {
    auto ext = to_lower_ascii(p.extension().string());
    if (ext == ".csv") return TableFormat::csv;
    if (ext == ".jsonl" || ext == ".ndjson") return TableFormat::jsonl;
    throw ConfigError("cannot infer table format from '" + p.string() + "'");
}

std::vector<PriceBar> load_prices(const std::filesystem::path& p, TableFormat fmt) {
    if (!std::filesystem::exists(p)) throw IoError("price file not found: " + p.string());
    std::vector<PriceBar> bars;

    if (fmt == TableFormat::csv) {
        auto rows = parse_csv(read_file(p));
        if (rows.empty()) return bars;
        const CsvRow& header = rows.front();
        size_t ci = column_index(header, "company");
        size_t di = column_index(header, "date");
        size_t pi = column_index(header, "adjusted_close");
        for (size_t r = 1; r < rows.size(); ++r) {
            const CsvRow& row = rows[r];
            if (row.fields.size() <= std::max({ci, di, pi}))
                throw ParseError("price row has too few fields", row.line);
            PriceBar bar;
            bar.company = std::string(trim(row.fields[ci]));
            try {
                bar.date = parse_date(row.fields[di]);
                bar.adjusted_close = parse_double(row.fields[pi]);
            } catch (const ParseError& e) {
                throw ParseError(std::string("bad price row: ") + e.what(), row.line);
            }
            if (bar.company.empty())
                throw ParseError("price row lacks a company", row.line);
            if (!(bar.adjusted_close > 0))
                throw ParseError("adjusted_close must be positive", row.line);
            bars.push_back(std::move(bar));
        }
    } else {
        auto lines = read_lines(p);
        for (size_t i = 0; i < lines.size(); ++i) {
            if (trim(lines[i]).empty()) continue;
            long lineno = static_cast<long>(i + 1);
            json j = parse_json_line(lines[i], lineno);
            PriceBar bar;
            bar.company = require_string(j, "company", lineno);
            bar.date = parse_date(require_string(j, "date", lineno));
            if (!j.contains("adjusted_close") || !j["adjusted_close"].is_number())
                throw ParseError("missing numeric 'adjusted_close'", lineno);
            bar.adjusted_close = j["adjusted_close"].get<double>();
            if (!(bar.adjusted_close > 0))
                throw ParseError("adjusted_close must be positive", lineno);
            bars.push_back(std::move(bar));
        }
    }

    std::sort(bars.begin(), bars.end(), [](const PriceBar& a, const PriceBar& b) {
        return std::tie(a.company, a.date) < std::tie(b.company, b.date);
    });
    for (size_t i = 1; i < bars.size(); ++i) {
        if (bars[i].company == bars[i - 1].company && bars[i].date == bars[i - 1].date)
            throw IntegrityError("duplicate price bar for (" + bars[i].company +
                                 ", " + format_date(bars[i].date) + ")");
    }
    return bars;
}

std::vector<RawMessage> load_messages(const std::filesystem::path& p, TableFormat fmt) {
    if (!std::filesystem::exists(p))
        throw IoError("message file not found: " + p.string());
    std::vector<RawMessage> msgs;

    if (fmt == TableFormat::jsonl) {
        auto lines = read_lines(p);
        for (size_t i = 0; i < lines.size(); ++i) {
            if (trim(lines[i]).empty()) continue;
            long lineno = static_cast<long>(i + 1);
            json j = parse_json_line(lines[i], lineno);
            RawMessage m;
            m.id = require_string(j, "id", lineno);
            m.timestamp_utc = parse_instant(require_string(j, "timestamp_utc", lineno));
            m.ticker = require_string(j, "ticker", lineno);
            m.body = require_string(j, "body", lineno);
            msgs.push_back(std::move(m));
        }
    } else {
        auto rows = parse_csv(read_file(p));
        if (rows.empty()) return msgs;
        const CsvRow& header = rows.front();
        size_t ii = column_index(header, "id");
        size_t ti = column_index(header, "timestamp_utc");
        size_t ki = column_index(header, "ticker");
        size_t bi = column_index(header, "body");
        for (size_t r = 1; r < rows.size(); ++r) {
            const CsvRow& row = rows[r];
            if (row.fields.size() <= std::max({ii, ti, ki, bi}))
                throw ParseError("message row has too few fields", row.line);
            RawMessage m;
            m.id = std::string(trim(row.fields[ii]));
            m.ticker = std::string(trim(row.fields[ki]));
            m.body = row.fields[bi];
            if (m.id.empty() || m.body.empty())
                throw ParseError("message row lacks id or body", row.line);
            try {
                m.timestamp_utc = parse_instant(row.fields[ti]);
            } catch (const ParseError& e) {
                throw ParseError(std::string("bad message row: ") + e.what(), row.line);
            }
            msgs.push_back(std::move(m));
        }
    }

    std::stable_sort(msgs.begin(), msgs.end(),
                     [](const RawMessage& a, const RawMessage& b) {
                         return std::tie(a.timestamp_utc, a.id) <
                                std::tie(b.timestamp_utc, b.id);
                     });
    std::set<std::string_view> ids;
    for (const auto& m : msgs) {
        if (!ids.insert(m.id).second)
            throw IntegrityError("duplicate message id '" + m.id + "'");
    }
    return msgs;
}

void write_prices(const std::filesystem::path& p, std::span<const PriceBar> bars,
                  TableFormat fmt) {
    std::ostringstream out;
    if (fmt == TableFormat::csv) {
        out << "company,date,adjusted_close\n";
        for (const auto& b : bars) {
            out << csv_join({b.company, format_date(b.date),
                             format_double(b.adjusted_close)})
                << "\n";
        }
    } else {
        for (const auto& b : bars) {
            json j;
            j["company"] = b.company;
            j["date"] = format_date(b.date);
            j["adjusted_close"] = b.adjusted_close;
            out << j.dump() << "\n";
        }
    }
    write_file(p, out.str());
}

void write_messages(const std::filesystem::path& p,
                    std::span<const RawMessage> msgs, TableFormat fmt) {
    std::ostringstream out;
    if (fmt == TableFormat::jsonl) {
        for (const auto& m : msgs) {
            json j;
            j["id"] = m.id;
            j["timestamp_utc"] = format_instant(m.timestamp_utc);
            j["ticker"] = m.ticker;
            j["body"] = m.body;
            out << j.dump() << "\n";
        }
    } else {
        out << "id,timestamp_utc,ticker,body\n";
        for (const auto& m : msgs) {
            out << csv_join({m.id, format_instant(m.timestamp_utc), m.ticker, m.body})
                << "\n";
        }
    }
    write_file(p, out.str());
}

std::vector<MovementLabel> derive_labels(std::span<const PriceBar> prices) {
    if (prices.size() < 2)
        throw InsufficientDataError("need at least 2 price bars to derive labels");
    std::vector<MovementLabel> labels;
    labels.reserve(prices.size() - 1);
    for (size_t i = 1; i < prices.size(); ++i) {
        if (prices[i].company != prices[i - 1].company)
            throw IntegrityError("derive_labels expects a single company series");
        MovementLabel l;
        l.company = prices[i].company;
        l.date = prices[i].date;
        l.up = prices[i].adjusted_close > prices[i - 1].adjusted_close ? 1 : 0;
        labels.push_back(std::move(l));
    }
    return labels;
}

}  // namespace stocksent
