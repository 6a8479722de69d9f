#include "stocksent/featurize.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <omp.h>

#include "stocksent/csv.hpp"
#include "stocksent/errors.hpp"
#include "stocksent/util.hpp"

namespace stocksent {

TradingWindows::TradingWindows(std::span<const Date> trading_days)
    : days_(trading_days.begin(), trading_days.end()) {
    if (days_.empty()) throw ConfigError("trading-day list is empty");
    if (!std::is_sorted(days_.begin(), days_.end()))
        throw ConfigError("trading-day list must be sorted");
    closes_.reserve(days_.size());
    for (const auto& d : days_) closes_.push_back(eastern_close_utc(d));
    first_boundary_ = eastern_close_utc(add_days(days_.front(), -1));
}

std::optional<size_t> TradingWindows::assign_index(Instant ts) const {
    if (ts <= first_boundary_ || ts > closes_.back()) return std::nullopt;
    auto it = std::lower_bound(closes_.begin(), closes_.end(), ts);
    return static_cast<size_t>(it - closes_.begin());
}

std::optional<Date> TradingWindows::assign(Instant ts) const {
    auto idx = assign_index(ts);
    if (!idx) return std::nullopt;
    return days_[*idx];
}

std::optional<Date> window_assign(Instant ts, std::span<const Date> trading_days) {
    return TradingWindows(trading_days).assign(ts);
}

DailyFeatures aggregate_day(const std::string& company, const Date& day,
                            std::span<const ScoredMessage> records) {
    DailyFeatures f;
    f.company = company;
    f.date = day;
    if (records.empty()) return f;  // neutral zero row

    long long class_sum = 0;
    int adv = 0, dis = 0;
    for (const auto& sm : records) {
        class_sum += classify_sentiment(sm.record);  // throws on non-parsed
        if (sm.record.has_advantage) {
            switch (classify_advantage(sm.record)) {
                case AdvantageCall::advantage: ++adv; break;
                case AdvantageCall::disadvantage: ++dis; break;
                case AdvantageCall::equal: break;
            }
        }
    }
    const auto n = static_cast<double>(records.size());
    f.msg_count = static_cast<int>(records.size());
    f.avg_sentiment = static_cast<double>(class_sum) / n - 3.0;
    f.adv_count = adv;
    f.dis_count = dis;
    f.avg_advantage = static_cast<double>(adv - dis) / n;
    return f;
}

namespace {

std::vector<ScoredMessage> parsed_sorted(std::span<const ScoredMessage> msgs) {
    std::vector<ScoredMessage> kept;
    kept.reserve(msgs.size());
    for (const auto& m : msgs) {
        if (m.record.status == ParseStatus::parsed) kept.push_back(m);
    }
    std::stable_sort(kept.begin(), kept.end(),
                     [](const ScoredMessage& a, const ScoredMessage& b) {
                         return std::tie(a.timestamp_utc, a.record.message_id) <
                                std::tie(b.timestamp_utc, b.record.message_id);
                     });
    return kept;
}

}  // namespace

std::vector<DailyFeatures> daily_features(const std::string& company,
                                          std::span<const ScoredMessage> msgs,
                                          std::span<const Date> trading_days,
                                          std::span<const Date> feature_dates,
                                          int threads) {
    TradingWindows windows(trading_days);
    auto kept = parsed_sorted(msgs);

    // Window slice per feature date via binary search on the sorted instants,
    // then independent per-day aggregation.
    std::vector<Instant> instants(kept.size());
    for (size_t i = 0; i < kept.size(); ++i) instants[i] = kept[i].timestamp_utc;

    // Resolve every feature date up front; exceptions stay out of the
    // parallel region.
    std::vector<size_t> day_index(feature_dates.size());
    for (size_t i = 0; i < feature_dates.size(); ++i) {
        auto it = std::lower_bound(windows.days().begin(), windows.days().end(),
                                   feature_dates[i]);
        if (it == windows.days().end() || *it != feature_dates[i])
            throw ConfigError("feature date " + format_date(feature_dates[i]) +
                              " is not a trading day");
        day_index[i] = static_cast<size_t>(it - windows.days().begin());
    }

    std::vector<DailyFeatures> out(feature_dates.size());
    int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nthreads)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(feature_dates.size());
         ++i) {
        size_t idx = day_index[i];
        Instant lo = idx == 0 ? windows.first_boundary() : windows.close_of(idx - 1);
        Instant hi = windows.close_of(idx);
        auto begin = std::upper_bound(instants.begin(), instants.end(), lo);
        auto end = std::upper_bound(instants.begin(), instants.end(), hi);
        out[i] = aggregate_day(
            company, feature_dates[i],
            std::span<const ScoredMessage>(kept.data() + (begin - instants.begin()),
                                           static_cast<size_t>(end - begin)));
    }
    return out;
}

namespace serial {
std::vector<DailyFeatures> daily_features(const std::string& company,
                                          std::span<const ScoredMessage> msgs,
                                          std::span<const Date> trading_days,
                                          std::span<const Date> feature_dates) {
    TradingWindows windows(trading_days);
    auto kept = parsed_sorted(msgs);

    // Reference path: walk every message, bucket by assigned day.
    std::map<Date, std::vector<ScoredMessage>> buckets;
    for (const auto& m : kept) {
        auto day = windows.assign(m.timestamp_utc);
        if (day) buckets[*day].push_back(m);
    }
    std::vector<DailyFeatures> out;
    out.reserve(feature_dates.size());
    for (const auto& day : feature_dates) {
        auto it = buckets.find(day);
        if (it == buckets.end()) {
            out.push_back(aggregate_day(company, day, {}));
        } else {
            out.push_back(aggregate_day(company, day, it->second));
        }
    }
    return out;
}
}  // namespace serial

AdvantageCounts count_advantage_calls(const std::string& company,
                                      std::span<const SentimentRecord> records) {
    AdvantageCounts c;
    c.company = company;
    for (const auto& r : records) {
        if (r.status != ParseStatus::parsed || !r.has_advantage) continue;
        switch (classify_advantage(r)) {
            case AdvantageCall::advantage: ++c.advantage; break;
            case AdvantageCall::disadvantage: ++c.disadvantage; break;
            case AdvantageCall::equal: ++c.equal; break;
        }
    }
    return c;
}

void write_features_csv(const std::filesystem::path& p,
                        std::span<const DailyFeatures> rows) {
    std::ostringstream out;
    out << "company,date,avg_sentiment,adv_count,dis_count,msg_count,avg_advantage\n";
    for (const auto& f : rows) {
        out << csv_join({f.company, format_date(f.date),
                         format_double(f.avg_sentiment), std::to_string(f.adv_count),
                         std::to_string(f.dis_count), std::to_string(f.msg_count),
                         format_double(f.avg_advantage)})
            << "\n";
    }
    write_file(p, out.str());
}

std::vector<DailyFeatures> load_features_csv(const std::filesystem::path& p) {
    auto rows = parse_csv(read_file(p));
    std::vector<DailyFeatures> out;
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.fields.size() != 7)
            throw ParseError("feature row needs 7 fields", r.line);
        DailyFeatures f;
        f.company = r.fields[0];
        f.date = parse_date(r.fields[1]);
        f.avg_sentiment = parse_double(r.fields[2]);
        f.adv_count = static_cast<int>(parse_int(r.fields[3]));
        f.dis_count = static_cast<int>(parse_int(r.fields[4]));
        f.msg_count = static_cast<int>(parse_int(r.fields[5]));
        f.avg_advantage = parse_double(r.fields[6]);
        out.push_back(std::move(f));
    }
    return out;
}

DesignMatrix stack(std::span<const CompanyDaily> companies, RegressorSet set) {
    if (companies.empty()) throw ConfigError("stack needs at least one company");
    for (const auto& c : companies) {
        if (c.features.size() != c.labels.size())
            throw AlignmentError("company " + c.company + " has " +
                                 std::to_string(c.features.size()) + " feature rows but " +
                                 std::to_string(c.labels.size()) + " labels");
        for (size_t i = 0; i < c.features.size(); ++i) {
            if (c.features[i].date != c.labels[i].date)
                throw AlignmentError(
                    "company " + c.company + ": feature date " +
                    format_date(c.features[i].date) + " does not match label date " +
                    format_date(c.labels[i].date));
        }
    }

    const size_t ncomp = companies.size();
    const int per_company = set == RegressorSet::bert ? 1 : 3;

    DesignMatrix dm;
    dm.column_names.push_back("intercept");
    static constexpr std::array<const char*, 3> prefixes = {"s_", "a_", "d_"};
    for (int r = 0; r < per_company; ++r) {
        for (const auto& c : companies)
            dm.column_names.push_back(prefixes[r] + c.company);
    }

    size_t total_rows = 0;
    for (const auto& c : companies) total_rows += c.features.size();
    dm.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(total_rows),
                                 static_cast<Eigen::Index>(dm.column_names.size()));
    dm.y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total_rows));
    dm.row_company.reserve(total_rows);
    dm.row_date.reserve(total_rows);

    // Row blocks in reverse input order: the first company listed occupies
    // the bottom block, so its regressor columns are zero on top.
    Eigen::Index row = 0;
    for (size_t ci = ncomp; ci-- > 0;) {
        const auto& c = companies[ci];
        for (size_t i = 0; i < c.features.size(); ++i, ++row) {
            const auto& f = c.features[i];
            dm.X(row, 0) = 1.0;
            Eigen::Index scol = 1 + static_cast<Eigen::Index>(ci);
            dm.X(row, scol) = f.avg_sentiment;
            if (set == RegressorSet::gpt) {
                dm.X(row, scol + static_cast<Eigen::Index>(ncomp)) = f.adv_count;
                dm.X(row, scol + 2 * static_cast<Eigen::Index>(ncomp)) = f.dis_count;
            }
            dm.y(row) = c.labels[i].up;
            dm.row_company.push_back(c.company);
            dm.row_date.push_back(f.date);
        }
    }
    return dm;
}

DesignMatrix load_design_csv(const std::filesystem::path& p) {
    auto rows = parse_csv(read_file(p));
    if (rows.empty()) throw ParseError("design file is empty");
    const auto& header = rows[0].fields;
    if (header.size() < 4 || header[0] != "company" || header[1] != "date" ||
        header[2] != "label")
        throw ParseError("design file header must start with company,date,label",
                         rows[0].line);
    DesignMatrix dm;
    dm.column_names.assign(header.begin() + 3, header.end());
    const size_t k = dm.column_names.size();
    const size_t n = rows.size() - 1;
    dm.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                 static_cast<Eigen::Index>(k));
    dm.y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (size_t r = 0; r < n; ++r) {
        const auto& row = rows[r + 1];
        if (row.fields.size() != k + 3)
            throw ParseError("design row has wrong field count", row.line);
        dm.row_company.push_back(row.fields[0]);
        dm.row_date.push_back(parse_date(row.fields[1]));
        dm.y(static_cast<Eigen::Index>(r)) = parse_double(row.fields[2]);
        for (size_t c = 0; c < k; ++c)
            dm.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_double(row.fields[c + 3]);
    }
    return dm;
}

void write_design_csv(const std::filesystem::path& p, const DesignMatrix& dm) {
    std::ostringstream out;
    std::vector<std::string> header = {"company", "date", "label"};
    header.insert(header.end(), dm.column_names.begin(), dm.column_names.end());
    out << csv_join(header) << "\n";
    for (Eigen::Index r = 0; r < dm.X.rows(); ++r) {
        std::vector<std::string> fields = {dm.row_company[static_cast<size_t>(r)],
                                           format_date(dm.row_date[static_cast<size_t>(r)]),
                                           format_double(dm.y(r))};
        for (Eigen::Index c = 0; c < dm.X.cols(); ++c)
            fields.push_back(format_double(dm.X(r, c)));
        out << csv_join(fields) << "\n";
    }
    write_file(p, out.str());
}

}  // namespace stocksent
