#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stocksent/ingest.hpp"
#include "stocksent/respparse.hpp"

namespace stocksent {

/// Daily aggregate of message-level records for one company.
struct DailyFeatures {
    std::string company;
    Date date;
    double avg_sentiment = 0.0;  // mean sentiment class - 3, in [-2, 2]
    int adv_count = 0;           // messages with P(advantage) > 0.5
    int dis_count = 0;           // messages with P(advantage) < 0.5
    int msg_count = 0;
    double avg_advantage = 0.0;  // (adv_count - dis_count) / msg_count, in [-1, 1]

    bool operator==(const DailyFeatures&) const = default;
};

// Trading-day windows. A message belongs to trading day t when its instant
// lies in (16:00 ET of the previous trading day, 16:00 ET of t]; the first
// listed day opens at 16:00 ET of the calendar day before it. Anything at or
// before the first boundary, or after the last close, is out of range.
class TradingWindows {
public:
    explicit TradingWindows(std::span<const Date> trading_days);

    std::optional<Date> assign(Instant ts) const;
    std::optional<size_t> assign_index(Instant ts) const;

    std::span<const Date> days() const { return days_; }
    Instant close_of(size_t idx) const { return closes_[idx]; }
    Instant first_boundary() const { return first_boundary_; }

private:
    std::vector<Date> days_;
    std::vector<Instant> closes_;
    Instant first_boundary_ = 0;
};

std::optional<Date> window_assign(Instant ts, std::span<const Date> trading_days);

/// A record joined with its message timestamp (the aggregation unit).
struct ScoredMessage {
    Instant timestamp_utc = 0;
    SentimentRecord record;
};

/// Aggregates the parsed records of one window. Empty windows yield the
/// neutral zero row. Throws if a record is not parsed-status.
DailyFeatures aggregate_day(const std::string& company, const Date& day,
                            std::span<const ScoredMessage> records);

/// Features for every date in `feature_dates` (a subset of `trading_days`).
/// `msgs` must be sorted by (timestamp, message_id); non-parsed records and
/// out-of-range messages are ignored.
std::vector<DailyFeatures> daily_features(const std::string& company,
                                          std::span<const ScoredMessage> msgs,
                                          std::span<const Date> trading_days,
                                          std::span<const Date> feature_dates,
                                          int threads = 0);
namespace serial {
std::vector<DailyFeatures> daily_features(const std::string& company,
                                          std::span<const ScoredMessage> msgs,
                                          std::span<const Date> trading_days,
                                          std::span<const Date> feature_dates);
}

/// Message-level advantage/disadvantage/equal tallies (for the summary file).
struct AdvantageCounts {
    std::string company;
    long long advantage = 0;
    long long disadvantage = 0;
    long long equal = 0;
};
AdvantageCounts count_advantage_calls(const std::string& company,
                                      std::span<const SentimentRecord> records);

// Persistence for the daily feature table.
void write_features_csv(const std::filesystem::path& p,
                        std::span<const DailyFeatures> rows);
std::vector<DailyFeatures> load_features_csv(const std::filesystem::path& p);

enum class RegressorSet { bert, gpt };

/// One company's aligned features and labels (same dates, same order).
struct CompanyDaily {
    std::string company;
    std::vector<DailyFeatures> features;
    std::vector<MovementLabel> labels;
};

/// Pooled design matrix with block-zero company columns plus an intercept.
struct DesignMatrix {
    std::vector<std::string> column_names;  // "intercept" first
    Eigen::MatrixXd X;                      // n x column_names.size()
    Eigen::VectorXd y;                      // binary labels
    std::vector<std::string> row_company;
    std::vector<Date> row_date;
};

/// Stacks per-company regressors into one pooled sample. Column order is
/// input order; row blocks are laid out in reverse input order, so for
/// [Apple, Tesla] the Tesla rows come first and the Apple sentiment column
/// is zero over that leading block. The bert set carries sentiment columns
/// only; the gpt set adds advantage and disadvantage counts.
DesignMatrix stack(std::span<const CompanyDaily> companies, RegressorSet set);

void write_design_csv(const std::filesystem::path& p, const DesignMatrix& dm);
DesignMatrix load_design_csv(const std::filesystem::path& p);

}  // namespace stocksent
