#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stocksent/featurize.hpp"
#include "stocksent/glm.hpp"

namespace stocksent {

/// One month-anchored train/test split: training runs January through
/// `train_end_month`, testing from the next month through December of the
/// same year. Both periods must cover at least three whole months.
struct SplitPlan {
    int year = 2017;
    int train_end_month = 3;  // 1..12

    int test_begin_month() const { return train_end_month + 1; }
    void validate() const;
};

/// The six canonical plans: test periods beginning April through September.
std::vector<SplitPlan> default_split_plans(int year);

/// Buy-and-hold baseline: predict "up" everywhere.
std::vector<int> naive_predict(size_t n);

/// (TP + TN) / n for binary vectors of equal, nonzero length.
double accuracy(std::span<const int> pred, std::span<const int> truth);

struct McNemarResult {
    long long b = 0;             // a correct, b wrong
    long long c = 0;             // a wrong, b correct
    long long both_correct = 0;  // concordant cells of the 2x2 table
    long long both_wrong = 0;
    double statistic = 0.0;
    double p_value = 1.0;
    bool exact = false;  // exact binomial path (b + c < 25) vs chi-square
};

/// Paired-classifier McNemar test. Discordant pairs below 25 use the exact
/// two-sided binomial on min(b, c); otherwise the continuity-corrected
/// chi-square (|b-c|-1)^2 / (b+c) on one degree of freedom. b + c = 0 gives
/// p = 1 by convention.
McNemarResult mcnemar(std::span<const int> pred_a, std::span<const int> pred_b,
                      std::span<const int> truth);

/// Upper tail of the chi-square(1) distribution via erfc(sqrt(x / 2)).
double chi_square1_sf(double x);

struct EvalReport {
    SplitPlan split;
    double acc_naive = 0.0;
    double acc_bert = 0.0;
    double acc_gpt = 0.0;
    McNemarResult bert_vs_naive;
    McNemarResult gpt_vs_naive;
    size_t n_test = 0;
};

/// Evaluates every plan: fits the bert-set and gpt-set models on the train
/// months, predicts the test months, and compares both against the naive
/// baseline. The two designs must describe the same rows (same dates,
/// labels and companies). Plans run independently, in parallel.
std::vector<EvalReport> run_splits(const DesignMatrix& bert_dm,
                                   const DesignMatrix& gpt_dm,
                                   std::span<const SplitPlan> plans,
                                   int threads = 0);
namespace serial {
std::vector<EvalReport> run_splits(const DesignMatrix& bert_dm,
                                   const DesignMatrix& gpt_dm,
                                   std::span<const SplitPlan> plans);
}

/// Convenience: stacks both regressor sets from per-company features and
/// evaluates.
std::vector<EvalReport> run_splits(std::span<const CompanyDaily> bert_companies,
                                   std::span<const CompanyDaily> gpt_companies,
                                   std::span<const SplitPlan> plans,
                                   int threads = 0);

/// Writes the results table (CSV + text) plus the exploratory data files:
/// per-company sentiment/advantage series, their scatter pairing, and the
/// message-level advantage call tallies.
void emit_report(std::span<const EvalReport> reports,
                 std::span<const DailyFeatures> eda,
                 std::span<const AdvantageCounts> counts,
                 const std::filesystem::path& outdir);

std::string results_csv_text(std::span<const EvalReport> reports);

}  // namespace stocksent
