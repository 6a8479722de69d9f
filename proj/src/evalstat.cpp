#include "stocksent/evalstat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <sstream>

#include <omp.h>

#include "stocksent/csv.hpp"
#include "stocksent/errors.hpp"
#include "stocksent/util.hpp"

namespace stocksent {

namespace {

std::string pct2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
    return buf;
}

std::string sci3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2e", v);
    return buf;
}

struct SplitIndices {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
};

SplitIndices split_rows(const DesignMatrix& dm, const SplitPlan& plan) {
    SplitIndices s;
    for (Eigen::Index r = 0; r < dm.X.rows(); ++r) {
        const Date& d = dm.row_date[static_cast<size_t>(r)];
        if (d.year != plan.year)
            throw PlanError("row date " + format_date(d) +
                            " is outside the plan year " +
                            std::to_string(plan.year));
        if (d.month <= plan.train_end_month)
            s.train.push_back(r);
        else
            s.test.push_back(r);
    }
    if (s.train.empty())
        throw PlanError("split with test beginning " +
                        month_name(plan.test_begin_month()) + " has no training rows");
    if (s.test.empty())
        throw PlanError("split with test beginning " +
                        month_name(plan.test_begin_month()) + " has no test rows");
    return s;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X,
                          const std::vector<Eigen::Index>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
    return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& v,
                          const std::vector<Eigen::Index>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(rows[i]);
    return out;
}

EvalReport evaluate_plan(const DesignMatrix& bert_dm, const DesignMatrix& gpt_dm,
                         const SplitPlan& plan) {
    plan.validate();
    SplitIndices rows = split_rows(gpt_dm, plan);

    auto fit_and_predict = [&](const DesignMatrix& dm) {
        Eigen::MatrixXd Xtr = take_rows(dm.X, rows.train);
        Eigen::VectorXd ytr = take_rows(dm.y, rows.train);
        FitResult fit = fit_logistic(Xtr, ytr, dm.column_names);
        Eigen::MatrixXd Xte = take_rows(dm.X, rows.test);
        return predict(fit, Xte, dm.column_names);
    };

    std::vector<int> truth;
    truth.reserve(rows.test.size());
    for (Eigen::Index r : rows.test)
        truth.push_back(static_cast<int>(gpt_dm.y(r)));

    std::vector<int> pred_bert = fit_and_predict(bert_dm);
    std::vector<int> pred_gpt = fit_and_predict(gpt_dm);
    std::vector<int> pred_naive = naive_predict(truth.size());

    EvalReport rep;
    rep.split = plan;
    rep.acc_naive = accuracy(pred_naive, truth);
    rep.acc_bert = accuracy(pred_bert, truth);
    rep.acc_gpt = accuracy(pred_gpt, truth);
    rep.bert_vs_naive = mcnemar(pred_bert, pred_naive, truth);
    rep.gpt_vs_naive = mcnemar(pred_gpt, pred_naive, truth);
    rep.n_test = truth.size();
    return rep;
}

void check_same_rows(const DesignMatrix& a, const DesignMatrix& b) {
    if (a.X.rows() != b.X.rows())
        throw ShapeError("bert and gpt designs have different row counts");
    if (a.row_date != b.row_date || a.row_company != b.row_company)
        throw ShapeError("bert and gpt designs describe different rows");
    if ((a.y - b.y).cwiseAbs().maxCoeff() != 0.0)
        throw ShapeError("bert and gpt designs carry different labels");
}

}  // namespace

void SplitPlan::validate() const {
    if (train_end_month < 1 || train_end_month > 11)
        throw PlanError("train end month out of range");
    int train_months = train_end_month;          // January .. train_end
    int test_months = 12 - train_end_month;      // next month .. December
    if (train_months < 3)
        throw PlanError("training period covers " + std::to_string(train_months) +
                        " month(s); need at least 3 (test beginning " +
                        month_name(test_begin_month()) + ")");
    if (test_months < 3)
        throw PlanError("test period covers " + std::to_string(test_months) +
                        " month(s); need at least 3");
}

std::vector<SplitPlan> default_split_plans(int year) {
    std::vector<SplitPlan> plans;
    for (int train_end = 3; train_end <= 8; ++train_end)
        plans.push_back(SplitPlan{year, train_end});
    return plans;
}

std::vector<int> naive_predict(size_t n) { return std::vector<int>(n, 1); }

double accuracy(std::span<const int> pred, std::span<const int> truth) {
    if (pred.size() != truth.size())
        throw ShapeError("accuracy needs equal-length vectors");
    if (pred.empty()) throw ShapeError("accuracy is undefined on empty vectors");
    size_t correct = 0;
    for (size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == truth[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(pred.size());
}

double chi_square1_sf(double x) { return std::erfc(std::sqrt(x / 2.0)); }

McNemarResult mcnemar(std::span<const int> pred_a, std::span<const int> pred_b,
                      std::span<const int> truth) {
    if (pred_a.size() != pred_b.size() || pred_a.size() != truth.size())
        throw ShapeError("mcnemar needs equal-length vectors");
    if (truth.empty()) throw ShapeError("mcnemar needs at least one observation");

    McNemarResult r;
    for (size_t i = 0; i < truth.size(); ++i) {
        bool a_ok = pred_a[i] == truth[i];
        bool b_ok = pred_b[i] == truth[i];
        if (a_ok && b_ok) ++r.both_correct;
        if (a_ok && !b_ok) ++r.b;
        if (!a_ok && b_ok) ++r.c;
        if (!a_ok && !b_ok) ++r.both_wrong;
    }
    long long n = r.b + r.c;
    if (n == 0) {
        r.p_value = 1.0;
        r.exact = true;
        return r;
    }
    if (n < 25) {
        // Exact two-sided binomial on min(b, c) with success probability 1/2.
        r.exact = true;
        long long m = std::min(r.b, r.c);
        double tail = 0.0;
        double pmf = std::pow(0.5, static_cast<double>(n));  // P(X = 0)
        for (long long k = 0; k <= m; ++k) {
            tail += pmf;
            pmf *= static_cast<double>(n - k) / static_cast<double>(k + 1);
        }
        r.p_value = std::min(1.0, 2.0 * tail);
        return r;
    }
    double diff = std::max(std::abs(static_cast<double>(r.b - r.c)) - 1.0, 0.0);
    r.statistic = diff * diff / static_cast<double>(n);
    r.p_value = chi_square1_sf(r.statistic);
    r.exact = false;
    return r;
}

std::vector<EvalReport> run_splits(const DesignMatrix& bert_dm,
                                   const DesignMatrix& gpt_dm,
                                   std::span<const SplitPlan> plans, int threads) {
    check_same_rows(bert_dm, gpt_dm);
    for (const auto& p : plans) p.validate();

    std::vector<EvalReport> out(plans.size());
    std::vector<std::exception_ptr> errors(plans.size());
    int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(plans.size()); ++i) {
        try {
            out[i] = evaluate_plan(bert_dm, gpt_dm, plans[i]);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

namespace serial {
std::vector<EvalReport> run_splits(const DesignMatrix& bert_dm,
                                   const DesignMatrix& gpt_dm,
                                   std::span<const SplitPlan> plans) {
    check_same_rows(bert_dm, gpt_dm);
    std::vector<EvalReport> out;
    out.reserve(plans.size());
    for (const auto& p : plans) out.push_back(evaluate_plan(bert_dm, gpt_dm, p));
    return out;
}
}  // namespace serial

std::vector<EvalReport> run_splits(std::span<const CompanyDaily> bert_companies,
                                   std::span<const CompanyDaily> gpt_companies,
                                   std::span<const SplitPlan> plans, int threads) {
    DesignMatrix bert_dm = stack(bert_companies, RegressorSet::bert);
    DesignMatrix gpt_dm = stack(gpt_companies, RegressorSet::gpt);
    return run_splits(bert_dm, gpt_dm, plans, threads);
}

std::string results_csv_text(std::span<const EvalReport> reports) {
    std::ostringstream out;
    out << "begin_test,acc_naive,acc_bert,p_bert_naive,acc_gpt,p_gpt_naive,n_test\n";
    for (const auto& r : reports) {
        out << month_name(r.split.test_begin_month()) << "," << pct2(r.acc_naive)
            << "," << pct2(r.acc_bert) << "," << sci3(r.bert_vs_naive.p_value)
            << "," << pct2(r.acc_gpt) << "," << sci3(r.gpt_vs_naive.p_value) << ","
            << r.n_test << "\n";
    }
    return out.str();
}

void emit_report(std::span<const EvalReport> reports,
                 std::span<const DailyFeatures> eda,
                 std::span<const AdvantageCounts> counts,
                 const std::filesystem::path& outdir) {
    if (reports.empty()) throw ConfigError("emit_report needs at least one report");
    std::filesystem::create_directories(outdir);

    write_file(outdir / "results.csv", results_csv_text(reports));

    std::ostringstream txt;
    txt << "Same-day movement accuracy by test period (p-values against the\n"
           "buy-and-hold baseline; [exact] = exact binomial, [chi2] =\n"
           "continuity-corrected chi-square)\n\n";
    char line[256];
    std::snprintf(line, sizeof(line), "%-10s %8s %8s %16s %8s %16s %7s\n",
                  "begin", "naive", "bert", "p_bert|naive", "gpt", "p_gpt|naive",
                  "n_test");
    txt << line;
    for (const auto& r : reports) {
        std::string pb = sci3(r.bert_vs_naive.p_value) +
                         (r.bert_vs_naive.exact ? " [exact]" : " [chi2]");
        std::string pg = sci3(r.gpt_vs_naive.p_value) +
                         (r.gpt_vs_naive.exact ? " [exact]" : " [chi2]");
        std::snprintf(line, sizeof(line), "%-10s %7s%% %7s%% %16s %7s%% %16s %7zu\n",
                      month_name(r.split.test_begin_month()).c_str(),
                      pct2(r.acc_naive).c_str(), pct2(r.acc_bert).c_str(), pb.c_str(),
                      pct2(r.acc_gpt).c_str(), pg.c_str(), r.n_test);
        txt << line;
    }
    write_file(outdir / "results.txt", txt.str());

    // Per-company exploratory series.
    std::map<std::string, std::vector<const DailyFeatures*>> by_company;
    for (const auto& f : eda) by_company[f.company].push_back(&f);
    for (const auto& [company, rows] : by_company) {
        std::ostringstream sent, adv, scatter;
        sent << "date,avg_sentiment\n";
        adv << "date,avg_advantage\n";
        scatter << "date,avg_sentiment,avg_advantage\n";
        for (const auto* f : rows) {
            sent << format_date(f->date) << "," << format_double(f->avg_sentiment)
                 << "\n";
            adv << format_date(f->date) << "," << format_double(f->avg_advantage)
                << "\n";
            scatter << format_date(f->date) << ","
                    << format_double(f->avg_sentiment) << ","
                    << format_double(f->avg_advantage) << "\n";
        }
        write_file(outdir / ("eda_sentiment_" + company + ".csv"), sent.str());
        write_file(outdir / ("eda_advantage_" + company + ".csv"), adv.str());
        write_file(outdir / ("eda_scatter_" + company + ".csv"), scatter.str());
    }

    std::ostringstream cnt;
    cnt << "company,advantage,disadvantage,equal,total,advantage_share,"
           "disadvantage_share,equal_share\n";
    for (const auto& c : counts) {
        long long total = c.advantage + c.disadvantage + c.equal;
        auto share = [&](long long v) {
            return total > 0 ? format_double(static_cast<double>(v) /
                                             static_cast<double>(total))
                             : std::string("0");
        };
        cnt << c.company << "," << c.advantage << "," << c.disadvantage << ","
            << c.equal << "," << total << "," << share(c.advantage) << ","
            << share(c.disadvantage) << "," << share(c.equal) << "\n";
    }
    write_file(outdir / "counts_summary.csv", cnt.str());
}

}  // namespace stocksent
