// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exit code is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <random>
#include <sstream>
#include <vector>

#include <omp.h>

#include "stocksent/config.hpp"
#include "stocksent/evalstat.hpp"
#include "stocksent/featurize.hpp"
#include "stocksent/glm.hpp"
#include "stocksent/pipeline.hpp"
#include "stocksent/respparse.hpp"
#include "stocksent/synth.hpp"
#include "stocksent/textprep.hpp"
#include "stocksent/util.hpp"

#include "oracles.hpp"

using namespace stocksent;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int number, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] %02d %-28s %s\n", pass ? "PASS" : "FAIL", number, name,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// --------------------------------------------------------------------------
// 1. Fisher scoring vs. grid-search maximizer
// --------------------------------------------------------------------------
void criterion_glm_oracle() {
    double t0 = now_seconds();
    std::mt19937_64 rng(101);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> coef(-1.5, 1.5);

    int checked = 0;
    double worst = 0.0;
    while (checked < 20) {
        int n = 12 + static_cast<int>(rng() % 19);  // up to 30
        int k = static_cast<int>(rng() % 3);        // 0..2 regressors
        Eigen::MatrixXd X(n, k + 1);
        Eigen::VectorXd beta(k + 1), y(n);
        for (int j = 0; j <= k; ++j) beta(j) = coef(rng);
        bool has0 = false, has1 = false;
        for (int i = 0; i < n; ++i) {
            X(i, 0) = 1.0;
            for (int j = 1; j <= k; ++j) X(i, j) = normal(rng);
            double p = logistic(X.row(i).dot(beta));
            y(i) = std::generate_canonical<double, 53>(rng) < p ? 1.0 : 0.0;
            (y(i) > 0.5 ? has1 : has0) = true;
        }
        if (!has0 || !has1) continue;
        FitResult fit = fit_logistic(X, y);
        // keep the maximizer inside the [-10,10] search box
        if (fit.separation || !fit.converged ||
            fit.coefficients.cwiseAbs().maxCoeff() > 8.0)
            continue;
        Eigen::VectorXd grid = oracles::grid_maximize_loglik(X, y);
        for (Eigen::Index j = 0; j < grid.size(); ++j)
            worst = std::max(worst, std::abs(fit.coefficients(j) - grid(j)));
        ++checked;
    }
    double elapsed = now_seconds() - t0;
    std::ostringstream d;
    d << checked << " designs, worst |diff| " << worst << ", " << elapsed << "s";
    verdict(1, "glm-grid-oracle", worst < 2e-3 && elapsed < 120.0, d.str());
}

// --------------------------------------------------------------------------
// 2. Analytic score vs. central finite differences
// --------------------------------------------------------------------------
void criterion_gradient() {
    std::mt19937_64 rng(102);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst = 0.0;
    for (int instance = 0; instance < 50; ++instance) {
        int n = 5 + static_cast<int>(rng() % 26);
        int k = 1 + static_cast<int>(rng() % 3);
        Eigen::MatrixXd X(n, k);
        Eigen::VectorXd y(n), beta(k);
        for (int i = 0; i < n; ++i) {
            y(i) = (rng() % 2) ? 1.0 : 0.0;
            for (int j = 0; j < k; ++j) X(i, j) = normal(rng);
        }
        for (int j = 0; j < k; ++j) beta(j) = 0.8 * normal(rng);
        Eigen::VectorXd grad = loglik_gradient(beta, X, y);
        const double h = 1e-5;
        for (int j = 0; j < k; ++j) {
            Eigen::VectorXd up = beta, dn = beta;
            up(j) += h;
            dn(j) -= h;
            double fd = (loglik(up, X, y) - loglik(dn, X, y)) / (2 * h);
            double rel = std::abs(grad(j) - fd) / std::max(1.0, std::abs(grad(j)));
            worst = std::max(worst, rel);
        }
    }
    std::ostringstream d;
    d << "50 instances, worst relative error " << worst;
    verdict(2, "gradient-check", worst < 1e-6, d.str());
}

// --------------------------------------------------------------------------
// 3. Intercept-only closed form
// --------------------------------------------------------------------------
void criterion_intercept() {
    std::mt19937_64 rng(103);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        int n = 4 + static_cast<int>(rng() % 60);
        Eigen::VectorXd y(n);
        int ones = 0;
        do {
            ones = 0;
            for (int i = 0; i < n; ++i) {
                y(i) = (rng() % 2) ? 1.0 : 0.0;
                ones += y(i) > 0.5 ? 1 : 0;
            }
        } while (ones == 0 || ones == n);
        Eigen::MatrixXd X = Eigen::MatrixXd::Ones(n, 1);
        FitResult fit = fit_logistic(X, y);
        double mean = static_cast<double>(ones) / n;
        worst = std::max(worst,
                         std::abs(fit.coefficients(0) - std::log(mean / (1 - mean))));
    }
    std::ostringstream d;
    d << "20 label vectors, worst |diff| " << worst;
    verdict(3, "intercept-closed-form", worst < 1e-8, d.str());
}

// --------------------------------------------------------------------------
// 4. McNemar fixtures
// --------------------------------------------------------------------------
void criterion_mcnemar() {
    auto paired = [](int b, int c) {
        std::vector<int> pa, pb, truth;
        for (int i = 0; i < b; ++i) {
            truth.push_back(1);
            pa.push_back(1);
            pb.push_back(0);
        }
        for (int i = 0; i < c; ++i) {
            truth.push_back(1);
            pa.push_back(0);
            pb.push_back(1);
        }
        truth.push_back(0);
        pa.push_back(0);
        pb.push_back(0);
        return std::make_tuple(pa, pb, truth);
    };

    auto [a1, b1, t1] = paired(10, 20);
    auto r1 = mcnemar(a1, b1, t1);
    bool ok1 = !r1.exact && std::abs(r1.p_value - 0.1003) < 1e-3;

    auto [a2, b2, t2] = paired(2, 3);
    auto r2 = mcnemar(a2, b2, t2);
    bool ok2 = r2.exact && r2.p_value == 1.0;

    auto [a3, b3, t3] = paired(15, 15);
    auto r3 = mcnemar(a3, b3, t3);
    auto [a4, b4, t4] = paired(4, 4);
    auto r4 = mcnemar(a4, b4, t4);
    bool ok3 = r3.p_value == 1.0 && r4.p_value == 1.0;

    std::ostringstream d;
    d << "p(10,20)=" << r1.p_value << ", p(2,3)=" << r2.p_value
      << ", symmetric p=" << r3.p_value;
    verdict(4, "mcnemar-fixtures", ok1 && ok2 && ok3, d.str());
}

// --------------------------------------------------------------------------
// 5. Parser corpus: the four printed evaluations, NA, three corruptions
// --------------------------------------------------------------------------
void criterion_parser() {
    struct Case {
        const char* text;
        ParseStatus status;
        std::array<double, 5> sent;
        bool has_adv;
        std::array<double, 2> adv;
        bool has_rel;
        std::array<double, 3> rel;
    };
    const std::vector<Case> cases = {
        {"'1(neg)': 0.2, '2': 0.2, '3': 0.2, '4': 0.2, '5(pos)': 0.2",
         ParseStatus::parsed, {0.2, 0.2, 0.2, 0.2, 0.2}, false, {}, false, {}},
        {"[Sentiment: '1(neg)': 0.1, '2': 0.1, '3': 0.2, '4': 0.3, '5(pos)': 0.3, "
         "Advantage: 'Advantage': 0.5, 'Disadvantage': 0.5, Relation: 'Mostly "
         "Apple': 0.1, 'Mostly competitor': 0.7, 'Unrelated': 0.2]",
         ParseStatus::parsed, {0.1, 0.1, 0.2, 0.3, 0.3}, true, {0.5, 0.5}, true,
         {0.1, 0.7, 0.2}},
        {"[Sentiment: '1(neg)': 0.1, '2': 0.1, '3': 0.1, '4': 0.1, '5(pos)': 0.6, "
         "Advantage: 'Advantage': 0.1, 'Disadvantage': 0.9, Relation: 'Mostly "
         "Apple': 0.7, 'Mostly competitor': 0.2, 'Unrelated': 0.1]",
         ParseStatus::parsed, {0.1, 0.1, 0.1, 0.1, 0.6}, true, {0.1, 0.9}, true,
         {0.7, 0.2, 0.1}},
        {"[Sentiment: '1(neg)': 0.1, '2': 0.1, '3': 0.1, '4': 0.2, '5(pos)': 0.5, "
         "Advantage: 'Advantage': 0.7, 'Disadvantage': 0.3, Relation: 'Mostly "
         "Apple': 0.9, 'Mostly competitor': 0.05, 'Unrelated': 0.05]",
         ParseStatus::parsed, {0.1, 0.1, 0.1, 0.2, 0.5}, true, {0.7, 0.3}, true,
         {0.9, 0.05, 0.05}},
        {"NA", ParseStatus::na, {}, false, {}, false, {}},
        // corruption: truncated inside the sentiment block
        {"[Sentiment: '1(neg)': 0.1, '2': 0.1, '3': 0.", ParseStatus::unparseable,
         {}, false, {}, false, {}},
        // corruption: sentiment block missing entirely
        {"[Advantage: 'Advantage': 0.7, 'Disadvantage': 0.3]",
         ParseStatus::unparseable, {}, false, {}, false, {}},
        // corruption: garbage text
        {"I cannot evaluate this.", ParseStatus::unparseable, {}, false, {},
         false, {}},
    };

    int passed = 0;
    for (const auto& c : cases) {
        SentimentRecord r = parse_response_text("m", c.text);
        bool ok = r.status == c.status;
        if (ok && c.status == ParseStatus::parsed) {
            ok = r.sentiment_probs == c.sent && r.has_advantage == c.has_adv &&
                 r.has_relation == c.has_rel;
            if (ok && c.has_adv) ok = r.advantage_probs == c.adv;
            if (ok && c.has_rel) ok = r.relation_probs == c.rel;
        }
        passed += ok ? 1 : 0;
    }
    std::ostringstream d;
    d << passed << "/" << cases.size() << " fixtures exact";
    verdict(5, "parser-corpus", passed == static_cast<int>(cases.size()), d.str());
}

// --------------------------------------------------------------------------
// 6. Cleaning fixture
// --------------------------------------------------------------------------
void criterion_cleaning() {
    const std::string original =
        "$AAPL OK, bought $162.50 calls, my shares sitting fine from forever "
        "ago...LONG";
    const std::string want_llm =
        "$aapl ok, bought $162.50 calls, my shares sitting fine from forever "
        "ago...long";
    const std::string want_bert =
        "ok bought calls my shares sitting fine from forever ago long";

    std::vector<RawMessage> hist = {
        RawMessage{"m1", parse_instant("2017-10-18T13:51:24Z"), "AAPL", original}};
    DuplicateRegistry reg = DuplicateRegistry::build(hist);
    auto gpt = clean_llm(hist[0], reg);
    auto bert = clean_bert(hist[0], reg);
    bool ok = gpt.status == CleanStatus::ok && gpt.message.body == want_llm &&
              bert.status == CleanStatus::ok && bert.message.body == want_bert;
    verdict(6, "cleaning-fixture", ok,
            ok ? "both profile rows exact" : "mismatch: '" + gpt.message.body +
                                                 "' / '" + bert.message.body + "'");
}

// --------------------------------------------------------------------------
// 7. Aggregation vs. the per-message reference, plus the boundary case
// --------------------------------------------------------------------------
void criterion_aggregation() {
    std::mt19937_64 rng(107);
    auto days = us_equity_trading_days(2017);
    std::vector<Date> feature_dates(days.begin() + 1, days.end());
    Instant lo = eastern_close_utc(days.front()) - 2 * 86400;
    Instant hi = eastern_close_utc(days.back()) + 2 * 86400;

    std::vector<ScoredMessage> msgs;
    for (int i = 0; i < 1000; ++i) {
        ScoredMessage m;
        m.timestamp_utc =
            lo + static_cast<Instant>(rng() % static_cast<std::uint64_t>(hi - lo));
        m.record.message_id = "m" + std::to_string(i);
        m.record.status = ParseStatus::parsed;
        int cls = static_cast<int>(rng() % 5);
        for (int s = 0; s < 5; ++s)
            m.record.sentiment_probs[s] = s == cls ? 0.6 : 0.1;
        int mode = static_cast<int>(rng() % 4);
        if (mode > 0) {
            m.record.has_advantage = true;
            double pa = mode == 1 ? 0.5
                                  : (mode == 2 ? 0.05 : 0.55) +
                                        0.4 * std::generate_canonical<double, 53>(rng);
            m.record.advantage_probs = {pa, 1.0 - pa};
        }
        msgs.push_back(std::move(m));
    }
    std::stable_sort(msgs.begin(), msgs.end(),
                     [](const ScoredMessage& a, const ScoredMessage& b) {
                         return std::tie(a.timestamp_utc, a.record.message_id) <
                                std::tie(b.timestamp_utc, b.record.message_id);
                     });

    auto fast = daily_features("AAPL", msgs, days, feature_dates);
    auto reference =
        oracles::naive_window_features("AAPL", msgs, days, feature_dates);
    bool equal = fast.size() == reference.size();
    for (size_t i = 0; equal && i < fast.size(); ++i) equal = fast[i] == reference[i];

    // boundary: a record exactly at 16:00 ET belongs to that day
    TradingWindows w(days);
    Date mid = days[120];
    bool boundary_ok = w.assign(eastern_close_utc(mid)) == mid &&
                       w.assign(eastern_close_utc(mid) + 1) == days[121];

    std::ostringstream d;
    d << "1000 records over " << feature_dates.size()
      << " days exact; close-instant assigns right-closed";
    verdict(7, "aggregation-reference", equal && boundary_ok, d.str());
}

// --------------------------------------------------------------------------
// 8. Stacking orthogonality
// --------------------------------------------------------------------------
void criterion_stacking() {
    std::mt19937_64 rng(108);
    auto days = us_equity_trading_days(2017);
    bool ok = true;
    size_t rows_expected = 0, rows_got = 0;
    for (int trial = 0; trial < 20 && ok; ++trial) {
        std::vector<CompanyDaily> companies;
        size_t total = 0;
        for (const std::string ticker : {"AAPL", "TSLA"}) {
            CompanyDaily cd;
            cd.company = ticker;
            size_t n = 2 + rng() % 60;
            total += n;
            for (size_t i = 0; i < n; ++i) {
                DailyFeatures f;
                f.company = ticker;
                f.date = days[i + 1];
                f.avg_sentiment = std::generate_canonical<double, 53>(rng) * 4 - 2;
                f.adv_count = static_cast<int>(rng() % 6);
                f.dis_count = static_cast<int>(rng() % 6);
                f.msg_count = f.adv_count + f.dis_count + static_cast<int>(rng() % 4);
                cd.features.push_back(f);
                cd.labels.push_back(
                    MovementLabel{ticker, days[i + 1], static_cast<int>(rng() % 2)});
            }
            companies.push_back(std::move(cd));
        }
        DesignMatrix dm = stack(companies, RegressorSet::gpt);
        rows_expected = total;
        rows_got = static_cast<size_t>(dm.X.rows());
        ok = rows_got == rows_expected;
        for (int i : {1, 3, 5}) {
            for (int j : {2, 4, 6}) {
                if (dm.X.col(i).dot(dm.X.col(j)) != 0.0) ok = false;
            }
        }
    }
    std::ostringstream d;
    d << "20 random stacks, all cross-company dot products exactly 0";
    verdict(8, "stacking-orthogonality", ok, d.str());
}

// --------------------------------------------------------------------------
// 9 & 10. Replicated end-to-end runs
// --------------------------------------------------------------------------
struct RepOutcome {
    double mean_gpt = 0.0;
    double mean_naive = 0.0;
    double median_p = 1.0;
    bool failed = false;
};

RepOutcome one_replication(std::uint64_t seed, bool planted) {
    RepOutcome out;
    try {
        SynthSpec spec;
        spec.seed = seed;
        spec.mean_messages_per_day = 50.0;
        spec.planted_signal = planted;
        SynthCorpus corpus = generate_corpus(spec);

        PipelineConfig cfg;
        cfg.seed = seed;
        cfg.companies = spec.companies;
        cfg.provider.kind = ProviderKind::mock;
        cfg.provider.seed = seed;
        cfg.split_year = spec.year;
        for (int m = 4; m <= 9; ++m) cfg.test_begin_months.push_back(m);

        PipelineData data{corpus.messages, corpus.prices, corpus.bert_rows};
        PipelineResult res = run_pipeline(data, cfg);

        std::vector<double> ps;
        for (const auto& r : res.reports) {
            out.mean_gpt += r.acc_gpt;
            out.mean_naive += r.acc_naive;
            ps.push_back(r.gpt_vs_naive.p_value);
        }
        out.mean_gpt /= static_cast<double>(res.reports.size());
        out.mean_naive /= static_cast<double>(res.reports.size());
        std::sort(ps.begin(), ps.end());
        out.median_p = 0.5 * (ps[ps.size() / 2 - 1] + ps[ps.size() / 2]);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "replication %llu failed: %s\n",
                     static_cast<unsigned long long>(seed), e.what());
        out.failed = true;
    }
    return out;
}

std::vector<RepOutcome> replications(std::uint64_t base_seed, bool planted) {
    const int reps = 40;
    std::vector<RepOutcome> out(reps);
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < reps; ++r)
        out[r] = one_replication(base_seed + static_cast<std::uint64_t>(r), planted);
    return out;
}

void criterion_signal_recovery() {
    double t0 = now_seconds();
    auto reps = replications(1000, true);
    double margin = 0.0;
    int significant = 0, failed = 0;
    for (const auto& r : reps) {
        if (r.failed) {
            ++failed;
            continue;
        }
        margin += r.mean_gpt - r.mean_naive;
        // a replication counts as significant when the median p-value across
        // its six splits clears the threshold
        significant += r.median_p < 0.05 ? 1 : 0;
    }
    margin /= static_cast<double>(reps.size() - failed);
    double elapsed = now_seconds() - t0;
    bool ok = failed == 0 && margin >= 0.08 && significant >= 38 &&
              elapsed < 600.0;
    std::ostringstream d;
    d << "margin " << margin * 100 << "pp, significant " << significant << "/40, "
      << elapsed << "s";
    verdict(9, "synthetic-signal-recovery", ok, d.str());
}

void criterion_null_safety() {
    auto reps = replications(5000, false);
    double margin = 0.0;
    int significant = 0, failed = 0;
    for (const auto& r : reps) {
        if (r.failed) {
            ++failed;
            continue;
        }
        margin += r.mean_gpt - r.mean_naive;
        significant += r.median_p < 0.05 ? 1 : 0;
    }
    margin /= static_cast<double>(reps.size() - failed);
    bool ok = failed == 0 && std::abs(margin) <= 0.05 && significant <= 4;
    std::ostringstream d;
    d << "margin " << margin * 100 << "pp, significant " << significant << "/40";
    verdict(10, "null-signal-safety", ok, d.str());
}

// --------------------------------------------------------------------------
// 11. Byte-identical reruns
// --------------------------------------------------------------------------
void criterion_determinism() {
    auto dir = fs::temp_directory_path() / "stocksent_acceptance" / "determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);

    SynthSpec spec;
    spec.seed = 4242;
    spec.mean_messages_per_day = 8.0;
    SynthCorpus corpus = generate_corpus(spec);
    write_corpus(corpus, dir / "messages.jsonl", dir / "prices.csv",
                 dir / "bert.csv");

    PipelineConfig cfg;
    cfg.seed = spec.seed;
    cfg.companies = spec.companies;
    cfg.messages_path = dir / "messages.jsonl";
    cfg.prices_path = dir / "prices.csv";
    cfg.bert_sentiments_path = dir / "bert.csv";
    cfg.provider.kind = ProviderKind::mock;
    cfg.provider.seed = spec.seed;
    cfg.split_year = spec.year;
    for (int m = 4; m <= 9; ++m) cfg.test_begin_months.push_back(m);

    cfg.output_dir = dir / "out1";
    cmd_run(cfg);
    PipelineConfig cfg2 = cfg;
    cfg2.output_dir = dir / "out2";
    cmd_run(cfg2);

    bool ok = true;
    for (const char* f : {outfile::results_csv, outfile::results_txt,
                          outfile::features_gpt, outfile::features_bert,
                          outfile::records_gpt, outfile::records_bert,
                          outfile::counts_summary}) {
        if (read_file(cfg.output_dir / f) != read_file(cfg2.output_dir / f)) {
            ok = false;
            std::fprintf(stderr, "determinism mismatch in %s\n", f);
        }
    }
    verdict(11, "run-determinism", ok,
            ok ? "report tables and feature files byte-identical"
               : "byte mismatch between runs");
}

}  // namespace

int main() {
    std::printf("acceptance suite (%d OpenMP threads)\n", omp_get_max_threads());
    criterion_glm_oracle();
    criterion_gradient();
    criterion_intercept();
    criterion_mcnemar();
    criterion_parser();
    criterion_cleaning();
    criterion_aggregation();
    criterion_stacking();
    criterion_signal_recovery();
    criterion_null_safety();
    criterion_determinism();
    if (failures)
        std::printf("%d criterion(s) FAILED\n", failures);
    else
        std::printf("all 11 criteria passed\n");
    return failures;
}
