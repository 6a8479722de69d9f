// Compares the OpenMP corpus kernels against their serial references on a
// synthetic corpus and checks that both produce identical results.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "stocksent/featurize.hpp"
#include "stocksent/glm.hpp"
#include "stocksent/pipeline.hpp"
#include "stocksent/respparse.hpp"
#include "stocksent/synth.hpp"
#include "stocksent/textprep.hpp"

using namespace stocksent;

namespace {

struct Timed {
    double serial_s = 0.0;
    double parallel_s = 0.0;
};

void report(const char* name, size_t items, const Timed& t, bool equal) {
    double speedup = t.parallel_s > 0 ? t.serial_s / t.parallel_s : 0.0;
    std::printf("%-18s %10zu items  serial %8.3fs  omp %8.3fs  speedup %5.2fx  %s\n",
                name, items, t.serial_s, t.parallel_s, speedup,
                equal ? "outputs identical" : "OUTPUT MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stocksent kernel benchmark"};
    double messages_per_day = 200.0;
    int threads = 0;
    std::uint64_t seed = 7;
    app.add_option("--messages-per-day", messages_per_day,
                   "Mean synthetic messages per trading day");
    app.add_option("--threads", threads, "OpenMP threads (0 = default)");
    app.add_option("--seed", seed, "Corpus seed");
    CLI11_PARSE(app, argc, argv);

    if (threads > 0) omp_set_num_threads(threads);
    std::printf("benchmarking with %d thread(s)\n", omp_get_max_threads());

    SynthSpec spec;
    spec.mean_messages_per_day = messages_per_day;
    spec.seed = seed;
    std::printf("generating corpus...\n");
    SynthCorpus corpus = generate_corpus(spec);
    std::printf("corpus: %zu messages, %zu price bars\n", corpus.messages.size(),
                corpus.prices.size());

    bool all_equal = true;
    const CompanyContext ctx = spec.companies[0];
    std::vector<RawMessage> msgs;
    for (const auto& m : corpus.messages)
        if (m.ticker == ctx.ticker_symbol) msgs.push_back(m);

    DuplicateRegistry registry = DuplicateRegistry::build(msgs);

    // clean
    Timed t_clean;
    double t0 = omp_get_wtime();
    auto clean_ref = serial::clean_corpus(msgs, CleaningProfile::bert_profile,
                                          registry);
    t_clean.serial_s = omp_get_wtime() - t0;
    t0 = omp_get_wtime();
    auto clean_omp = clean_corpus(msgs, CleaningProfile::bert_profile, registry);
    t_clean.parallel_s = omp_get_wtime() - t0;
    bool eq = clean_ref.size() == clean_omp.size();
    for (size_t i = 0; eq && i < clean_ref.size(); ++i)
        eq = clean_ref[i].status == clean_omp[i].status &&
             clean_ref[i].message == clean_omp[i].message;
    all_equal &= eq;
    report("clean", msgs.size(), t_clean, eq);

    // score + parse (mock provider)
    auto llm = clean_corpus(msgs, CleaningProfile::llm_profile, registry);
    std::vector<PromptJob> jobs;
    std::vector<CleanedMessage> kept;
    for (const auto& o : llm) {
        if (o.status != CleanStatus::ok) continue;
        kept.push_back(o.message);
        jobs.push_back(PromptJob{o.message.id,
                                 build_prompt(o.message, ctx, "gpt-4")});
    }
    ProviderConfig mock;
    mock.kind = ProviderKind::mock;
    mock.seed = seed;

    Timed t_score;
    ProviderConfig mock1 = mock;
    mock1.max_concurrency = 1;
    t0 = omp_get_wtime();
    auto resp_ref = score_batch(jobs, mock1);
    auto rec_ref = serial::parse_all(resp_ref.responses);
    t_score.serial_s = omp_get_wtime() - t0;
    mock.max_concurrency = omp_get_max_threads();
    t0 = omp_get_wtime();
    auto resp_omp = score_batch(jobs, mock);
    auto rec_omp = parse_all(resp_omp.responses);
    t_score.parallel_s = omp_get_wtime() - t0;
    eq = rec_ref == rec_omp;
    all_equal &= eq;
    report("score+parse", jobs.size(), t_score, eq);

    // daily features
    std::vector<ScoredMessage> scored;
    for (size_t i = 0; i < kept.size(); ++i)
        scored.push_back(ScoredMessage{kept[i].timestamp_utc, rec_ref[i]});
    auto days = us_equity_trading_days(spec.year);
    std::vector<Date> label_dates(days.begin() + 1, days.end());

    Timed t_feat;
    t0 = omp_get_wtime();
    auto feat_ref = serial::daily_features(ctx.ticker_symbol, scored, days,
                                           label_dates);
    t_feat.serial_s = omp_get_wtime() - t0;
    t0 = omp_get_wtime();
    auto feat_omp = daily_features(ctx.ticker_symbol, scored, days, label_dates);
    t_feat.parallel_s = omp_get_wtime() - t0;
    eq = feat_ref == feat_omp;
    all_equal &= eq;
    report("daily features", label_dates.size(), t_feat, eq);

    // split evaluation on the full pipeline artifacts
    PipelineConfig cfg;
    cfg.companies = spec.companies;
    cfg.seed = seed;
    cfg.provider = mock;
    cfg.split_year = spec.year;
    for (int m = 4; m <= 9; ++m) cfg.test_begin_months.push_back(m);
    PipelineData data{corpus.messages, corpus.prices, corpus.bert_rows};
    PipelineResult full = run_pipeline(data, cfg);
    auto plans = split_plans(cfg);

    Timed t_eval;
    t0 = omp_get_wtime();
    auto eval_ref = serial::run_splits(full.bert_dm, full.gpt_dm, plans);
    t_eval.serial_s = omp_get_wtime() - t0;
    t0 = omp_get_wtime();
    auto eval_omp = run_splits(full.bert_dm, full.gpt_dm, plans);
    t_eval.parallel_s = omp_get_wtime() - t0;
    eq = eval_ref.size() == eval_omp.size();
    for (size_t i = 0; eq && i < eval_ref.size(); ++i)
        eq = eval_ref[i].acc_gpt == eval_omp[i].acc_gpt &&
             eval_ref[i].acc_bert == eval_omp[i].acc_bert &&
             eval_ref[i].gpt_vs_naive.p_value == eval_omp[i].gpt_vs_naive.p_value;
    all_equal &= eq;
    report("split evaluation", plans.size(), t_eval, eq);

    if (!all_equal) {
        std::printf("FAILURE: a parallel kernel diverged from its reference\n");
        return 1;
    }
    return 0;
}
