#include "stocksent/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "stocksent/errors.hpp"
#include "stocksent/util.hpp"

namespace stocksent {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Shared wiring helpers. The in-memory run and the staged commands both go
// through these, so they cannot drift apart.
// ---------------------------------------------------------------------------

template <typename T, typename GetTicker>
std::vector<T> of_ticker(std::span<const T> items, const std::string& ticker,
                         GetTicker get) {
    std::vector<T> out;
    for (const auto& it : items) {
        if (get(it) == ticker) out.push_back(it);
    }
    return out;
}

std::vector<PriceBar> prices_of(std::span<const PriceBar> prices,
                                const std::string& ticker) {
    std::vector<PriceBar> out;
    for (const auto& p : prices)
        if (p.company == ticker) out.push_back(p);
    if (out.empty())
        throw IntegrityError("no price bars for company '" + ticker + "'");
    return out;
}

std::vector<PromptJob> jobs_for(std::span<const CleanedMessage> cleaned,
                                const CompanyContext& ctx,
                                const std::string& model_id) {
    std::vector<PromptJob> jobs;
    jobs.reserve(cleaned.size());
    for (const auto& m : cleaned)
        jobs.push_back(PromptJob{m.id, build_prompt(m, ctx, model_id)});
    return jobs;
}

std::vector<ScoredMessage> join_records(
    std::span<const CleanedMessage> cleaned,
    std::span<const SentimentRecord> records) {
    if (cleaned.size() != records.size())
        throw IntegrityError("record count does not match cleaned message count");
    std::vector<ScoredMessage> out;
    out.reserve(cleaned.size());
    for (size_t i = 0; i < cleaned.size(); ++i) {
        if (cleaned[i].id != records[i].message_id)
            throw IntegrityError("record order does not match cleaned messages ('" +
                                 cleaned[i].id + "' vs '" + records[i].message_id +
                                 "')");
        out.push_back(ScoredMessage{cleaned[i].timestamp_utc, records[i]});
    }
    return out;
}

std::vector<Date> dates_of(std::span<const PriceBar> prices) {
    std::vector<Date> out;
    out.reserve(prices.size());
    for (const auto& p : prices) out.push_back(p.date);
    return out;
}

std::vector<Date> dates_of(std::span<const MovementLabel> labels) {
    std::vector<Date> out;
    out.reserve(labels.size());
    for (const auto& l : labels) out.push_back(l.date);
    return out;
}

std::vector<CleanedMessage> kept_messages(std::span<const CleanOutcome> outcomes) {
    std::vector<CleanedMessage> out;
    for (const auto& o : outcomes)
        if (o.status == CleanStatus::ok) out.push_back(o.message);
    return out;
}

struct CostLedger {
    double total = 0.0;
    size_t requests = 0;
};

void print_cost_ledger(const CostLedger& ledger) {
    std::printf("cost ledger: %zu requests, %.2f USD total (%.4f USD avg)\n",
                ledger.requests, ledger.total,
                ledger.requests ? ledger.total / static_cast<double>(ledger.requests)
                                : 0.0);
}

// ---------------------------------------------------------------------------
// Run manifest: content digests per stage so cmd_run can skip fresh stages.
// ---------------------------------------------------------------------------

std::uint64_t digest_file(const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) return 0;
    return fnv1a64(read_file(p));
}

std::string digest_hex(std::uint64_t d) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(d));
    return buf;
}

class RunManifest {
public:
    explicit RunManifest(const std::filesystem::path& out_dir)
        : file_(out_dir / outfile::manifest) {
        if (std::filesystem::exists(file_)) {
            json j = json::parse(read_file(file_), nullptr, false);
            if (!j.is_discarded() && j.contains("stages")) stages_ = j["stages"];
        }
        if (!stages_.is_object()) stages_ = json::object();
    }

    bool up_to_date(const std::string& stage, const std::string& digest,
                    const std::vector<std::filesystem::path>& outputs) const {
        if (!stages_.contains(stage)) return false;
        if (stages_[stage].value("digest", "") != digest) return false;
        for (const auto& o : outputs)
            if (!std::filesystem::exists(o)) return false;
        return true;
    }

    void record(const std::string& stage, const std::string& digest,
                const std::vector<std::filesystem::path>& outputs) {
        json names = json::array();
        for (const auto& o : outputs) names.push_back(o.filename().string());
        stages_[stage] = json{{"digest", digest}, {"outputs", names}};
        save();
    }

    // Drops a stage and everything after it; their outputs are stale.
    void invalidate_from(const std::string& stage,
                         const std::vector<std::string>& order) {
        bool drop = false;
        for (const auto& s : order) {
            if (s == stage) drop = true;
            if (drop) stages_.erase(s);
        }
        save();
    }

private:
    void save() const {
        write_file(file_, json{{"stages", stages_}}.dump(2) + "\n");
    }

    std::filesystem::path file_;
    json stages_;
};

std::string provider_slice(const ProviderConfig& p) {
    std::ostringstream s;
    s << provider_kind_name(p.kind) << "|" << p.model_id << "|" << p.seed << "|"
      << p.na_fraction << "|" << p.cost_per_request << "|" << p.endpoint_url << "|"
      << p.replay_cache_path.string() << "|"
      << p.external_sentiments_path.string();
    return s.str();
}

std::string splits_slice(const PipelineConfig& cfg) {
    std::ostringstream s;
    s << cfg.split_year;
    for (int m : cfg.test_begin_months) s << "," << m;
    return s.str();
}

std::string companies_slice(const PipelineConfig& cfg) {
    std::ostringstream s;
    for (const auto& c : cfg.companies)
        s << c.display_name << ":" << c.ticker_symbol << ";";
    return s.str();
}

// ---------------------------------------------------------------------------
// Stage cores shared between run_pipeline and the staged commands.
// ---------------------------------------------------------------------------

struct CleanArtifacts {
    std::vector<CleanedMessage> llm;
    std::vector<CleanedMessage> bert;
    std::vector<CleaningAuditRow> audit;
};

CleanArtifacts clean_company(std::span<const RawMessage> msgs,
                             const PipelineConfig& cfg) {
    CleanArtifacts art;
    // Dedup history is the company's full message stream.
    DuplicateRegistry registry = DuplicateRegistry::build(msgs);
    auto llm_out = clean_corpus(msgs, CleaningProfile::llm_profile, registry,
                                cfg.threads);
    auto bert_out = clean_corpus(msgs, CleaningProfile::bert_profile, registry,
                                 cfg.threads);
    art.llm = kept_messages(llm_out);
    art.bert = kept_messages(bert_out);
    art.audit.reserve(msgs.size() * 2);
    for (size_t i = 0; i < msgs.size(); ++i)
        art.audit.push_back(audit_row(msgs[i], CleaningProfile::llm_profile,
                                      llm_out[i]));
    for (size_t i = 0; i < msgs.size(); ++i)
        art.audit.push_back(audit_row(msgs[i], CleaningProfile::bert_profile,
                                      bert_out[i]));
    return art;
}

std::vector<SentimentRecord> score_gpt_company(
    std::span<const CleanedMessage> cleaned, const CompanyContext& ctx,
    const PipelineConfig& cfg, CostLedger& ledger) {
    auto jobs = jobs_for(cleaned, ctx, cfg.provider.model_id);
    BatchResult batch = score_batch(jobs, cfg.provider);
    ledger.total += batch.total_cost;
    ledger.requests += jobs.size();
    return parse_all(batch.responses, cfg.threads);
}

// One record per cleaned message: parsed from its external row when one
// exists, unparseable otherwise (the message was never scored).
std::vector<SentimentRecord> bert_records_from_rows(
    std::span<const CleanedMessage> cleaned,
    std::span<const ExternalSentimentRow> rows) {
    std::unordered_map<std::string_view, const ExternalSentimentRow*> by_id;
    for (const auto& r : rows) by_id.emplace(r.message_id, &r);
    std::vector<SentimentRecord> out;
    out.reserve(cleaned.size());
    for (const auto& m : cleaned) {
        auto it = by_id.find(std::string_view(m.id));
        if (it != by_id.end()) {
            out.push_back(record_from_external(*it->second));
        } else {
            SentimentRecord rec;
            rec.message_id = m.id;
            rec.status = ParseStatus::unparseable;
            out.push_back(std::move(rec));
        }
    }
    return out;
}

struct FeatureArtifacts {
    std::vector<MovementLabel> labels;
    std::vector<Date> trading_days;
    std::vector<Date> label_dates;
    std::vector<DailyFeatures> daily;
};

FeatureArtifacts featurize_company(std::span<const PriceBar> prices,
                                   std::span<const CleanedMessage> cleaned,
                                   std::span<const SentimentRecord> records,
                                   const std::string& ticker, int threads) {
    FeatureArtifacts art;
    art.labels = derive_labels(prices);
    art.trading_days = dates_of(prices);
    art.label_dates = dates_of(std::span<const MovementLabel>(art.labels));
    auto scored = join_records(cleaned, records);
    art.daily = daily_features(ticker, scored, art.trading_days, art.label_dates,
                               threads);
    return art;
}

std::vector<std::string> external_warnings(const PipelineData& data,
                                           std::span<const CleanedMessage> bert) {
    std::vector<std::string> ids;
    ids.reserve(bert.size());
    for (const auto& m : bert) ids.push_back(m.id);
    auto unknown = unknown_external_ids(data.bert_rows, ids);
    std::vector<std::string> warnings;
    if (!unknown.empty()) {
        std::string w = "external sentiment file names " +
                        std::to_string(unknown.size()) +
                        " message id(s) absent from the cleaned corpus (rows kept)";
        warnings.push_back(std::move(w));
    }
    return warnings;
}

}  // namespace

PipelineData load_pipeline_inputs(const PipelineConfig& cfg) {
    PipelineData data;
    data.messages =
        load_messages(cfg.messages_path, format_from_extension(cfg.messages_path));
    data.prices =
        load_prices(cfg.prices_path, format_from_extension(cfg.prices_path));
    if (!cfg.bert_sentiments_path.empty())
        data.bert_rows = load_external_sentiments(cfg.bert_sentiments_path);
    return data;
}

PipelineResult run_pipeline(const PipelineData& data, const PipelineConfig& cfg) {
    PipelineResult result;
    CostLedger ledger;

    std::vector<CompanyDaily> bert_stack, gpt_stack;
    for (const auto& ctx : cfg.companies) {
        CompanyPipeline cp;
        cp.ctx = ctx;
        auto msgs = of_ticker(std::span<const RawMessage>(data.messages),
                              ctx.ticker_symbol,
                              [](const RawMessage& m) { return m.ticker; });
        cp.prices = prices_of(data.prices, ctx.ticker_symbol);

        CleanArtifacts cleaned = clean_company(msgs, cfg);
        cp.cleaned_llm = std::move(cleaned.llm);
        cp.cleaned_bert = std::move(cleaned.bert);
        cp.audit = std::move(cleaned.audit);

        cp.gpt_records = score_gpt_company(cp.cleaned_llm, ctx, cfg, ledger);
        cp.bert_records = bert_records_from_rows(cp.cleaned_bert, data.bert_rows);

        auto gpt_art = featurize_company(cp.prices, cp.cleaned_llm, cp.gpt_records,
                                         ctx.ticker_symbol, cfg.threads);
        auto bert_art = featurize_company(cp.prices, cp.cleaned_bert,
                                          cp.bert_records, ctx.ticker_symbol,
                                          cfg.threads);
        cp.labels = gpt_art.labels;
        cp.trading_days = gpt_art.trading_days;
        cp.label_dates = gpt_art.label_dates;
        cp.gpt_daily = std::move(gpt_art.daily);
        cp.bert_daily = std::move(bert_art.daily);
        cp.counts = count_advantage_calls(ctx.ticker_symbol, cp.gpt_records);
        cp.gpt_cost = ledger.total;

        auto warn = external_warnings(data, cp.cleaned_bert);
        result.warnings.insert(result.warnings.end(), warn.begin(), warn.end());

        bert_stack.push_back(
            CompanyDaily{ctx.ticker_symbol, cp.bert_daily, cp.labels});
        gpt_stack.push_back(
            CompanyDaily{ctx.ticker_symbol, cp.gpt_daily, cp.labels});
        result.companies.push_back(std::move(cp));
    }

    result.bert_dm = stack(bert_stack, RegressorSet::bert);
    result.gpt_dm = stack(gpt_stack, RegressorSet::gpt);
    result.reports =
        run_splits(result.bert_dm, result.gpt_dm, split_plans(cfg), cfg.threads);
    result.total_cost = ledger.total;
    return result;
}

// ---------------------------------------------------------------------------
// Staged commands.
// ---------------------------------------------------------------------------

namespace {

std::filesystem::path opath(const PipelineConfig& cfg, const char* name) {
    return cfg.output_dir / name;
}

// Groups cleaned messages by ticker preserving file order.
std::unordered_map<std::string, std::vector<CleanedMessage>> group_cleaned(
    std::vector<CleanedMessage> msgs) {
    std::unordered_map<std::string, std::vector<CleanedMessage>> by_ticker;
    for (auto& m : msgs) by_ticker[m.ticker].push_back(std::move(m));
    return by_ticker;
}

std::unordered_map<std::string, std::vector<SentimentRecord>> group_records(
    std::vector<SentimentRecord> records,
    const std::unordered_map<std::string, std::string>& ticker_of_id) {
    std::unordered_map<std::string, std::vector<SentimentRecord>> by_ticker;
    for (auto& r : records) {
        auto it = ticker_of_id.find(r.message_id);
        if (it == ticker_of_id.end())
            throw IntegrityError("record '" + r.message_id +
                                 "' has no cleaned message");
        by_ticker[it->second].push_back(std::move(r));
    }
    return by_ticker;
}

std::unordered_map<std::string, std::string> ticker_index(
    std::span<const CleanedMessage> msgs) {
    std::unordered_map<std::string, std::string> idx;
    for (const auto& m : msgs) idx.emplace(m.id, m.ticker);
    return idx;
}

}  // namespace

void cmd_clean(const PipelineConfig& cfg) {
    auto messages =
        load_messages(cfg.messages_path, format_from_extension(cfg.messages_path));
    std::filesystem::create_directories(cfg.output_dir);

    std::vector<CleanedMessage> all_llm, all_bert;
    std::vector<CleaningAuditRow> all_audit;
    for (const auto& ctx : cfg.companies) {
        auto msgs = of_ticker(std::span<const RawMessage>(messages),
                              ctx.ticker_symbol,
                              [](const RawMessage& m) { return m.ticker; });
        CleanArtifacts art = clean_company(msgs, cfg);
        all_llm.insert(all_llm.end(), art.llm.begin(), art.llm.end());
        all_bert.insert(all_bert.end(), art.bert.begin(), art.bert.end());
        all_audit.insert(all_audit.end(), art.audit.begin(), art.audit.end());
    }
    write_cleaned_jsonl(opath(cfg, outfile::cleaned_llm), all_llm);
    write_cleaned_jsonl(opath(cfg, outfile::cleaned_bert), all_bert);
    write_cleaning_audit(opath(cfg, outfile::cleaning_audit), all_audit);
}

void cmd_score(const PipelineConfig& cfg) {
    auto llm = load_cleaned_jsonl(opath(cfg, outfile::cleaned_llm));
    auto bert = load_cleaned_jsonl(opath(cfg, outfile::cleaned_bert));
    auto llm_by_ticker = group_cleaned(std::move(llm));
    auto bert_by_ticker = group_cleaned(std::move(bert));

    std::vector<ExternalSentimentRow> bert_rows;
    if (!cfg.bert_sentiments_path.empty())
        bert_rows = load_external_sentiments(cfg.bert_sentiments_path);

    CostLedger ledger;
    std::vector<SentimentRecord> gpt_records, bert_records;
    for (const auto& ctx : cfg.companies) {
        const auto& lm = llm_by_ticker[ctx.ticker_symbol];
        auto recs = score_gpt_company(lm, ctx, cfg, ledger);
        gpt_records.insert(gpt_records.end(), recs.begin(), recs.end());
        const auto& bm = bert_by_ticker[ctx.ticker_symbol];
        auto brecs = bert_records_from_rows(bm, bert_rows);
        bert_records.insert(bert_records.end(), brecs.begin(), brecs.end());
    }
    write_records_jsonl(opath(cfg, outfile::records_gpt), gpt_records);
    write_records_jsonl(opath(cfg, outfile::records_bert), bert_records);

    json ledger_json{{"requests", ledger.requests}, {"total_usd", ledger.total}};
    write_file(opath(cfg, outfile::cost_ledger), ledger_json.dump(2) + "\n");
    print_cost_ledger(ledger);
}

void cmd_featurize(const PipelineConfig& cfg) {
    auto prices =
        load_prices(cfg.prices_path, format_from_extension(cfg.prices_path));
    auto llm_msgs = load_cleaned_jsonl(opath(cfg, outfile::cleaned_llm));
    auto bert_msgs = load_cleaned_jsonl(opath(cfg, outfile::cleaned_bert));
    auto llm_index = ticker_index(llm_msgs);
    auto bert_index = ticker_index(bert_msgs);
    auto llm_by_ticker = group_cleaned(std::move(llm_msgs));
    auto bert_by_ticker = group_cleaned(std::move(bert_msgs));
    auto gpt_by_ticker = group_records(
        load_records_jsonl(opath(cfg, outfile::records_gpt)), llm_index);
    auto bert_rec_by_ticker = group_records(
        load_records_jsonl(opath(cfg, outfile::records_bert)), bert_index);

    std::vector<CompanyDaily> bert_stack, gpt_stack;
    std::vector<DailyFeatures> gpt_features, bert_features;
    for (const auto& ctx : cfg.companies) {
        auto pbars = prices_of(prices, ctx.ticker_symbol);
        auto gpt_art = featurize_company(pbars, llm_by_ticker[ctx.ticker_symbol],
                                         gpt_by_ticker[ctx.ticker_symbol],
                                         ctx.ticker_symbol, cfg.threads);
        auto bert_art = featurize_company(pbars, bert_by_ticker[ctx.ticker_symbol],
                                          bert_rec_by_ticker[ctx.ticker_symbol],
                                          ctx.ticker_symbol, cfg.threads);
        gpt_features.insert(gpt_features.end(), gpt_art.daily.begin(),
                            gpt_art.daily.end());
        bert_features.insert(bert_features.end(), bert_art.daily.begin(),
                             bert_art.daily.end());
        gpt_stack.push_back(CompanyDaily{ctx.ticker_symbol, gpt_art.daily,
                                         gpt_art.labels});
        bert_stack.push_back(CompanyDaily{ctx.ticker_symbol, bert_art.daily,
                                          bert_art.labels});
    }
    write_features_csv(opath(cfg, outfile::features_gpt), gpt_features);
    write_features_csv(opath(cfg, outfile::features_bert), bert_features);
    write_design_csv(opath(cfg, outfile::design_gpt),
                     stack(gpt_stack, RegressorSet::gpt));
    write_design_csv(opath(cfg, outfile::design_bert),
                     stack(bert_stack, RegressorSet::bert));
}

void cmd_fit(const PipelineConfig& cfg) {
    auto gpt_dm = load_design_csv(opath(cfg, outfile::design_gpt));
    auto bert_dm = load_design_csv(opath(cfg, outfile::design_bert));
    write_file(opath(cfg, outfile::fit_gpt), fit_to_json(fit_logistic(gpt_dm)) + "\n");
    write_file(opath(cfg, outfile::fit_bert),
               fit_to_json(fit_logistic(bert_dm)) + "\n");
}

void cmd_evaluate(const PipelineConfig& cfg) {
    auto gpt_dm = load_design_csv(opath(cfg, outfile::design_gpt));
    auto bert_dm = load_design_csv(opath(cfg, outfile::design_bert));
    auto reports = run_splits(bert_dm, gpt_dm, split_plans(cfg), cfg.threads);
    write_file(opath(cfg, outfile::results_csv), results_csv_text(reports));
}

void cmd_report(const PipelineConfig& cfg) {
    auto gpt_dm = load_design_csv(opath(cfg, outfile::design_gpt));
    auto bert_dm = load_design_csv(opath(cfg, outfile::design_bert));
    auto reports = run_splits(bert_dm, gpt_dm, split_plans(cfg), cfg.threads);

    auto eda = load_features_csv(opath(cfg, outfile::features_gpt));
    auto llm_index =
        ticker_index(load_cleaned_jsonl(opath(cfg, outfile::cleaned_llm)));
    auto gpt_by_ticker = group_records(
        load_records_jsonl(opath(cfg, outfile::records_gpt)), llm_index);
    std::vector<AdvantageCounts> counts;
    for (const auto& ctx : cfg.companies)
        counts.push_back(count_advantage_calls(ctx.ticker_symbol,
                                               gpt_by_ticker[ctx.ticker_symbol]));
    emit_report(reports, eda, counts, cfg.output_dir);
}

void cmd_run(const PipelineConfig& cfg, bool force) {
    std::filesystem::create_directories(cfg.output_dir);
    RunManifest manifest(cfg.output_dir);
    const std::vector<std::string> order = {"clean", "score", "featurize",
                                            "fit", "evaluate", "report"};

    auto eda_outputs = [&] {
        std::vector<std::filesystem::path> outs = {
            opath(cfg, outfile::results_csv), opath(cfg, outfile::results_txt),
            opath(cfg, outfile::counts_summary)};
        for (const auto& c : cfg.companies) {
            outs.push_back(cfg.output_dir /
                           ("eda_sentiment_" + c.ticker_symbol + ".csv"));
            outs.push_back(cfg.output_dir /
                           ("eda_advantage_" + c.ticker_symbol + ".csv"));
            outs.push_back(cfg.output_dir /
                           ("eda_scatter_" + c.ticker_symbol + ".csv"));
        }
        return outs;
    };

    struct Stage {
        std::string name;
        std::function<std::string()> digest;
        std::vector<std::filesystem::path> outputs;
        std::function<void()> run;
    };

    std::vector<Stage> stages;
    stages.push_back(Stage{
        "clean",
        [&] {
            std::uint64_t d = digest_file(cfg.messages_path);
            d = hash_combine(d, fnv1a64(companies_slice(cfg)));
            return digest_hex(d);
        },
        {opath(cfg, outfile::cleaned_llm), opath(cfg, outfile::cleaned_bert),
         opath(cfg, outfile::cleaning_audit)},
        [&] { cmd_clean(cfg); }});
    stages.push_back(Stage{
        "score",
        [&] {
            std::uint64_t d = digest_file(opath(cfg, outfile::cleaned_llm));
            d = hash_combine(d, digest_file(opath(cfg, outfile::cleaned_bert)));
            d = hash_combine(d, digest_file(cfg.bert_sentiments_path));
            if (cfg.provider.kind == ProviderKind::replay)
                d = hash_combine(d, digest_file(cfg.provider.replay_cache_path));
            d = hash_combine(d, fnv1a64(provider_slice(cfg.provider)));
            return digest_hex(d);
        },
        {opath(cfg, outfile::records_gpt), opath(cfg, outfile::records_bert),
         opath(cfg, outfile::cost_ledger)},
        [&] { cmd_score(cfg); }});
    stages.push_back(Stage{
        "featurize",
        [&] {
            std::uint64_t d = digest_file(opath(cfg, outfile::records_gpt));
            d = hash_combine(d, digest_file(opath(cfg, outfile::records_bert)));
            d = hash_combine(d, digest_file(opath(cfg, outfile::cleaned_llm)));
            d = hash_combine(d, digest_file(opath(cfg, outfile::cleaned_bert)));
            d = hash_combine(d, digest_file(cfg.prices_path));
            return digest_hex(d);
        },
        {opath(cfg, outfile::features_gpt), opath(cfg, outfile::features_bert),
         opath(cfg, outfile::design_gpt), opath(cfg, outfile::design_bert)},
        [&] { cmd_featurize(cfg); }});
    stages.push_back(Stage{
        "fit",
        [&] {
            std::uint64_t d = digest_file(opath(cfg, outfile::design_gpt));
            d = hash_combine(d, digest_file(opath(cfg, outfile::design_bert)));
            return digest_hex(d);
        },
        {opath(cfg, outfile::fit_gpt), opath(cfg, outfile::fit_bert)},
        [&] { cmd_fit(cfg); }});
    stages.push_back(Stage{
        "evaluate",
        [&] {
            std::uint64_t d = digest_file(opath(cfg, outfile::design_gpt));
            d = hash_combine(d, digest_file(opath(cfg, outfile::design_bert)));
            d = hash_combine(d, fnv1a64(splits_slice(cfg)));
            return digest_hex(d);
        },
        {opath(cfg, outfile::results_csv)},
        [&] { cmd_evaluate(cfg); }});
    stages.push_back(Stage{
        "report",
        [&] {
            std::uint64_t d = digest_file(opath(cfg, outfile::design_gpt));
            d = hash_combine(d, digest_file(opath(cfg, outfile::design_bert)));
            d = hash_combine(d, digest_file(opath(cfg, outfile::features_gpt)));
            d = hash_combine(d, digest_file(opath(cfg, outfile::records_gpt)));
            d = hash_combine(d, fnv1a64(splits_slice(cfg)));
            return digest_hex(d);
        },
        eda_outputs(),
        [&] { cmd_report(cfg); }});

    for (const auto& stage : stages) {
        std::string digest = stage.digest();
        if (!force && manifest.up_to_date(stage.name, digest, stage.outputs)) {
            std::printf("stage %-9s up to date, skipped\n", stage.name.c_str());
            continue;
        }
        try {
            stage.run();
        } catch (...) {
            manifest.invalidate_from(stage.name, order);
            throw;
        }
        manifest.record(stage.name, digest, stage.outputs);
        std::printf("stage %-9s done\n", stage.name.c_str());
    }
}

}  // namespace stocksent
