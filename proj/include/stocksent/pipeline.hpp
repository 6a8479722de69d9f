#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stocksent/config.hpp"
#include "stocksent/evalstat.hpp"
#include "stocksent/featurize.hpp"
#include "stocksent/glm.hpp"
#include "stocksent/ingest.hpp"
#include "stocksent/respparse.hpp"
#include "stocksent/scorer.hpp"
#include "stocksent/textprep.hpp"

namespace stocksent {

/// In-memory input set; what the file loaders produce.
struct PipelineData {
    std::vector<RawMessage> messages;
    std::vector<PriceBar> prices;
    std::vector<ExternalSentimentRow> bert_rows;
};

/// Everything the pipeline derives for one company.
struct CompanyPipeline {
    CompanyContext ctx;
    std::vector<PriceBar> prices;
    std::vector<MovementLabel> labels;
    std::vector<Date> trading_days;
    std::vector<Date> label_dates;

    std::vector<CleanedMessage> cleaned_llm;
    std::vector<CleanedMessage> cleaned_bert;
    std::vector<CleaningAuditRow> audit;

    std::vector<SentimentRecord> gpt_records;   // one per cleaned_llm message
    std::vector<SentimentRecord> bert_records;  // one per cleaned_bert message
    std::vector<DailyFeatures> gpt_daily;
    std::vector<DailyFeatures> bert_daily;
    AdvantageCounts counts;
    double gpt_cost = 0.0;
};

struct PipelineResult {
    std::vector<CompanyPipeline> companies;
    DesignMatrix bert_dm;
    DesignMatrix gpt_dm;
    std::vector<EvalReport> reports;
    std::vector<std::string> warnings;
    double total_cost = 0.0;
};

/// The whole flow in memory: clean -> score -> featurize -> stack ->
/// evaluate. The staged commands below persist the same artifacts between
/// steps.
PipelineResult run_pipeline(const PipelineData& data, const PipelineConfig& cfg);

PipelineData load_pipeline_inputs(const PipelineConfig& cfg);

// Staged commands (the CLI surface). Each reads its predecessor's files
// from cfg.output_dir and writes its own.
void cmd_clean(const PipelineConfig& cfg);
void cmd_score(const PipelineConfig& cfg);
void cmd_featurize(const PipelineConfig& cfg);
void cmd_fit(const PipelineConfig& cfg);
void cmd_evaluate(const PipelineConfig& cfg);
void cmd_report(const PipelineConfig& cfg);

/// Runs every stage in order. Stages whose recorded input digest still
/// matches are skipped unless `force` is set; a failed stage drops its
/// manifest entry (and everything downstream) so the next run rebuilds it.
void cmd_run(const PipelineConfig& cfg, bool force = false);

// Output file names inside cfg.output_dir.
namespace outfile {
inline constexpr const char* cleaned_llm = "cleaned_llm.jsonl";
inline constexpr const char* cleaned_bert = "cleaned_bert.jsonl";
inline constexpr const char* cleaning_audit = "cleaning_audit.jsonl";
inline constexpr const char* records_gpt = "records_gpt.jsonl";
inline constexpr const char* records_bert = "records_bert.jsonl";
inline constexpr const char* cost_ledger = "cost_ledger.json";
inline constexpr const char* features_gpt = "features_gpt.csv";
inline constexpr const char* features_bert = "features_bert.csv";
inline constexpr const char* design_gpt = "design_gpt.csv";
inline constexpr const char* design_bert = "design_bert.csv";
inline constexpr const char* fit_gpt = "fit_gpt.json";
inline constexpr const char* fit_bert = "fit_bert.json";
inline constexpr const char* results_csv = "results.csv";
inline constexpr const char* results_txt = "results.txt";
inline constexpr const char* counts_summary = "counts_summary.csv";
inline constexpr const char* manifest = "manifest.json";
}  // namespace outfile

}  // namespace stocksent
