#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "stocksent/ingest.hpp"
#include "stocksent/scorer.hpp"

namespace stocksent {

/// Parameters of the synthetic corpus generator. Messages are shaped so the
/// mock provider's verdicts follow a per-day latent mood; labels are drawn
/// either from a logistic model on the realized daily features (planted
/// signal) or as fair coin flips (null).
struct SynthSpec {
    std::vector<CompanyContext> companies = {{"Apple", "AAPL"}, {"Tesla", "TSLA"}};
    int year = 2017;
    double mean_messages_per_day = 50.0;
    std::uint64_t seed = 1;

    bool planted_signal = true;
    double coef_sentiment = 0.8;   // on avg_sentiment
    double coef_advantage = 0.05;  // on adv_count - dis_count

    double duplicate_fraction = 0.01;  // repeated ad-style bodies
    double noise_fraction = 0.18;      // unconstrained bodies (may score NA)

    ProviderConfig provider;  // mock settings the pipeline will also use
    int threads = 0;
};

struct SynthCorpus {
    std::vector<RawMessage> messages;
    std::vector<PriceBar> prices;
    std::vector<ExternalSentimentRow> bert_rows;
};

/// Deterministic in `spec.seed` (including across thread counts). The mock
/// provider inside `spec.provider` is seeded with `spec.seed`, matching what
/// a pipeline run with the same seed will compute.
SynthCorpus generate_corpus(const SynthSpec& spec);

void write_corpus(const SynthCorpus& corpus,
                  const std::filesystem::path& messages_path,
                  const std::filesystem::path& prices_path,
                  const std::filesystem::path& bert_path);

}  // namespace stocksent
