#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stocksent/promptkit.hpp"

namespace stocksent {

enum class ProviderKind { remote_chat, mock, replay, external_file };

std::string_view provider_kind_name(ProviderKind k);
ProviderKind provider_kind_from_name(std::string_view s);

struct ProviderConfig {
    ProviderKind kind = ProviderKind::mock;
    std::string endpoint_url;             // remote_chat only
    std::string api_key_env = "OPENAI_API_KEY";
    std::string model_id = "gpt-4";
    int max_concurrency = 4;
    int retry_limit = 3;                  // retries after the first attempt
    std::chrono::milliseconds request_timeout{30000};
    std::chrono::milliseconds backoff_base{1000};  // doubles per retry, jittered

    // mock provider
    std::uint64_t seed = 0;
    double na_fraction = 0.175;
    double cost_per_request = 0.01;       // USD, also used for remote estimates

    // replay source / remote recording target
    std::filesystem::path replay_cache_path;
    bool record_replay = true;

    // external_file provider source (5-class sentiment CSV)
    std::filesystem::path external_sentiments_path;
};

/// Provider output (or failure) for one message.
struct RawResponse {
    std::string message_id;
    bool ok = false;
    std::string text;
    double latency_ms = 0.0;
    double cost_estimate = 0.0;
    int attempt_count = 0;
    std::string error;  // set when !ok
};

/// A prompt paired with the message it scores.
struct PromptJob {
    std::string message_id;
    PromptBundle bundle;
};

struct BatchResult {
    std::vector<RawResponse> responses;  // same order as the input jobs
    double total_cost = 0.0;             // sum of per-response cost estimates
};

/// Scores a batch against the configured provider. Responses come back in
/// input order no matter how requests complete; failures become failure
/// records rather than being dropped. Authentication rejection aborts the
/// whole batch (AuthError).
BatchResult score_batch(std::span<const PromptJob> jobs, const ProviderConfig& cfg);

/// What the mock provider would decide for a cleaned body: used by the
/// synthetic-corpus generator to shape per-day distributions without
/// re-parsing response text.
struct MockOutcome {
    bool na = false;
    int sentiment_class = 0;   // 1..5 when !na
    int advantage_call = 0;    // 0 advantage, 1 disadvantage, 2 equal
};
MockOutcome mock_outcome(const ProviderConfig& cfg, std::string_view cleaned_body);

/// External 5-class sentiment probabilities for one message.
struct ExternalSentimentRow {
    std::string message_id;
    std::array<double, 5> probs{};

    bool operator==(const ExternalSentimentRow&) const = default;
};

/// Loads `message_id,p1,p2,p3,p4,p5` CSV. Rows are normalized to sum to 1;
/// a negative probability is a parse error. Id resolution against a corpus
/// happens separately via unknown_external_ids.
std::vector<ExternalSentimentRow> load_external_sentiments(
    const std::filesystem::path& p);

/// Ids present in `rows` but not in `known_ids` (integrity warnings; the
/// rows themselves are kept).
std::vector<std::string> unknown_external_ids(
    std::span<const ExternalSentimentRow> rows,
    std::span<const std::string> known_ids);

// Replay cache (JSONL keyed by message id), written by remote runs and read
// back by the replay provider.
struct ReplayEntry {
    std::string message_id;
    std::string model_id;
    std::string text;
    double cost_estimate = 0.0;
};
void write_replay_cache(const std::filesystem::path& p,
                        std::span<const ReplayEntry> entries);
std::vector<ReplayEntry> load_replay_cache(const std::filesystem::path& p);

}  // namespace stocksent
