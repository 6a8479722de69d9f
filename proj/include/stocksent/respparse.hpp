#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stocksent/scorer.hpp"

namespace stocksent {

enum class ParseStatus { parsed, na, unparseable };

std::string_view parse_status_name(ParseStatus s);
ParseStatus parse_status_from_name(std::string_view s);

/// Validated provider output for one message. Probability blocks are only
/// meaningful when status == parsed; the sentiment block is always present
/// on a parsed record, advantage and relation may be absent.
struct SentimentRecord {
    std::string message_id;
    ParseStatus status = ParseStatus::unparseable;
    std::array<double, 5> sentiment_probs{};  // classes 1(neg)..5(pos)
    bool has_advantage = false;
    std::array<double, 2> advantage_probs{};  // Advantage, Disadvantage
    bool has_relation = false;
    std::array<double, 3> relation_probs{};   // Mostly company, competitor, Unrelated

    bool operator==(const SentimentRecord&) const = default;
};

/// Total parse: every input yields exactly one of parsed/na/unparseable.
/// Accepts the bracketed three-block layout as well as a bare sentiment
/// probability list; tolerates single/double/no quotes, case and whitespace
/// variation. Blocks whose probabilities sum outside [0.97, 1.03] make the
/// whole record unparseable; sums inside are renormalized to 1.
SentimentRecord parse_response_text(std::string_view message_id,
                                    std::string_view text);

/// Failure responses (no text) map to unparseable.
SentimentRecord parse_response(const RawResponse& resp);

/// Record for an external 5-class sentiment row (probabilities already
/// normalized): parsed status, sentiment block only.
SentimentRecord record_from_external(const ExternalSentimentRow& row);

/// Sentiment class 1..5, the argmax of the sentiment block; ties break
/// toward the lower class. Requires status == parsed.
int classify_sentiment(const SentimentRecord& rec);

enum class AdvantageCall { advantage, disadvantage, equal };

/// Advantage if P(advantage) > 0.5, disadvantage if < 0.5, equal when it is
/// 0.5 to within 1e-9. Requires a parsed record carrying an advantage block.
AdvantageCall classify_advantage(const SentimentRecord& rec);

/// Canonical bracketed rendering of a parsed record; reparsing it yields an
/// equal record. The relation block names `company_display`.
std::string canonical_text(const SentimentRecord& rec,
                           std::string_view company_display = "Apple");

// Persistence: JSONL with message_id, status and the blocks that exist.
void write_records_jsonl(const std::filesystem::path& p,
                         std::span<const SentimentRecord> records);
std::vector<SentimentRecord> load_records_jsonl(const std::filesystem::path& p);

// Corpus kernel: parse every response. Failure records come out unparseable.
std::vector<SentimentRecord> parse_all(std::span<const RawResponse> responses,
                                       int threads = 0);
namespace serial {
std::vector<SentimentRecord> parse_all(std::span<const RawResponse> responses);
}

}  // namespace stocksent
