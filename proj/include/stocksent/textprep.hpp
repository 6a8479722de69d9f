#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stocksent/ingest.hpp"

namespace stocksent {

// Two cleaning profiles. The llm profile is gentle (the scoring model sees
// near-raw text); the bert profile strips everything the 5-class sentiment
// model chokes on. Every llm rule is also a bert rule.
enum class CleaningProfile { llm_profile, bert_profile };

std::string_view profile_name(CleaningProfile p);

/// Ordered rule identifiers applied under a profile (also the vocabulary of
/// the cleaning audit's rule_hits field).
std::vector<std::string> profile_rules(CleaningProfile p);

struct CleanedMessage {
    std::string id;
    Instant timestamp_utc = 0;
    std::string ticker;
    std::string body;
    CleaningProfile profile = CleaningProfile::llm_profile;

    bool operator==(const CleanedMessage&) const = default;
};

enum class CleanStatus { ok, duplicate, empty_after_clean };

struct CleanOutcome {
    CleanStatus status = CleanStatus::ok;
    CleanedMessage message;                // valid when status == ok
    std::vector<std::string> rule_hits;    // rules that changed something
};

// Duplicate registry across the full message history. The key is the
// llm-cleaned body (exact string equality); value is the first occurrence
// ordered by (timestamp, id). Bodies that clean to empty are not registered:
// emptiness is decided before the duplicate check.
class DuplicateRegistry {
public:
    static DuplicateRegistry build(std::span<const RawMessage> history);

    /// True when `cleaned_llm_body` was first seen on an earlier message.
    bool is_duplicate(const RawMessage& msg,
                      const std::string& cleaned_llm_body) const;

    size_t size() const { return first_seen_.size(); }

private:
    struct FirstSeen {
        Instant timestamp_utc;
        std::string id;
    };
    std::unordered_map<std::string, FirstSeen> first_seen_;
};

// Body transforms, exposed for tests. rule_hits (optional) collects the
// identifiers of rules that fired.
std::string apply_llm_rules(std::string_view body,
                            std::vector<std::string>* rule_hits = nullptr);
std::string apply_bert_rules(std::string_view body,
                             std::vector<std::string>* rule_hits = nullptr);

CleanOutcome clean_llm(const RawMessage& msg, const DuplicateRegistry& seen);
CleanOutcome clean_bert(const RawMessage& msg, const DuplicateRegistry& seen);

// Corpus-level kernels. The OpenMP version writes each outcome into its
// input slot, so output order (and bytes) match the serial reference.
std::vector<CleanOutcome> clean_corpus(std::span<const RawMessage> msgs,
                                       CleaningProfile profile,
                                       const DuplicateRegistry& seen,
                                       int threads = 0);

namespace serial {
std::vector<CleanOutcome> clean_corpus(std::span<const RawMessage> msgs,
                                       CleaningProfile profile,
                                       const DuplicateRegistry& seen);
}

/// One line of the cleaning audit: which rules fired, whether the message
/// was dropped and why.
struct CleaningAuditRow {
    std::string id;
    CleaningProfile profile = CleaningProfile::llm_profile;
    std::vector<std::string> rule_hits;
    bool dropped = false;
    std::string reason;  // "duplicate" or "empty_after_clean" when dropped
};

CleaningAuditRow audit_row(const RawMessage& msg, CleaningProfile profile,
                           const CleanOutcome& outcome);

void write_cleaned_jsonl(const std::filesystem::path& p,
                         std::span<const CleanedMessage> msgs);
std::vector<CleanedMessage> load_cleaned_jsonl(const std::filesystem::path& p);
void write_cleaning_audit(const std::filesystem::path& p,
                          std::span<const CleaningAuditRow> rows);

}  // namespace stocksent
