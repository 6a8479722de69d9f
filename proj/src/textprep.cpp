#include "stocksent/textprep.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>
#include <omp.h>

#include "stocksent/errors.hpp"
#include "stocksent/util.hpp"

namespace stocksent {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

void note(std::vector<std::string>* hits, const char* rule) {
    if (!hits) return;
    for (const auto& h : *hits)
        if (h == rule) return;
    hits->emplace_back(rule);
}

// Case-insensitive search for `needle` (ASCII) in s starting at pos.
size_t ifind(std::string_view s, std::string_view needle, size_t pos) {
    if (needle.empty() || s.size() < needle.size()) return std::string_view::npos;
    for (size_t i = pos; i + needle.size() <= s.size(); ++i) {
        size_t j = 0;
        for (; j < needle.size(); ++j) {
            char a = s[i + j], b = needle[j];
            if (a >= 'A' && a <= 'Z') a = char(a - 'A' + 'a');
            if (b >= 'A' && b <= 'Z') b = char(b - 'A' + 'a');
            if (a != b) break;
        }
        if (j == needle.size()) return i;
    }
    return std::string_view::npos;
}

// Removes [img]...[/img] spans and markdown ![...](...) images together
// with the whitespace run that follows them. Unterminated markup is left
// alone.
std::string strip_image_markup(std::string_view s, std::vector<std::string>* hits) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    auto skip_gap = [&](size_t from) {
        while (from < s.size() && is_space(s[from])) ++from;
        return from;
    };
    while (i < s.size()) {
        if (ifind(s, "[img]", i) == i) {
            size_t close = ifind(s, "[/img]", i + 5);
            if (close != std::string_view::npos) {
                i = skip_gap(close + 6);
                note(hits, "strip_images");
                continue;
            }
        }
        if (s[i] == '!' && i + 1 < s.size() && s[i + 1] == '[') {
            size_t rb = s.find(']', i + 2);
            if (rb != std::string_view::npos && rb + 1 < s.size() && s[rb + 1] == '(') {
                size_t rp = s.find(')', rb + 2);
                if (rp != std::string_view::npos) {
                    i = skip_gap(rp + 1);
                    note(hits, "strip_images");
                    continue;
                }
            }
        }
        out.push_back(s[i]);
        ++i;
    }
    return out;
}

bool looks_like_url(std::string_view token) {
    if (token.size() >= 5 && ifind(token, "www.", 0) == 0) return true;
    size_t sep = token.find("://");
    if (sep == std::string_view::npos || sep == 0) return false;
    for (size_t i = 0; i < sep; ++i) {
        char c = token[i];
        bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
        if (!alpha && c != '+' && c != '-' && c != '.') return false;
    }
    return true;
}

// Drops whitespace-delimited tokens matching a predicate, together with the
// whitespace run that followed them.
template <typename Pred>
std::string drop_tokens(std::string_view s, Pred pred, std::vector<std::string>* hits,
                        const char* rule) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        if (is_space(s[i])) {
            out.push_back(s[i]);
            ++i;
            continue;
        }
        size_t end = i;
        while (end < s.size() && !is_space(s[end])) ++end;
        std::string_view token = s.substr(i, end - i);
        if (pred(token)) {
            note(hits, rule);
            while (end < s.size() && is_space(s[end])) ++end;  // eat the gap
        } else {
            out.append(token);
        }
        i = end;
    }
    return out;
}

// Squeezes whitespace runs to single spaces and trims the ends.
std::string collapse_whitespace(std::string_view s, std::vector<std::string>* hits) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            if (!out.empty()) pending_space = true;
        } else {
            if (pending_space) {
                out.push_back(' ');
                pending_space = false;
            }
            out.push_back(c);
        }
    }
    if (std::string_view(out) != s) note(hits, "collapse_ws");
    return out;
}

std::string_view trim_ws(std::string_view s) {
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    return s;
}

}  // namespace

std::string_view profile_name(CleaningProfile p) {
    return p == CleaningProfile::llm_profile ? "llm_profile" : "bert_profile";
}

std::vector<std::string> profile_rules(CleaningProfile p) {
    std::vector<std::string> rules = {"strip_images", "strip_urls", "lowercase"};
    if (p == CleaningProfile::bert_profile) {
        rules.insert(rules.end(), {"strip_tagged_tokens", "strip_non_ascii",
                                   "strip_digits", "strip_punct", "collapse_ws"});
    }
    return rules;
}

std::string apply_llm_rules(std::string_view body, std::vector<std::string>* hits) {
    std::string s = strip_image_markup(body, hits);
    std::string no_urls = drop_tokens(s, looks_like_url, hits, "strip_urls");
    std::string lowered = to_lower_ascii(no_urls);
    if (lowered != no_urls) note(hits, "lowercase");
    std::string out(trim_ws(lowered));
    return out;
}

std::string apply_bert_rules(std::string_view body, std::vector<std::string>* hits) {
    std::string s = apply_llm_rules(body, hits);
    s = drop_tokens(
        s,
        [](std::string_view t) {
            return !t.empty() && (t[0] == '#' || t[0] == '$' || t[0] == '@');
        },
        hits, "strip_tagged_tokens");
    // Character pass: anything outside [a-z] and space becomes a space, so
    // removed punctuation still separates words ("ago...long" -> "ago long").
    std::string filtered;
    filtered.reserve(s.size());
    for (unsigned char c : s) {
        if ((c >= 'a' && c <= 'z') || c == ' ') {
            filtered.push_back(static_cast<char>(c));
        } else {
            if (c >= 0x80)
                note(hits, "strip_non_ascii");
            else if (c >= '0' && c <= '9')
                note(hits, "strip_digits");
            else if (!is_space(static_cast<char>(c)))
                note(hits, "strip_punct");
            filtered.push_back(' ');
        }
    }
    std::string collapsed = collapse_whitespace(filtered, hits);
    std::string out(trim_ws(collapsed));
    return out;
}

DuplicateRegistry DuplicateRegistry::build(std::span<const RawMessage> history) {
    // Pure per-message cleaning is done in parallel; registration itself is
    // a single ordered pass.
    std::vector<std::string> bodies(history.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(history.size()); ++i) {
        bodies[i] = apply_llm_rules(history[i].body);
    }

    std::vector<size_t> order(history.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return std::tie(history[a].timestamp_utc, history[a].id) <
               std::tie(history[b].timestamp_utc, history[b].id);
    });

    DuplicateRegistry reg;
    reg.first_seen_.reserve(history.size());
    for (size_t idx : order) {
        if (bodies[idx].empty()) continue;
        reg.first_seen_.try_emplace(bodies[idx],
                                    FirstSeen{history[idx].timestamp_utc,
                                              history[idx].id});
    }
    return reg;
}

bool DuplicateRegistry::is_duplicate(const RawMessage& msg,
                                     const std::string& cleaned_llm_body) const {
    auto it = first_seen_.find(cleaned_llm_body);
    if (it == first_seen_.end()) return false;
    return it->second.timestamp_utc != msg.timestamp_utc || it->second.id != msg.id;
}

namespace {

CleanOutcome clean_one(const RawMessage& msg, CleaningProfile profile,
                       const DuplicateRegistry& seen) {
    CleanOutcome out;
    std::string llm_body = apply_llm_rules(msg.body, &out.rule_hits);
    if (llm_body.empty()) {
        out.status = CleanStatus::empty_after_clean;
        return out;
    }
    if (seen.is_duplicate(msg, llm_body)) {
        out.status = CleanStatus::duplicate;
        note(&out.rule_hits, "dedup");
        return out;
    }
    std::string body = llm_body;
    if (profile == CleaningProfile::bert_profile) {
        body = apply_bert_rules(msg.body, &out.rule_hits);
        if (body.empty()) {
            out.status = CleanStatus::empty_after_clean;
            return out;
        }
    }
    out.status = CleanStatus::ok;
    out.message = CleanedMessage{msg.id, msg.timestamp_utc, msg.ticker,
                                 std::move(body), profile};
    return out;
}

}  // namespace

CleanOutcome clean_llm(const RawMessage& msg, const DuplicateRegistry& seen) {
    if (msg.body.empty()) throw ParseError("message body empty before cleaning");
    return clean_one(msg, CleaningProfile::llm_profile, seen);
}

CleanOutcome clean_bert(const RawMessage& msg, const DuplicateRegistry& seen) {
    if (msg.body.empty()) throw ParseError("message body empty before cleaning");
    return clean_one(msg, CleaningProfile::bert_profile, seen);
}

std::vector<CleanOutcome> clean_corpus(std::span<const RawMessage> msgs,
                                       CleaningProfile profile,
                                       const DuplicateRegistry& seen, int threads) {
    std::vector<CleanOutcome> out(msgs.size());
    int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nthreads)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(msgs.size()); ++i) {
        out[i] = clean_one(msgs[i], profile, seen);
    }
    return out;
}

namespace serial {
std::vector<CleanOutcome> clean_corpus(std::span<const RawMessage> msgs,
                                       CleaningProfile profile,
                                       const DuplicateRegistry& seen) {
    std::vector<CleanOutcome> out;
    out.reserve(msgs.size());
    for (const auto& m : msgs) out.push_back(clean_one(m, profile, seen));
    return out;
}
}  // namespace serial

CleaningAuditRow audit_row(const RawMessage& msg, CleaningProfile profile,
                           const CleanOutcome& outcome) {
    CleaningAuditRow row;
    row.id = msg.id;
    row.profile = profile;
    row.rule_hits = outcome.rule_hits;
    row.dropped = outcome.status != CleanStatus::ok;
    if (outcome.status == CleanStatus::duplicate) row.reason = "duplicate";
    if (outcome.status == CleanStatus::empty_after_clean)
        row.reason = "empty_after_clean";
    return row;
}

void write_cleaned_jsonl(const std::filesystem::path& p,
                         std::span<const CleanedMessage> msgs) {
    std::ostringstream out;
    for (const auto& m : msgs) {
        nlohmann::json j;
        j["id"] = m.id;
        j["timestamp_utc"] = format_instant(m.timestamp_utc);
        j["ticker"] = m.ticker;
        j["body"] = m.body;
        j["profile"] = std::string(profile_name(m.profile));
        out << j.dump() << "\n";
    }
    write_file(p, out.str());
}

std::vector<CleanedMessage> load_cleaned_jsonl(const std::filesystem::path& p) {
    std::string text = read_file(p);
    std::vector<CleanedMessage> out;
    long lineno = 0;
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line = trim(std::string_view(text).substr(start, end - start));
        start = end + 1;
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError("malformed cleaned-message line", lineno);
        CleanedMessage m;
        m.id = j.at("id").get<std::string>();
        m.timestamp_utc = parse_instant(j.at("timestamp_utc").get<std::string>());
        m.ticker = j.at("ticker").get<std::string>();
        m.body = j.at("body").get<std::string>();
        std::string prof = j.at("profile").get<std::string>();
        if (prof == "llm_profile") m.profile = CleaningProfile::llm_profile;
        else if (prof == "bert_profile") m.profile = CleaningProfile::bert_profile;
        else throw ParseError("unknown cleaning profile '" + prof + "'", lineno);
        out.push_back(std::move(m));
    }
    return out;
}

void write_cleaning_audit(const std::filesystem::path& p,
                          std::span<const CleaningAuditRow> rows) {
    std::ostringstream out;
    for (const auto& r : rows) {
        nlohmann::json j;
        j["id"] = r.id;
        j["profile"] = std::string(profile_name(r.profile));
        j["rule_hits"] = r.rule_hits;
        j["dropped"] = r.dropped;
        if (r.dropped) j["reason"] = r.reason;
        out << j.dump() << "\n";
    }
    write_file(p, out.str());
}

}  // namespace stocksent
