#include "stocksent/respparse.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include <json.hpp>
#include <omp.h>

#include "stocksent/errors.hpp"
#include "stocksent/util.hpp"

namespace stocksent {

using nlohmann::json;

namespace {

struct LabeledValue {
    std::string label;  // lowercased, unquoted
    double value;
};

// Scans `text` for label: number pairs. A label is either a quoted string
// or the bare [A-Za-z0-9()] run immediately left of the colon. A colon not
// followed by a number (a block header like "Sentiment:") yields no pair.
std::vector<LabeledValue> scan_pairs(std::string_view text) {
    std::vector<LabeledValue> pairs;
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] != ':') continue;

        // Right side: a number?
        size_t v = i + 1;
        while (v < text.size() && (text[v] == ' ' || text[v] == '\t')) ++v;
        if (v >= text.size()) continue;
        char c = text[v];
        if (!((c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.')) continue;
        std::string numtext(text.substr(v, std::min<size_t>(64, text.size() - v)));
        char* end = nullptr;
        double value = std::strtod(numtext.c_str(), &end);
        if (end == numtext.c_str()) continue;

        // Left side: quoted or bare label.
        size_t e = i;
        while (e > 0 && (text[e - 1] == ' ' || text[e - 1] == '\t')) --e;
        if (e == 0) continue;
        std::string label;
        char q = text[e - 1];
        if (q == '\'' || q == '"') {
            size_t open = text.rfind(q, e - 2);
            if (open == std::string_view::npos) continue;
            label = std::string(text.substr(open + 1, e - 2 - open));
        } else {
            size_t b = e;
            while (b > 0) {
                char lc = text[b - 1];
                bool word = (lc >= 'a' && lc <= 'z') || (lc >= 'A' && lc <= 'Z') ||
                            (lc >= '0' && lc <= '9') || lc == '(' || lc == ')';
                if (!word) break;
                --b;
            }
            if (b == e) continue;
            label = std::string(text.substr(b, e - b));
        }
        pairs.push_back({to_lower_ascii(trim(label)), value});
        i = v + (end - numtext.c_str()) - 1;
    }
    return pairs;
}

// Slot resolution. Returns block index (0 sentiment, 1 advantage,
// 2 relation) and slot within the block, or false for an unknown label.
bool resolve_label(const std::string& label, int& block, int& slot) {
    static const std::array<std::array<const char*, 2>, 5> sentiment = {{
        {"1(neg)", "1"},
        {"2", nullptr},
        {"3", nullptr},
        {"4", nullptr},
        {"5(pos)", "5"},
    }};
    for (int s = 0; s < 5; ++s) {
        for (const char* alias : sentiment[s]) {
            if (alias && label == alias) {
                block = 0;
                slot = s;
                return true;
            }
        }
    }
    if (label == "advantage") { block = 1; slot = 0; return true; }
    if (label == "disadvantage") { block = 1; slot = 1; return true; }
    if (label == "mostly competitor") { block = 2; slot = 1; return true; }
    if (label == "unrelated") { block = 2; slot = 2; return true; }
    if (label.rfind("mostly ", 0) == 0) { block = 2; slot = 0; return true; }
    return false;
}

constexpr std::array<int, 3> kBlockSizes = {5, 2, 3};

}  // namespace

std::string_view parse_status_name(ParseStatus s) {
    switch (s) {
        case ParseStatus::parsed: return "parsed";
        case ParseStatus::na: return "na";
        case ParseStatus::unparseable: return "unparseable";
    }
    return "unparseable";
}

ParseStatus parse_status_from_name(std::string_view s) {
    if (s == "parsed") return ParseStatus::parsed;
    if (s == "na") return ParseStatus::na;
    if (s == "unparseable") return ParseStatus::unparseable;
    throw ParseError("unknown record status '" + std::string(s) + "'");
}

SentimentRecord parse_response_text(std::string_view message_id,
                                    std::string_view text) {
    SentimentRecord rec;
    rec.message_id = std::string(message_id);
    rec.status = ParseStatus::unparseable;

    std::string_view body = trim(text);
    if (body == "NA") {
        rec.status = ParseStatus::na;
        return rec;
    }

    auto pairs = scan_pairs(body);
    if (pairs.empty()) return rec;

    std::array<std::array<double, 5>, 3> values{};
    std::array<std::array<bool, 5>, 3> present{};
    for (const auto& p : pairs) {
        int block = 0, slot = 0;
        if (!resolve_label(p.label, block, slot)) return rec;  // stray pair
        if (present[block][slot]) return rec;                  // duplicate slot
        present[block][slot] = true;
        values[block][slot] = p.value;
    }

    // Each block must be complete or entirely absent; sentiment is required.
    std::array<bool, 3> have{};
    for (int b = 0; b < 3; ++b) {
        int n = 0;
        for (int s = 0; s < kBlockSizes[b]; ++s) n += present[b][s] ? 1 : 0;
        if (n == kBlockSizes[b]) have[b] = true;
        else if (n != 0) return rec;
    }
    if (!have[0]) return rec;

    // Range and sum checks, then renormalization.
    for (int b = 0; b < 3; ++b) {
        if (!have[b]) continue;
        double sum = 0.0;
        for (int s = 0; s < kBlockSizes[b]; ++s) {
            double v = values[b][s];
            if (!(v >= 0.0 && v <= 1.0) || !std::isfinite(v)) return rec;
            sum += v;
        }
        if (sum < 0.97 || sum > 1.03) return rec;
        if (std::abs(sum - 1.0) > 1e-12) {
            for (int s = 0; s < kBlockSizes[b]; ++s) values[b][s] /= sum;
        }
    }

    rec.status = ParseStatus::parsed;
    for (int s = 0; s < 5; ++s) rec.sentiment_probs[s] = values[0][s];
    rec.has_advantage = have[1];
    if (have[1])
        for (int s = 0; s < 2; ++s) rec.advantage_probs[s] = values[1][s];
    rec.has_relation = have[2];
    if (have[2])
        for (int s = 0; s < 3; ++s) rec.relation_probs[s] = values[2][s];
    return rec;
}

SentimentRecord parse_response(const RawResponse& resp) {
    if (!resp.ok) {
        SentimentRecord rec;
        rec.message_id = resp.message_id;
        rec.status = ParseStatus::unparseable;
        return rec;
    }
    return parse_response_text(resp.message_id, resp.text);
}

SentimentRecord record_from_external(const ExternalSentimentRow& row) {
    SentimentRecord rec;
    rec.message_id = row.message_id;
    rec.status = ParseStatus::parsed;
    rec.sentiment_probs = row.probs;
    return rec;
}

int classify_sentiment(const SentimentRecord& rec) {
    if (rec.status != ParseStatus::parsed)
        throw NotScorableError("classify_sentiment on a non-parsed record '" +
                               rec.message_id + "'");
    int best = 0;
    for (int s = 1; s < 5; ++s) {
        if (rec.sentiment_probs[s] > rec.sentiment_probs[best]) best = s;
    }
    return best + 1;
}

AdvantageCall classify_advantage(const SentimentRecord& rec) {
    if (rec.status != ParseStatus::parsed || !rec.has_advantage)
        throw NotScorableError("classify_advantage needs a parsed record with "
                               "an advantage block ('" + rec.message_id + "')");
    double pa = rec.advantage_probs[0];
    if (std::abs(pa - 0.5) <= 1e-9) return AdvantageCall::equal;
    return pa > 0.5 ? AdvantageCall::advantage : AdvantageCall::disadvantage;
}

std::string canonical_text(const SentimentRecord& rec,
                           std::string_view company_display) {
    if (rec.status != ParseStatus::parsed) {
        if (rec.status == ParseStatus::na) return "NA";
        throw NotScorableError("no canonical text for an unparseable record");
    }
    static constexpr std::array<const char*, 5> kSent = {"'1(neg)'", "'2'", "'3'",
                                                         "'4'", "'5(pos)'"};
    std::ostringstream out;
    out << "[Sentiment: ";
    for (int s = 0; s < 5; ++s) {
        if (s) out << ", ";
        out << kSent[s] << ": " << format_double(rec.sentiment_probs[s]);
    }
    if (rec.has_advantage) {
        out << ", Advantage: 'Advantage': " << format_double(rec.advantage_probs[0])
            << ", 'Disadvantage': " << format_double(rec.advantage_probs[1]);
    }
    if (rec.has_relation) {
        out << ", Relation: 'Mostly " << company_display
            << "': " << format_double(rec.relation_probs[0])
            << ", 'Mostly competitor': " << format_double(rec.relation_probs[1])
            << ", 'Unrelated': " << format_double(rec.relation_probs[2]);
    }
    out << "]";
    return out.str();
}

void write_records_jsonl(const std::filesystem::path& p,
                         std::span<const SentimentRecord> records) {
    std::ostringstream out;
    for (const auto& r : records) {
        json j;
        j["message_id"] = r.message_id;
        j["status"] = std::string(parse_status_name(r.status));
        if (r.status == ParseStatus::parsed) {
            j["sentiment_probs"] = r.sentiment_probs;
            if (r.has_advantage) j["advantage_probs"] = r.advantage_probs;
            if (r.has_relation) j["relation_probs"] = r.relation_probs;
        }
        out << j.dump() << "\n";
    }
    write_file(p, out.str());
}

std::vector<SentimentRecord> load_records_jsonl(const std::filesystem::path& p) {
    std::string text = read_file(p);
    std::vector<SentimentRecord> out;
    long lineno = 0;
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line = trim(std::string_view(text).substr(start, end - start));
        start = end + 1;
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError("malformed record line", lineno);
        SentimentRecord r;
        r.message_id = j.at("message_id").get<std::string>();
        r.status = parse_status_from_name(j.at("status").get<std::string>());
        if (r.status == ParseStatus::parsed) {
            auto sp = j.at("sentiment_probs");
            for (int s = 0; s < 5; ++s) r.sentiment_probs[s] = sp.at(s).get<double>();
            if (j.contains("advantage_probs")) {
                r.has_advantage = true;
                for (int s = 0; s < 2; ++s)
                    r.advantage_probs[s] = j["advantage_probs"].at(s).get<double>();
            }
            if (j.contains("relation_probs")) {
                r.has_relation = true;
                for (int s = 0; s < 3; ++s)
                    r.relation_probs[s] = j["relation_probs"].at(s).get<double>();
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<SentimentRecord> parse_all(std::span<const RawResponse> responses,
                                       int threads) {
    std::vector<SentimentRecord> out(responses.size());
    int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nthreads)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(responses.size());
         ++i) {
        out[i] = parse_response(responses[i]);
    }
    return out;
}

namespace serial {
std::vector<SentimentRecord> parse_all(std::span<const RawResponse> responses) {
    std::vector<SentimentRecord> out;
    out.reserve(responses.size());
    for (const auto& r : responses) out.push_back(parse_response(r));
    return out;
}
}  // namespace serial

}  // namespace stocksent
