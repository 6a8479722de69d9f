#include "stocksent/scorer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>
#include <omp.h>

#include "stocksent/csv.hpp"
#include "stocksent/errors.hpp"
#include "stocksent/util.hpp"

#include <httplib.h>

namespace stocksent {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Mock provider: a fixed table of well-formed responses. A seeded hash of
// the cleaned body picks the row, or "NA" with the configured probability.
// ---------------------------------------------------------------------------

struct CannedEntry {
    int sentiment_class;  // 1..5
    int advantage_call;   // 0 advantage, 1 disadvantage, 2 equal
    std::array<double, 5> sentiment;
    std::array<double, 2> advantage;
    std::array<double, 3> relation;
};

std::vector<CannedEntry> build_canned_table() {
    std::vector<CannedEntry> table;
    constexpr std::array<double, 3> peaks = {0.40, 0.60, 0.80};
    constexpr std::array<double, 3> adv_p = {0.60, 0.70, 0.90};
    constexpr std::array<std::array<double, 3>, 3> relations = {{
        {0.80, 0.10, 0.10},
        {0.10, 0.70, 0.20},
        {0.20, 0.20, 0.60},
    }};
    for (int cls = 1; cls <= 5; ++cls) {
        for (int call = 0; call < 3; ++call) {
            for (int v = 0; v < 3; ++v) {
                CannedEntry e;
                e.sentiment_class = cls;
                e.advantage_call = call;
                double peak = peaks[v];
                double rest = (1.0 - peak) / 4.0;
                for (int s = 0; s < 5; ++s) e.sentiment[s] = rest;
                e.sentiment[cls - 1] = peak;
                if (call == 0) e.advantage = {adv_p[v], 1.0 - adv_p[v]};
                else if (call == 1) e.advantage = {1.0 - adv_p[v], adv_p[v]};
                else e.advantage = {0.5, 0.5};
                e.relation = relations[v];
                table.push_back(e);
            }
        }
    }
    return table;
}

const std::vector<CannedEntry>& canned_table() {
    static const std::vector<CannedEntry> table = build_canned_table();
    return table;
}

std::uint64_t body_hash(std::uint64_t seed, std::string_view body) {
    // Small consecutive seeds must still land on unrelated table rows, so
    // the seed goes through a full avalanche before and after the body hash.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    std::uint64_t h = fnv1a64(body, z | 1ULL);
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return h;
}

const CannedEntry* select_canned(const ProviderConfig& cfg,
                                 std::string_view cleaned_body) {
    std::uint64_t h = body_hash(cfg.seed, cleaned_body);
    auto threshold =
        static_cast<std::uint64_t>(std::llround(cfg.na_fraction * 10000.0));
    if (h % 10000 < threshold) return nullptr;  // NA
    const auto& table = canned_table();
    return &table[(h / 10000) % table.size()];
}

std::string render_canned(const CannedEntry& e, const std::string& company) {
    auto p2 = [](double v) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };
    std::ostringstream out;
    out << "[Sentiment: '1(neg)': " << p2(e.sentiment[0]);
    static constexpr std::array<const char*, 4> rest = {"'2'", "'3'", "'4'",
                                                        "'5(pos)'"};
    for (int s = 1; s < 5; ++s) out << ", " << rest[s - 1] << ": " << p2(e.sentiment[s]);
    out << ", Advantage: 'Advantage': " << p2(e.advantage[0])
        << ", 'Disadvantage': " << p2(e.advantage[1]);
    out << ", Relation: 'Mostly " << (company.empty() ? "company" : company)
        << "': " << p2(e.relation[0]) << ", 'Mostly competitor': " << p2(e.relation[1])
        << ", 'Unrelated': " << p2(e.relation[2]) << "]";
    return out.str();
}

RawResponse mock_score(const ProviderConfig& cfg, const PromptJob& job) {
    RawResponse r;
    r.message_id = job.message_id;
    r.attempt_count = 1;
    std::string_view body = fenced_message(job.bundle);
    if (body.empty()) body = job.bundle.user_text;
    const CannedEntry* entry = select_canned(cfg, body);
    std::string company = company_from_system_text(job.bundle.system_text);
    r.text = entry ? render_canned(*entry, company) : "NA";
    r.ok = true;
    r.cost_estimate = cfg.cost_per_request;
    return r;
}

// ---------------------------------------------------------------------------
// Remote chat-completion provider.
// ---------------------------------------------------------------------------

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    size_t scheme = url.find("://");
    if (scheme == std::string::npos)
        throw ConfigError("endpoint_url must carry a scheme: " + url);
    size_t slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

std::string chat_request_body(const PromptBundle& b) {
    json req;
    req["model"] = b.model_id;
    req["messages"] = json::array({
        json{{"role", "system"}, {"content", b.system_text}},
        json{{"role", "user"}, {"content", b.user_text}},
    });
    req["temperature"] = b.temperature;
    return req.dump();
}

std::string extract_chat_content(const std::string& body) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded()) throw ProviderError("provider returned malformed JSON");
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw ProviderError("provider response lacks choices[0].message.content");
    }
}

RawResponse remote_score(const ProviderConfig& cfg, const SplitUrl& url,
                         const std::string& api_key, const PromptJob& job,
                         std::atomic<bool>& auth_failed) {
    RawResponse r;
    r.message_id = job.message_id;
    httplib::Headers headers = {{"Authorization", "Bearer " + api_key}};
    std::string payload = chat_request_body(job.bundle);

    const int max_attempts = cfg.retry_limit + 1;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        if (auth_failed.load()) {
            r.ok = false;
            r.error = "batch aborted after authentication failure";
            r.attempt_count = attempt - 1;
            return r;
        }
        r.attempt_count = attempt;
        auto t0 = std::chrono::steady_clock::now();
        httplib::Client cli(url.origin);
        cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(
            cfg.request_timeout));
        cli.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(
            cfg.request_timeout));
        auto res = cli.Post(url.path, headers, payload, "application/json");
        auto t1 = std::chrono::steady_clock::now();
        r.latency_ms =
            std::chrono::duration<double, std::milli>(t1 - t0).count();

        if (res && (res->status == 401 || res->status == 403)) {
            auth_failed.store(true);
            r.ok = false;
            r.error = "authentication rejected (status " +
                      std::to_string(res->status) + ")";
            return r;
        }
        if (res && res->status >= 200 && res->status < 300) {
            try {
                r.text = extract_chat_content(res->body);
            } catch (const ProviderError& e) {
                r.ok = false;
                r.error = e.what();
                return r;
            }
            if (r.text.empty()) {
                r.ok = false;
                r.error = "provider returned empty content";
                return r;
            }
            r.ok = true;
            r.cost_estimate = cfg.cost_per_request;
            return r;
        }
        bool retryable = !res || res->status == 429 || res->status >= 500;
        if (!retryable) {
            r.ok = false;
            r.error = "provider returned status " + std::to_string(res->status);
            return r;
        }
        r.error = res ? "provider returned status " + std::to_string(res->status)
                      : "transport error";
        if (attempt < max_attempts) {
            // Exponential backoff with deterministic jitter in [0, 25%].
            double base = static_cast<double>(cfg.backoff_base.count());
            double delay = base * std::pow(2.0, attempt - 1);
            std::uint64_t h = fnv1a64(job.message_id,
                                      0x9e3779b97f4a7c15ULL + attempt);
            delay *= 1.0 + 0.25 * static_cast<double>(h % 1000) / 1000.0;
            std::this_thread::sleep_for(
                std::chrono::milliseconds(static_cast<long long>(delay)));
        }
    }
    r.ok = false;
    return r;
}

}  // namespace

std::string_view provider_kind_name(ProviderKind k) {
    switch (k) {
        case ProviderKind::remote_chat: return "remote_chat";
        case ProviderKind::mock: return "mock";
        case ProviderKind::replay: return "replay";
        case ProviderKind::external_file: return "external_file";
    }
    return "mock";
}

ProviderKind provider_kind_from_name(std::string_view s) {
    if (s == "remote_chat") return ProviderKind::remote_chat;
    if (s == "mock") return ProviderKind::mock;
    if (s == "replay") return ProviderKind::replay;
    if (s == "external_file") return ProviderKind::external_file;
    throw ConfigError("unknown provider kind '" + std::string(s) + "'");
}

MockOutcome mock_outcome(const ProviderConfig& cfg, std::string_view cleaned_body) {
    const CannedEntry* entry = select_canned(cfg, cleaned_body);
    if (!entry) return MockOutcome{true, 0, 0};
    return MockOutcome{false, entry->sentiment_class, entry->advantage_call};
}

BatchResult score_batch(std::span<const PromptJob> jobs, const ProviderConfig& cfg) {
    BatchResult result;
    result.responses.resize(jobs.size());
    const auto n = static_cast<std::ptrdiff_t>(jobs.size());

    switch (cfg.kind) {
        case ProviderKind::mock: {
            int nthreads = std::max(1, cfg.max_concurrency);
#pragma omp parallel for schedule(static) num_threads(nthreads)
            for (std::ptrdiff_t i = 0; i < n; ++i)
                result.responses[i] = mock_score(cfg, jobs[i]);
            break;
        }
        case ProviderKind::replay:
        case ProviderKind::external_file: {
            std::unordered_map<std::string, RawResponse> by_id;
            if (cfg.kind == ProviderKind::replay) {
                for (auto& e : load_replay_cache(cfg.replay_cache_path)) {
                    RawResponse r;
                    r.message_id = e.message_id;
                    r.ok = true;
                    r.text = std::move(e.text);
                    r.cost_estimate = e.cost_estimate;
                    r.attempt_count = 1;
                    by_id.emplace(r.message_id, std::move(r));
                }
            } else {
                for (const auto& row :
                     load_external_sentiments(cfg.external_sentiments_path)) {
                    RawResponse r;
                    r.message_id = row.message_id;
                    r.ok = true;
                    // Bare sentiment block, same shape the text parser accepts.
                    std::ostringstream t;
                    static constexpr std::array<const char*, 5> keys = {
                        "'1(neg)'", "'2'", "'3'", "'4'", "'5(pos)'"};
                    for (int s = 0; s < 5; ++s) {
                        if (s) t << ", ";
                        t << keys[s] << ": " << format_double(row.probs[s]);
                    }
                    r.text = t.str();
                    r.attempt_count = 1;
                    by_id.emplace(r.message_id, std::move(r));
                }
            }
            for (std::ptrdiff_t i = 0; i < n; ++i) {
                auto it = by_id.find(jobs[i].message_id);
                if (it != by_id.end()) {
                    result.responses[i] = it->second;
                } else {
                    RawResponse r;
                    r.message_id = jobs[i].message_id;
                    r.ok = false;
                    r.attempt_count = 0;
                    r.error = cfg.kind == ProviderKind::replay
                                  ? "replay cache miss"
                                  : "no external sentiment row";
                    result.responses[i] = std::move(r);
                }
            }
            break;
        }
        case ProviderKind::remote_chat: {
            if (cfg.endpoint_url.empty())
                throw ConfigError("remote_chat provider needs endpoint_url");
            if (cfg.api_key_env.empty())
                throw ConfigError("remote_chat provider needs api_key_env");
            std::string key = getenv_or(cfg.api_key_env, "");
            if (key.empty())
                throw ConfigError("environment variable " + cfg.api_key_env +
                                  " is not set");
            SplitUrl url = split_url(cfg.endpoint_url);
            std::atomic<bool> auth_failed{false};
            int nthreads = std::max(1, cfg.max_concurrency);
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
            for (std::ptrdiff_t i = 0; i < n; ++i) {
                result.responses[i] =
                    remote_score(cfg, url, key, jobs[i], auth_failed);
            }
            if (auth_failed.load())
                throw AuthError("provider rejected the API key; batch aborted");
            if (cfg.record_replay && !cfg.replay_cache_path.empty()) {
                std::vector<ReplayEntry> entries;
                for (const auto& r : result.responses) {
                    if (!r.ok) continue;
                    entries.push_back(ReplayEntry{r.message_id, cfg.model_id,
                                                  r.text, r.cost_estimate});
                }
                write_replay_cache(cfg.replay_cache_path, entries);
            }
            break;
        }
    }

    double total = 0.0;
    for (const auto& r : result.responses) total += r.cost_estimate;
    result.total_cost = total;
    return result;
}

std::vector<ExternalSentimentRow> load_external_sentiments(
    const std::filesystem::path& p) {
    if (!std::filesystem::exists(p))
        throw IoError("external sentiment file not found: " + p.string());
    auto rows = parse_csv(read_file(p));
    std::vector<ExternalSentimentRow> out;
    if (rows.empty()) return out;
    size_t start = 0;
    // Header is optional but expected; detect it by the message_id column.
    if (!rows[0].fields.empty() && iequals(trim(rows[0].fields[0]), "message_id"))
        start = 1;
    for (size_t i = start; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.fields.size() != 6)
            throw ParseError("external sentiment row needs 6 fields", row.line);
        ExternalSentimentRow r;
        r.message_id = std::string(trim(row.fields[0]));
        if (r.message_id.empty())
            throw ParseError("external sentiment row lacks message_id", row.line);
        double sum = 0.0;
        for (int s = 0; s < 5; ++s) {
            double v = parse_double(row.fields[s + 1]);
            if (v < 0.0)
                throw ParseError("negative sentiment probability", row.line);
            r.probs[s] = v;
            sum += v;
        }
        if (sum <= 0.0)
            throw ParseError("sentiment probabilities sum to zero", row.line);
        for (int s = 0; s < 5; ++s) r.probs[s] /= sum;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<std::string> unknown_external_ids(
    std::span<const ExternalSentimentRow> rows,
    std::span<const std::string> known_ids) {
    std::unordered_set<std::string_view> known(known_ids.begin(), known_ids.end());
    std::vector<std::string> unknown;
    for (const auto& r : rows) {
        if (!known.contains(std::string_view(r.message_id)))
            unknown.push_back(r.message_id);
    }
    return unknown;
}

void write_replay_cache(const std::filesystem::path& p,
                        std::span<const ReplayEntry> entries) {
    std::ostringstream out;
    for (const auto& e : entries) {
        json j;
        j["message_id"] = e.message_id;
        j["model_id"] = e.model_id;
        j["text"] = e.text;
        j["cost_estimate"] = e.cost_estimate;
        out << j.dump() << "\n";
    }
    write_file(p, out.str());
}

std::vector<ReplayEntry> load_replay_cache(const std::filesystem::path& p) {
    if (!std::filesystem::exists(p))
        throw IoError("replay cache not found: " + p.string());
    std::string text = read_file(p);
    std::vector<ReplayEntry> out;
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
        if (j.is_discarded()) throw ParseError("malformed replay line", lineno);
        ReplayEntry e;
        e.message_id = j.at("message_id").get<std::string>();
        e.model_id = j.value("model_id", "");
        e.text = j.at("text").get<std::string>();
        e.cost_estimate = j.value("cost_estimate", 0.0);
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace stocksent
