#include "stocksent/synth.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include <omp.h>

#include "stocksent/errors.hpp"
#include "stocksent/featurize.hpp"
#include "stocksent/glm.hpp"
#include "stocksent/respparse.hpp"
#include "stocksent/textprep.hpp"
#include "stocksent/util.hpp"

namespace stocksent {

namespace {

// splitmix64: small, deterministic across standard libraries.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Knuth's product method; the means used here are tiny.
    int poisson(double mean) {
        double limit = std::exp(-mean);
        double prod = uniform();
        int n = 0;
        while (prod > limit) {
            prod *= uniform();
            ++n;
        }
        return n;
    }
    int pick(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
};

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t company,
                          std::uint64_t tag) {
    return hash_combine(hash_combine(seed, company * 0x9e3779b97f4a7c15ULL + 1),
                        tag);
}

constexpr std::array<const char*, 48> kVocab = {
    "earnings",  "guidance", "upgrade",   "downgrade", "breakout", "support",
    "resistance", "volume",  "momentum",  "dip",       "rally",    "squeeze",
    "calls",     "puts",     "shares",    "position",  "holding",  "watching",
    "buying",    "selling",  "chart",     "trend",     "target",   "price",
    "report",    "quarter",  "revenue",   "margin",    "product",  "launch",
    "delivery",  "demand",   "supply",    "news",      "rumor",    "analyst",
    "market",    "sector",   "long",      "short",     "strong",   "weak",
    "bullish",   "bearish",  "great",     "terrible",  "steady",   "volatile"};

std::string salt_token(Rng& rng) {
    std::string s(5, 'a');
    for (char& c : s) c = static_cast<char>('a' + rng.pick(26));
    return s;
}

// Lowercase word salad; a fixed point of the llm cleaning rules, so the
// mock's body hash equals the hash the pipeline computes after cleaning.
std::string random_body(Rng& rng, const std::string& ticker_lc) {
    int words = 4 + rng.pick(6);
    std::string body;
    int cashtag_at = rng.uniform() < 0.3 ? rng.pick(words) : -1;
    for (int w = 0; w < words; ++w) {
        if (!body.empty()) body.push_back(' ');
        if (w == cashtag_at) {
            body += "$" + ticker_lc;
        } else {
            body += kVocab[static_cast<size_t>(rng.pick(kVocab.size()))];
        }
    }
    body.push_back(' ');
    body += salt_token(rng);
    return body;
}

int sample_class(Rng& rng, double mood) {
    // Gaussian-shaped weights centered at 3 + mood.
    std::array<double, 5> w{};
    double total = 0.0;
    for (int k = 0; k < 5; ++k) {
        double d = (static_cast<double>(k + 1) - 3.0) - mood;
        w[k] = std::exp(-d * d / (2.0 * 0.8 * 0.8));
        total += w[k];
    }
    double u = rng.uniform() * total;
    for (int k = 0; k < 5; ++k) {
        u -= w[k];
        if (u <= 0.0) return k + 1;
    }
    return 5;
}

int sample_call(Rng& rng, double mood) {
    double u = 1.0 / (1.0 + std::exp(-2.0 * mood));
    double p_adv = 0.75 * u;
    double p_dis = 0.75 * (1.0 - u);
    double r = rng.uniform();
    if (r < p_adv) return 0;
    if (r < p_adv + p_dis) return 1;
    return 2;
}

std::string to_lower(const std::string& s) { return to_lower_ascii(s); }

}  // namespace

SynthCorpus generate_corpus(const SynthSpec& spec) {
    SynthCorpus corpus;
    auto days = us_equity_trading_days(spec.year);
    TradingWindows windows(days);

    ProviderConfig provider = spec.provider;
    provider.kind = ProviderKind::mock;
    provider.seed = spec.seed;

    for (size_t ci = 0; ci < spec.companies.size(); ++ci) {
        const CompanyContext& ctx = spec.companies[ci];
        const std::string ticker_lc = to_lower(ctx.ticker_symbol);

        // Ad-style bodies that repeat across the year (dedup fodder).
        Rng ad_rng(stream_seed(spec.seed, ci, 0xadULL));
        std::vector<std::string> ad_bodies;
        for (int i = 0; i < 20; ++i) ad_bodies.push_back(random_body(ad_rng, ticker_lc));

        std::vector<std::vector<RawMessage>> per_day(days.size());
        int nthreads = spec.threads > 0 ? spec.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
        for (std::ptrdiff_t di = 0; di < static_cast<std::ptrdiff_t>(days.size());
             ++di) {
            Rng rng(stream_seed(spec.seed, ci, 0x10000ULL + static_cast<std::uint64_t>(di)));
            double mood = rng.uniform(-1.5, 1.5);
            int n = rng.poisson(spec.mean_messages_per_day);
            Instant lo = di == 0 ? windows.first_boundary()
                                 : windows.close_of(static_cast<size_t>(di - 1));
            Instant hi = windows.close_of(static_cast<size_t>(di));
            auto& bucket = per_day[static_cast<size_t>(di)];
            bucket.reserve(static_cast<size_t>(n));
            for (int m = 0; m < n; ++m) {
                RawMessage msg;
                char idbuf[48];
                std::snprintf(idbuf, sizeof(idbuf), "%s-%03td-%04d",
                              ticker_lc.c_str(), di, m);
                msg.id = idbuf;
                msg.ticker = ctx.ticker_symbol;
                msg.timestamp_utc =
                    lo + 1 +
                    static_cast<Instant>(rng.next() %
                                         static_cast<std::uint64_t>(hi - lo));
                double r = rng.uniform();
                if (r < spec.duplicate_fraction) {
                    msg.body = ad_bodies[static_cast<size_t>(
                        rng.pick(static_cast<int>(ad_bodies.size())))];
                } else if (r < spec.duplicate_fraction + spec.noise_fraction) {
                    msg.body = random_body(rng, ticker_lc);
                } else {
                    int want_class = sample_class(rng, mood);
                    int want_call = sample_call(rng, mood);
                    std::string body;
                    for (int tries = 0; tries < 200; ++tries) {
                        body = random_body(rng, ticker_lc);
                        MockOutcome out = mock_outcome(provider, body);
                        if (!out.na && out.sentiment_class == want_class &&
                            out.advantage_call == want_call)
                            break;
                    }
                    msg.body = body;
                }
                bucket.push_back(std::move(msg));
            }
        }

        std::vector<RawMessage> msgs;
        for (auto& bucket : per_day)
            msgs.insert(msgs.end(), bucket.begin(), bucket.end());

        // Realized daily features through the same path the pipeline uses.
        DuplicateRegistry registry = DuplicateRegistry::build(msgs);
        auto outcomes = clean_corpus(msgs, CleaningProfile::llm_profile, registry,
                                     spec.threads);
        std::vector<CleanedMessage> cleaned;
        for (const auto& o : outcomes)
            if (o.status == CleanStatus::ok) cleaned.push_back(o.message);
        std::vector<PromptJob> jobs;
        jobs.reserve(cleaned.size());
        for (const auto& m : cleaned)
            jobs.push_back(PromptJob{m.id, build_prompt(m, ctx, provider.model_id)});
        BatchResult batch = score_batch(jobs, provider);
        auto records = parse_all(batch.responses, spec.threads);
        std::vector<ScoredMessage> scored;
        scored.reserve(cleaned.size());
        for (size_t i = 0; i < cleaned.size(); ++i)
            scored.push_back(ScoredMessage{cleaned[i].timestamp_utc, records[i]});
        std::vector<Date> label_dates(days.begin() + 1, days.end());
        auto daily = daily_features(ctx.ticker_symbol, scored, days, label_dates,
                                    spec.threads);

        // Labels from the realized features, then prices consistent with the
        // labels (down days are occasionally exactly flat).
        Rng label_rng(stream_seed(spec.seed, ci, 0x1abe15ULL));
        double close = 100.0 * (1.0 + static_cast<double>(ci));
        corpus.prices.push_back(PriceBar{ctx.ticker_symbol, days[0], close});
        for (size_t j = 0; j < label_dates.size(); ++j) {
            double p = 0.5;
            if (spec.planted_signal) {
                double eta = spec.coef_sentiment * daily[j].avg_sentiment +
                             spec.coef_advantage *
                                 static_cast<double>(daily[j].adv_count -
                                                     daily[j].dis_count);
                p = 1.0 / (1.0 + std::exp(-eta));
            }
            int up = label_rng.uniform() < p ? 1 : 0;
            double eps = label_rng.uniform(0.001, 0.03);
            if (up) close *= 1.0 + eps;
            else if (label_rng.uniform() >= 0.03) close *= 1.0 - eps;
            // else: exactly flat, still a down label
            corpus.prices.push_back(PriceBar{ctx.ticker_symbol, label_dates[j], close});
        }

        // Noise 5-class rows for every message surviving the bert profile.
        auto bert_out = clean_corpus(msgs, CleaningProfile::bert_profile, registry,
                                     spec.threads);
        for (const auto& o : bert_out) {
            if (o.status != CleanStatus::ok) continue;
            Rng row_rng(hash_combine(fnv1a64(o.message.id), spec.seed ^ 0xbe27ULL));
            ExternalSentimentRow row;
            row.message_id = o.message.id;
            double sum = 0.0;
            for (int k = 0; k < 5; ++k) {
                row.probs[k] = 0.05 + row_rng.uniform();
                sum += row.probs[k];
            }
            for (int k = 0; k < 5; ++k) row.probs[k] /= sum;
            corpus.bert_rows.push_back(std::move(row));
        }

        corpus.messages.insert(corpus.messages.end(), msgs.begin(), msgs.end());
    }
    return corpus;
}

void write_corpus(const SynthCorpus& corpus,
                  const std::filesystem::path& messages_path,
                  const std::filesystem::path& prices_path,
                  const std::filesystem::path& bert_path) {
    write_messages(messages_path, corpus.messages, TableFormat::jsonl);
    write_prices(prices_path, corpus.prices, TableFormat::csv);

    std::string csv = "message_id,p1,p2,p3,p4,p5\n";
    for (const auto& r : corpus.bert_rows) {
        csv += r.message_id;
        for (int k = 0; k < 5; ++k) csv += "," + format_double(r.probs[k]);
        csv += "\n";
    }
    write_file(bert_path, csv);
}

}  // namespace stocksent
