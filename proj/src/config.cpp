#include "stocksent/config.hpp"

#include <sstream>

#include "stocksent/errors.hpp"
#include "stocksent/util.hpp"

namespace stocksent {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& value) {
    std::filesystem::path p(value);
    if (p.is_absolute() || base.empty()) return p;
    return base / p;
}

bool parse_bool(const std::string& v) {
    if (iequals(v, "true") || v == "1" || iequals(v, "yes")) return true;
    if (iequals(v, "false") || v == "0" || iequals(v, "no")) return false;
    throw ConfigError("expected a boolean, got '" + v + "'");
}

}  // namespace

PipelineConfig parse_config_text(std::string_view text,
                                 const std::filesystem::path& base_dir) {
    PipelineConfig cfg;
    bool have_test_begin = false;

    std::string section;
    size_t pos = 0;
    long lineno = 0;
    while (pos <= text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++lineno;
        if (line.empty() || line[0] == '#' || line[0] == ';') {
            if (pos > text.size()) break;
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header at line " +
                                  std::to_string(lineno));
            section = to_lower_ascii(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("expected key = value at line " + std::to_string(lineno));
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        std::string lkey = to_lower_ascii(key);

        if (section.empty()) {
            if (lkey == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(value));
            else if (lkey == "threads") cfg.threads = static_cast<int>(parse_int(value));
            else throw ConfigError("unknown top-level key '" + key + "'");
        } else if (section == "companies") {
            // display name = ticker; file order defines the stacking order.
            CompanyContext ctx;
            ctx.display_name = key;
            ctx.ticker_symbol = value;
            cfg.companies.push_back(std::move(ctx));
        } else if (section == "paths") {
            if (lkey == "messages") cfg.messages_path = resolve(base_dir, value);
            else if (lkey == "prices") cfg.prices_path = resolve(base_dir, value);
            else if (lkey == "bert_sentiments")
                cfg.bert_sentiments_path = resolve(base_dir, value);
            else if (lkey == "output_dir") cfg.output_dir = resolve(base_dir, value);
            else throw ConfigError("unknown [paths] key '" + key + "'");
        } else if (section == "provider") {
            if (lkey == "kind") cfg.provider.kind = provider_kind_from_name(value);
            else if (lkey == "endpoint_url") cfg.provider.endpoint_url = value;
            else if (lkey == "api_key_env") cfg.provider.api_key_env = value;
            else if (lkey == "model_id") cfg.provider.model_id = value;
            else if (lkey == "max_concurrency")
                cfg.provider.max_concurrency = static_cast<int>(parse_int(value));
            else if (lkey == "retry_limit")
                cfg.provider.retry_limit = static_cast<int>(parse_int(value));
            else if (lkey == "request_timeout_ms")
                cfg.provider.request_timeout = std::chrono::milliseconds(parse_int(value));
            else if (lkey == "backoff_base_ms")
                cfg.provider.backoff_base = std::chrono::milliseconds(parse_int(value));
            else if (lkey == "na_fraction")
                cfg.provider.na_fraction = parse_double(value);
            else if (lkey == "cost_per_request")
                cfg.provider.cost_per_request = parse_double(value);
            else if (lkey == "replay_cache")
                cfg.provider.replay_cache_path = resolve(base_dir, value);
            else if (lkey == "record_replay")
                cfg.provider.record_replay = parse_bool(value);
            else throw ConfigError("unknown [provider] key '" + key + "'");
        } else if (section == "splits") {
            if (lkey == "year") cfg.split_year = static_cast<int>(parse_int(value));
            else if (lkey == "test_begin") {
                have_test_begin = true;
                cfg.test_begin_months.clear();
                for (const auto& part : split(value, ',')) {
                    auto name = trim(part);
                    if (name.empty()) continue;
                    cfg.test_begin_months.push_back(parse_month(name));
                }
            } else {
                throw ConfigError("unknown [splits] key '" + key + "'");
            }
        } else {
            throw ConfigError("unknown section [" + section + "]");
        }
        if (pos > text.size()) break;
    }

    if (cfg.companies.empty())
        throw ConfigError("config needs at least one entry in [companies]");
    if (cfg.messages_path.empty()) throw ConfigError("config lacks paths.messages");
    if (cfg.prices_path.empty()) throw ConfigError("config lacks paths.prices");
    if (cfg.output_dir.empty()) throw ConfigError("config lacks paths.output_dir");
    if (!have_test_begin) {
        for (int m = 4; m <= 9; ++m) cfg.test_begin_months.push_back(m);
    }
    if (cfg.test_begin_months.empty())
        throw ConfigError("splits.test_begin lists no months");

    // The provider's mock seed follows the run seed.
    cfg.provider.seed = cfg.seed;
    cfg.provider.external_sentiments_path = cfg.bert_sentiments_path;
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        throw ConfigError("config file not found: " + path.string());
    return parse_config_text(read_file(path), path.parent_path());
}

std::vector<SplitPlan> split_plans(const PipelineConfig& cfg) {
    std::vector<SplitPlan> plans;
    for (int begin : cfg.test_begin_months) {
        SplitPlan p{cfg.split_year, begin - 1};
        p.validate();
        plans.push_back(p);
    }
    return plans;
}

std::string config_to_text(const PipelineConfig& cfg) {
    std::ostringstream out;
    out << "seed = " << cfg.seed << "\n";
    if (cfg.threads > 0) out << "threads = " << cfg.threads << "\n";
    out << "\n[companies]\n";
    for (const auto& c : cfg.companies)
        out << c.display_name << " = " << c.ticker_symbol << "\n";
    out << "\n[paths]\n";
    out << "messages = " << cfg.messages_path.string() << "\n";
    out << "prices = " << cfg.prices_path.string() << "\n";
    if (!cfg.bert_sentiments_path.empty())
        out << "bert_sentiments = " << cfg.bert_sentiments_path.string() << "\n";
    out << "output_dir = " << cfg.output_dir.string() << "\n";
    out << "\n[provider]\n";
    out << "kind = " << provider_kind_name(cfg.provider.kind) << "\n";
    out << "model_id = " << cfg.provider.model_id << "\n";
    if (!cfg.provider.endpoint_url.empty())
        out << "endpoint_url = " << cfg.provider.endpoint_url << "\n";
    out << "api_key_env = " << cfg.provider.api_key_env << "\n";
    out << "max_concurrency = " << cfg.provider.max_concurrency << "\n";
    out << "retry_limit = " << cfg.provider.retry_limit << "\n";
    out << "request_timeout_ms = " << cfg.provider.request_timeout.count() << "\n";
    out << "na_fraction = " << format_double(cfg.provider.na_fraction) << "\n";
    out << "cost_per_request = " << format_double(cfg.provider.cost_per_request)
        << "\n";
    if (!cfg.provider.replay_cache_path.empty())
        out << "replay_cache = " << cfg.provider.replay_cache_path.string() << "\n";
    out << "\n[splits]\n";
    out << "year = " << cfg.split_year << "\n";
    out << "test_begin = ";
    for (size_t i = 0; i < cfg.test_begin_months.size(); ++i) {
        if (i) out << ", ";
        out << month_name(cfg.test_begin_months[i]);
    }
    out << "\n";
    return out.str();
}

}  // namespace stocksent
