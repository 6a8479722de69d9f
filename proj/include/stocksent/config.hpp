#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stocksent/evalstat.hpp"
#include "stocksent/scorer.hpp"

namespace stocksent {

/// Everything one pipeline run needs, read from a single config file.
///
/// The file is an INI-style key/value document: `[section]` headers,
/// `key = value` lines, `#` comment lines. Sections: top level (seed,
/// threads), [companies] (display name = ticker, order defines the stacking
/// order), [paths], [provider], [splits].
struct PipelineConfig {
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = library default

    std::vector<CompanyContext> companies;

    std::filesystem::path messages_path;
    std::filesystem::path prices_path;
    std::filesystem::path bert_sentiments_path;
    std::filesystem::path output_dir;

    ProviderConfig provider;

    int split_year = 2017;
    std::vector<int> test_begin_months;  // defaults to April..September
};

PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config_text(std::string_view text,
                                 const std::filesystem::path& base_dir);

std::vector<SplitPlan> split_plans(const PipelineConfig& cfg);

/// Round-trip serialization (used to write fixture configs).
std::string config_to_text(const PipelineConfig& cfg);

}  // namespace stocksent
