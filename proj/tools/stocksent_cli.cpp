// Subcommand driver for the sentiment-to-movement pipeline. Exit codes:
// 0 success, 2 input/config problem, 3 provider problem, 4 numerical failure.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "stocksent/errors.hpp"
#include "stocksent/pipeline.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitProvider = 3;
constexpr int kExitNumeric = 4;

int classify_exit(const std::exception& e) {
    if (dynamic_cast<const stocksent::ProviderError*>(&e)) return kExitProvider;
    if (dynamic_cast<const stocksent::NumericError*>(&e)) return kExitNumeric;
    if (dynamic_cast<const stocksent::ShapeError*>(&e)) return kExitNumeric;
    return kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Microblog sentiment features for daily stock movement models"};
    app.require_subcommand(1);

    std::string config_path;
    long long seed_override = -1;
    bool force = false;
    app.add_option("--config", config_path, "Pipeline config file")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed_override, "Override the config seed");
    app.add_flag("--force", force, "Rebuild stages even when up to date");

    auto* clean = app.add_subcommand("clean", "Clean messages under both profiles");
    auto* score = app.add_subcommand("score", "Score cleaned messages");
    auto* featurize = app.add_subcommand("featurize", "Aggregate daily features");
    auto* fit = app.add_subcommand("fit", "Fit full-sample logistic models");
    auto* evaluate = app.add_subcommand("evaluate", "Run the train/test splits");
    auto* report = app.add_subcommand("report", "Emit the report bundle");
    auto* run = app.add_subcommand("run", "Run every stage in order");

    CLI11_PARSE(app, argc, argv);

    try {
        stocksent::PipelineConfig cfg = stocksent::load_config(config_path);
        if (seed_override >= 0) {
            cfg.seed = static_cast<std::uint64_t>(seed_override);
            cfg.provider.seed = cfg.seed;
        }
        if (clean->parsed()) stocksent::cmd_clean(cfg);
        else if (score->parsed()) stocksent::cmd_score(cfg);
        else if (featurize->parsed()) stocksent::cmd_featurize(cfg);
        else if (fit->parsed()) stocksent::cmd_fit(cfg);
        else if (evaluate->parsed()) stocksent::cmd_evaluate(cfg);
        else if (report->parsed()) stocksent::cmd_report(cfg);
        else if (run->parsed()) stocksent::cmd_run(cfg, force);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return classify_exit(e);
    }
}
