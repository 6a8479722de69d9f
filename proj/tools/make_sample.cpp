// Regenerates the bundled sample corpus under data/sample/ (small synthetic
// fixture with a planted signal; see README).

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "stocksent/config.hpp"
#include "stocksent/synth.hpp"
#include "stocksent/util.hpp"

using namespace stocksent;

int main(int argc, char** argv) {
    CLI::App app{"stocksent sample fixture generator"};
    std::string out_dir = "data/sample";
    double messages_per_day = 8.0;
    std::uint64_t seed = 42;
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--messages-per-day", messages_per_day, "Mean messages/day");
    app.add_option("--seed", seed, "Corpus seed");
    CLI11_PARSE(app, argc, argv);

    SynthSpec spec;
    spec.mean_messages_per_day = messages_per_day;
    spec.seed = seed;
    SynthCorpus corpus = generate_corpus(spec);

    std::filesystem::path dir(out_dir);
    write_corpus(corpus, dir / "messages.jsonl", dir / "prices.csv",
                 dir / "bert_sentiments.csv");

    PipelineConfig cfg;
    cfg.seed = seed;
    cfg.companies = spec.companies;
    cfg.messages_path = "messages.jsonl";
    cfg.prices_path = "prices.csv";
    cfg.bert_sentiments_path = "bert_sentiments.csv";
    cfg.output_dir = "out";
    cfg.provider.kind = ProviderKind::mock;
    cfg.split_year = spec.year;
    for (int m = 4; m <= 9; ++m) cfg.test_begin_months.push_back(m);
    write_file(dir / "config.ini", config_to_text(cfg));

    std::printf("wrote %zu messages, %zu price bars, %zu bert rows to %s\n",
                corpus.messages.size(), corpus.prices.size(),
                corpus.bert_rows.size(), out_dir.c_str());
    return 0;
}
