#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "phaselda/pipeline.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
    bool dedup_text = false;
    std::optional<std::string> percentile_mode;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Pipeline config file (JSON)")->required();
    cmd->add_option("--out", opts.out_dir, "Output directory (overrides config)");
    cmd->add_option("--workers", opts.workers, "Worker threads for the K sweep");
    cmd->add_option("--seed", opts.seed, "RNG seed (overrides config)");
    cmd->add_flag("--dedup-text", opts.dedup_text, "Collapse duplicate texts before modeling");
    cmd->add_option("--percentile-mode", opts.percentile_mode,
                    "Major-topic rule: cumulative75 or distribution25")
        ->check(CLI::IsMember({"cumulative75", "distribution25"}));
}

phaselda::PipelineConfig load_config(const CommonOpts& opts) {
    auto cfg = phaselda::PipelineConfig::load(opts.config_path);
    if (opts.out_dir) cfg.out_dir = *opts.out_dir;
    if (opts.workers) cfg.workers = *opts.workers;
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.dedup_text) cfg.dedup_text = true;
    if (opts.percentile_mode)
        cfg.percentile_mode = phaselda::parse_percentile_mode(*opts.percentile_mode);
    if (cfg.workers < 1) throw phaselda::ConfigError("workers must be >= 1");
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topical-phase detection and per-phase topic modeling for "
                 "timestamped short-document corpora"};
    app.require_subcommand(1);

    CommonOpts phases_opts, topics_opts, report_opts, stats_opts;
    auto* phases = app.add_subcommand("phases", "Detect topical phases from daily volume kinetics");
    add_common(phases, phases_opts);
    auto* topics = app.add_subcommand("topics", "Fit per-phase LDA models and select topic counts");
    add_common(topics, topics_opts);
    auto* report = app.add_subcommand(
        "report", "Emit theme/mention trend tables, phase stats, and charts");
    add_common(report, report_opts);
    auto* stats = app.add_subcommand("stats", "Summarize the corpus and write daily counts");
    add_common(stats, stats_opts);

    std::string synth_spec, synth_out = "synth_out";
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with an exact ledger");
    synth->add_option("--spec", synth_spec, "Synthetic spec file (JSON)")->required();
    synth->add_option("--out", synth_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // usage errors -> 2
    }

    try {
        if (phases->parsed()) return phaselda::run_phases(load_config(phases_opts));
        if (topics->parsed()) return phaselda::run_topics(load_config(topics_opts));
        if (report->parsed()) return phaselda::run_report(load_config(report_opts));
        if (stats->parsed()) return phaselda::run_stats(load_config(stats_opts));
        if (synth->parsed()) return phaselda::run_synth(synth_spec, synth_out);
    } catch (const phaselda::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
