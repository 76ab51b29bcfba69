#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "phaselda/config.hpp"
#include "phaselda/corpus.hpp"
#include "phaselda/csv.hpp"
#include "phaselda/lda.hpp"
#include "phaselda/phasing.hpp"
#include "phaselda/signal.hpp"
#include "phaselda/svg.hpp"
#include "phaselda/synth.hpp"
#include "phaselda/textprep.hpp"
#include "phaselda/themes.hpp"
#include "phaselda/util.hpp"

namespace phaselda {

namespace fs = std::filesystem;

namespace detail {

inline void print_warnings(const Warnings& warnings, std::ostream& err) {
    for (const auto& w : warnings) err << "warning: " << w << "\n";
}

// manifest.json ties every stage's outputs to one config hash; a stage run
// against a directory produced with a different hash is rejected.
inline void update_manifest(const fs::path& out_dir, const std::string& config_hash,
                            const std::string& stage, nlohmann::json stage_info) {
    const fs::path path = out_dir / "manifest.json";
    nlohmann::json manifest;
    if (fs::exists(path)) {
        std::ifstream is(path);
        manifest = nlohmann::json::parse(is, nullptr, false);
        if (manifest.is_discarded()) manifest = nlohmann::json::object();
        if (manifest.contains("config_hash") &&
            manifest["config_hash"].get<std::string>() != config_hash)
            throw ConfigError("output directory " + out_dir.string() +
                              " holds results for config hash " +
                              manifest["config_hash"].get<std::string>() +
                              " but this run has hash " + config_hash +
                              "; refusing to mix outputs");
    }
    manifest["config_hash"] = config_hash;
    manifest["stages"][stage] = std::move(stage_info);
    std::ofstream os(path, std::ios::binary);
    os << manifest.dump(2) << "\n";
}

inline void write_text(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << content;
}

inline Corpus load_windowed_corpus(const PipelineConfig& cfg, std::ostream& err) {
    LoadReport report;
    Warnings warnings;
    Corpus corpus = load_corpus(cfg.input_path, cfg.input_format, &report, &warnings);
    corpus.day_offset_seconds = std::int64_t(cfg.day_offset_hours) * 3600;
    print_warnings(warnings, err);
    err << "loaded " << report.loaded << " docs (" << report.skipped << " skipped, "
        << report.duplicates << " duplicate ids)\n";
    return corpus.filtered(cfg.window);
}

}  // namespace detail

// ---- phases ---------------------------------------------------------------

struct PhasesOutput {
    PhaseSet phases;
    Kinetics kin;
    DailyBreakdown daily;
};

inline PhasesOutput compute_phases(const Corpus& corpus, const PipelineConfig& cfg,
                                   Warnings* warnings = nullptr) {
    if (!cfg.anchor_date) throw ConfigError("anchor_date is required to detect phases");
    PhasesOutput out;
    out.daily = daily_breakdown(corpus, cfg.window);
    DailySeries counts = daily_counts(corpus, cfg.window, warnings);
    DailySeries smoothed = lowpass(counts, cfg.filter_cutoff, warnings);
    out.kin = kinetics(smoothed);
    const Thresholds thr = learn_thresholds(out.kin, *cfg.anchor_date);
    const auto boundaries = detect_boundaries(out.kin, thr, *cfg.anchor_date);
    out.phases = build_phases(boundaries, cfg.window, thr);
    return out;
}

inline nlohmann::json phases_to_json(const PhaseSet& set, const std::string& config_hash) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Phase& p : set.phases) {
        arr.push_back({{"index", p.index},
                       {"start", p.start.str()},
                       {"end", p.end.str()},
                       {"velocity_threshold", set.thresholds.velocity_threshold},
                       {"acceleration_threshold", set.thresholds.acceleration_threshold},
                       {"anchor", set.thresholds.anchor.str()},
                       {"config_hash", config_hash}});
    }
    return arr;
}

inline PhaseSet phases_from_json(const nlohmann::json& arr, const std::string& expect_hash) {
    if (!arr.is_array() || arr.empty()) throw ConfigError("phases.json: expected a non-empty array");
    PhaseSet set;
    for (const auto& e : arr) {
        if (e.value("config_hash", expect_hash) != expect_hash)
            throw ConfigError("phases.json was produced with config hash " +
                              e.value("config_hash", std::string()) + ", current hash is " +
                              expect_hash + "; refusing to mix outputs");
        set.phases.push_back({e.at("index").get<int>(), Date::parse(e.at("start").get<std::string>()),
                              Date::parse(e.at("end").get<std::string>())});
        set.thresholds.velocity_threshold = e.at("velocity_threshold").get<std::int64_t>();
        set.thresholds.acceleration_threshold = e.at("acceleration_threshold").get<std::int64_t>();
        set.thresholds.anchor = Date::parse(e.at("anchor").get<std::string>());
    }
    set.window = {set.phases.front().start, set.phases.back().end};
    return set;
}

namespace detail {

inline PhaseSet load_phases_file(const fs::path& dir, const std::string& expect_hash) {
    const fs::path path = dir / "phases.json";
    if (!fs::exists(path))
        throw ConfigError("phases.json not found in " + dir.string() + " (run `phases` first)");
    std::ifstream is(path);
    nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
    if (j.is_discarded()) throw ConfigError("phases.json is not valid JSON");
    return phases_from_json(j, expect_hash);
}

}  // namespace detail

inline std::string daily_counts_csv(const DailyBreakdown& daily) {
    std::ostringstream os;
    csv::write_row(os, {"date", "tweets", "retweets", "unique_users"});
    for (int i = 0; i < daily.tweets.size(); ++i)
        csv::write_row(os, {daily.tweets.date_at(i).str(), format_double(daily.tweets.values[i]),
                            format_double(daily.retweets.values[i]),
                            format_double(daily.unique_users.values[i])});
    return os.str();
}

inline std::string kinetics_csv(const Kinetics& kin) {
    std::ostringstream os;
    csv::write_row(os, {"date", "smoothed", "velocity", "acceleration"});
    for (int i = 0; i < kin.smoothed.size(); ++i) {
        const Date d = kin.smoothed.date_at(i);
        csv::write_row(os, {d.str(), format_double(kin.smoothed.values[i]),
                            kin.velocity.covers(d) ? format_double(kin.velocity.at(d)) : "",
                            kin.acceleration.covers(d) ? format_double(kin.acceleration.at(d)) : ""});
    }
    return os.str();
}

inline int run_phases(const PipelineConfig& cfg, std::ostream& err = std::cerr) {
    Warnings warnings;
    Corpus corpus = detail::load_windowed_corpus(cfg, err);
    PhasesOutput out = compute_phases(corpus, cfg, &warnings);
    detail::print_warnings(warnings, err);

    const std::string hash = cfg.config_hash();
    fs::create_directories(cfg.out_dir);
    const fs::path dir(cfg.out_dir);

    detail::write_text(dir / "daily_counts.csv", daily_counts_csv(out.daily));
    detail::write_text(dir / "kinetics.csv", kinetics_csv(out.kin));
    detail::write_text(dir / "phases.json", phases_to_json(out.phases, hash).dump(2) + "\n");

    svg::LineChart kin_chart("Daily volume kinetics");
    kin_chart.add_series("smoothed", out.kin.smoothed);
    kin_chart.add_series("velocity", out.kin.velocity);
    kin_chart.add_series("acceleration", out.kin.acceleration);
    kin_chart.write((dir / "kinetics.svg").string(), hash);

    svg::LineChart phase_chart("Daily volume and detected phases");
    phase_chart.add_series("tweets", out.daily.tweets);
    phase_chart.add_series("smoothed", out.kin.smoothed);
    for (std::size_t i = 1; i < out.phases.phases.size(); ++i)
        phase_chart.add_vline(out.phases.phases[i].start,
                              "p" + std::to_string(out.phases.phases[i].index));
    phase_chart.write((dir / "phases.svg").string(), hash);

    detail::update_manifest(dir, hash, "phases",
                            {{"files", {"daily_counts.csv", "kinetics.csv", "phases.json",
                                        "kinetics.svg", "phases.svg"}}});

    err << "detected " << out.phases.phases.size() << " phases (thresholds: velocity "
        << out.phases.thresholds.velocity_threshold << ", acceleration "
        << out.phases.thresholds.acceleration_threshold << ")\n";
    return 0;
}

// ---- topics ---------------------------------------------------------------

struct PhaseModelResult {
    int phase_index = 0;
    bool skipped = false;
    std::string skip_reason;
    SweepResult sweep;
    EncodedCorpus encoded;
};

// Preprocess, build the phase vocabulary, and sweep K for one phase.
inline PhaseModelResult model_phase(const Corpus& corpus, const Phase& phase,
                                    const PipelineConfig& cfg, Warnings* warnings) {
    PhaseModelResult res;
    res.phase_index = phase.index;

    std::vector<std::string> ids, texts;
    std::unordered_set<std::string> seen_texts;
    for (const Doc& d : corpus.docs) {
        const Date day = corpus.doc_day(d);
        if (day < phase.start || day > phase.end) continue;
        if (cfg.dedup_text && !seen_texts.insert(d.text).second) continue;
        ids.push_back(d.id);
        texts.push_back(d.text);
    }
    if (ids.empty()) {
        res.skipped = true;
        res.skip_reason = "no documents in phase";
        return res;
    }

    const auto tokens = preprocess_batch(texts, cfg.tokenizer, warnings);
    Vocabulary vocab;
    try {
        vocab = build_vocabulary(tokens, cfg.min_count);
    } catch (const ConfigError& e) {
        res.skipped = true;
        res.skip_reason = e.what();
        return res;
    }
    res.encoded = encode(ids, tokens, std::move(vocab));
    if (res.encoded.docs.empty()) {
        res.skipped = true;
        res.skip_reason = "all documents empty after encoding";
        return res;
    }

    res.sweep = select_k(res.encoded, cfg.k_min, cfg.k_max, cfg.alpha, cfg.beta, cfg.epochs,
                         derive_seed(cfg.seed, res.phase_index), warnings, cfg.workers);
    return res;
}

inline std::string sweep_csv(const SweepResult& sweep) {
    std::ostringstream os;
    csv::write_row(os, {"k", "perplexity", "seconds"});
    for (const auto& e : sweep.entries)
        csv::write_row(os, {std::to_string(e.k), format_double(e.perplexity),
                            format_double(e.seconds)});
    return os.str();
}

inline nlohmann::json summaries_to_json(const std::vector<TopicSummary>& summaries) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : summaries) {
        nlohmann::json keywords = nlohmann::json::array();
        for (const auto& kw : s.keywords)
            keywords.push_back({{"token", kw.token}, {"p", kw.probability}});
        arr.push_back({{"topic", s.topic_id},
                       {"size", s.size},
                       {"keywords", keywords},
                       {"exemplars", s.exemplars},
                       {"few_keywords", s.few_keywords}});
    }
    return arr;
}

inline int run_topics(const PipelineConfig& cfg, std::ostream& err = std::cerr) {
    const std::string hash = cfg.config_hash();
    const fs::path dir(cfg.out_dir);
    const PhaseSet phases = detail::load_phases_file(dir, hash);

    Corpus corpus = detail::load_windowed_corpus(cfg, err);

    std::map<std::string, std::int64_t> retweets;
    for (const Doc& d : corpus.docs) retweets[d.id] = d.retweet_count;

    nlohmann::json stage_info;
    stage_info["files"] = nlohmann::json::array();
    stage_info["skipped"] = nlohmann::json::array();

    for (const Phase& phase : phases.phases) {
        Warnings warnings;
        PhaseModelResult res = model_phase(corpus, phase, cfg, &warnings);
        detail::print_warnings(warnings, err);
        const std::string tag = std::to_string(phase.index);

        if (res.skipped) {
            err << "phase " << phase.index << " skipped: " << res.skip_reason << "\n";
            stage_info["skipped"].push_back({{"phase", phase.index}, {"reason", res.skip_reason}});
            nlohmann::json tj{{"phase", phase.index},
                              {"config_hash", hash},
                              {"skipped", true},
                              {"reason", res.skip_reason}};
            detail::write_text(dir / ("topics_" + tag + ".json"), tj.dump(2) + "\n");
            stage_info["files"].push_back("topics_" + tag + ".json");
            continue;
        }

        detail::write_text(dir / ("sweep_" + tag + ".csv"), sweep_csv(res.sweep));
        save_model((dir / ("model_" + tag + ".bin")).string(), res.sweep.best, res.encoded,
                   fnv1a64(cfg.hash_fields().dump()));

        const auto assignments = assign_topics(res.sweep.best);
        const auto kept = major_topics(assignments, res.sweep.best.K, cfg.percentile_mode);
        const auto summaries =
            topic_summaries(res.sweep.best, res.encoded, retweets, phase.index, kept);

        nlohmann::json ppl_by_k = nlohmann::json::object();
        for (const auto& e : res.sweep.entries) ppl_by_k[std::to_string(e.k)] = e.perplexity;
        nlohmann::json tj{{"phase", phase.index},
                          {"config_hash", hash},
                          {"k_star", res.sweep.k_star},
                          {"ppl_by_k", ppl_by_k},
                          {"kept_topics", std::vector<int>(kept.begin(), kept.end())},
                          {"summaries", summaries_to_json(summaries)}};
        detail::write_text(dir / ("topics_" + tag + ".json"), tj.dump(2) + "\n");

        for (const auto& name :
             {"sweep_" + tag + ".csv", "model_" + tag + ".bin", "topics_" + tag + ".json"})
            stage_info["files"].push_back(name);

        err << "phase " << phase.index << ": k_star=" << res.sweep.k_star << ", kept "
            << kept.size() << " major topics\n";
    }

    detail::update_manifest(dir, hash, "topics", std::move(stage_info));
    return 0;
}

// ---- report -----------------------------------------------------------------

inline std::string trend_csv(const TrendTable& table, const std::string& key_col,
                             const std::string& value_col) {
    std::ostringstream os;
    csv::write_row(os, {"date", key_col, value_col});
    for (const auto& [key, v] : table.rows)
        csv::write_row(os, {key.first.str(), key.second, format_double(v)});
    return os.str();
}

// Row-normalized variant: weights divided by that date's total labeled weight.
inline std::string trend_pct_csv(const TrendTable& table, const std::string& key_col) {
    std::map<Date, double> totals;
    for (const auto& [key, v] : table.rows) totals[key.first] += v;
    std::ostringstream os;
    csv::write_row(os, {"date", key_col, "fraction"});
    for (const auto& [key, v] : table.rows) {
        const double t = totals[key.first];
        csv::write_row(os, {key.first.str(), key.second, format_double(t > 0 ? v / t : 0.0)});
    }
    return os.str();
}

inline std::string phase_stats_csv(const std::vector<PhaseStats>& stats,
                                   const std::vector<Phase>& phases) {
    std::ostringstream os;
    csv::write_row(os, {"phase", "start", "end", "users_per_day", "tweets_per_day",
                        "retweets_per_day", "depth", "zero_tweets"});
    for (std::size_t i = 0; i < stats.size(); ++i)
        csv::write_row(os, {std::to_string(stats[i].phase_index), phases[i].start.str(),
                            phases[i].end.str(), format_double(stats[i].users_per_day),
                            format_double(stats[i].tweets_per_day),
                            format_double(stats[i].retweets_per_day),
                            format_double(stats[i].depth), stats[i].zero_tweets ? "true" : "false"});
    return os.str();
}

inline svg::LineChart trend_chart(const TrendTable& table, const std::string& title) {
    svg::LineChart chart(title);
    if (table.rows.empty()) return chart;
    Date lo = table.rows.begin()->first.first, hi = lo;
    std::set<std::string> keys;
    for (const auto& [key, v] : table.rows) {
        lo = std::min(lo, key.first);
        hi = std::max(hi, key.first);
        keys.insert(key.second);
    }
    for (const auto& k : keys) {
        DailySeries s{lo, std::vector<double>(static_cast<std::size_t>(hi - lo + 1), 0.0)};
        for (const auto& [key, v] : table.rows)
            if (key.second == k) s.values[key.first - lo] = v;
        chart.add_series(k, s);
    }
    return chart;
}

inline int run_report(const PipelineConfig& cfg, std::ostream& err = std::cerr) {
    const std::string hash = cfg.config_hash();
    const std::uint64_t hash_u64 = fnv1a64(cfg.hash_fields().dump());
    const fs::path dir(cfg.out_dir);
    const PhaseSet phases = detail::load_phases_file(dir, hash);

    if (cfg.labels_path.empty()) throw ConfigError("report needs a labels file (config key `labels`)");
    if (cfg.lexicon_path.empty())
        throw ConfigError("report needs a mention lexicon (config key `lexicon`)");
    const ThemeLabelMap labels = load_label_file(cfg.labels_path);
    const MentionLexicon lexicon = load_lexicon_file(cfg.lexicon_path);

    Corpus corpus = detail::load_windowed_corpus(cfg, err);
    std::map<std::string, Date> date_by_id;
    for (const Doc& d : corpus.docs) date_by_id[d.id] = corpus.doc_day(d);

    std::vector<PhaseStats> stats;
    for (const Phase& p : phases.phases)
        stats.push_back(phase_stats(corpus, p.index, {p.start, p.end}));

    TrendTable themes;
    for (const Phase& phase : phases.phases) {
        const fs::path model_path = dir / ("model_" + std::to_string(phase.index) + ".bin");
        if (!fs::exists(model_path)) {
            err << "phase " << phase.index << ": no model file, excluded from theme trends\n";
            continue;
        }
        ModelFile mf = load_model(model_path.string());
        if (mf.config_hash != hash_u64)
            throw ConfigError("model " + model_path.string() +
                              " was produced with a different config hash; refusing to mix outputs");
        const auto assignments = assign_topics(mf.model);
        const auto kept = major_topics(assignments, mf.model.K, cfg.percentile_mode);
        add_theme_trends(themes, phase.index, assignments, kept, labels, date_by_id);
    }

    const TrendTable mentions = mention_trends(corpus, lexicon);

    detail::write_text(dir / "phase_stats.csv", phase_stats_csv(stats, phases.phases));
    detail::write_text(dir / "theme_trends.csv", trend_csv(themes, "theme", "weighted_count"));
    detail::write_text(dir / "theme_trends_pct.csv", trend_pct_csv(themes, "theme"));
    detail::write_text(dir / "mention_trends.csv", trend_csv(mentions, "country", "count"));
    trend_chart(themes, "Daily theme trends").write((dir / "theme_trends.svg").string(), hash);
    trend_chart(mentions, "Daily country-mention trends")
        .write((dir / "mention_trends.svg").string(), hash);

    detail::update_manifest(dir, hash, "report",
                            {{"files", {"phase_stats.csv", "theme_trends.csv",
                                        "theme_trends_pct.csv", "mention_trends.csv",
                                        "theme_trends.svg", "mention_trends.svg"}}});
    err << "report written to " << cfg.out_dir << "\n";
    return 0;
}

// ---- stats ------------------------------------------------------------------

inline int run_stats(const PipelineConfig& cfg, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
    Corpus corpus = detail::load_windowed_corpus(cfg, err);
    const DailyBreakdown daily = daily_breakdown(corpus, cfg.window);
    fs::create_directories(cfg.out_dir);
    detail::write_text(fs::path(cfg.out_dir) / "daily_counts.csv", daily_counts_csv(daily));

    double tweets = 0, retweets = 0;
    for (double v : daily.tweets.values) tweets += v;
    for (double v : daily.retweets.values) retweets += v;
    out << "window: " << cfg.window.start.str() << " .. " << cfg.window.end.str() << "\n";
    if (!corpus.empty()) {
        const DateRange range = corpus.date_range();
        out << "corpus range: " << range.start.str() << " .. " << range.end.str() << "\n";
    }
    out << "docs in window: " << format_double(tweets) << "\n"
        << "retweet total: " << format_double(retweets) << "\n"
        << "overall depth: " << format_double(tweet_depth(tweets, retweets)) << "\n";
    detail::update_manifest(fs::path(cfg.out_dir), cfg.config_hash(), "stats",
                            {{"files", {"daily_counts.csv"}}});
    return 0;
}

// ---- synth ------------------------------------------------------------------

inline int run_synth(const std::string& spec_path, const std::string& out_dir,
                     std::ostream& err = std::cerr) {
    std::ifstream is(spec_path);
    if (!is) throw ConfigError("cannot open synth spec: " + spec_path);
    nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
    if (j.is_discarded()) throw ConfigError("synth spec is not valid JSON: " + spec_path);
    const synth::SynthSpec spec = synth::SynthSpec::from_json(j);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    if (spec.topics.empty()) {
        auto [series, ledger] = synth::gen_series(spec);
        detail::write_text(dir / "ledger.json", ledger.to_json().dump(2) + "\n");
        err << "series-only spec: wrote ledger.json (" << series.size() << " days)\n";
        return 0;
    }
    synth::GeneratedCorpus gen = synth::gen_corpus(spec);
    synth::write_corpus_jsonl(gen.corpus, (dir / "corpus.jsonl").string());
    detail::write_text(dir / "ledger.json", gen.ledger.to_json().dump(2) + "\n");
    err << "wrote corpus.jsonl (" << gen.corpus.size() << " docs) and ledger.json\n";
    return 0;
}

}  // namespace phaselda
