#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phaselda/corpus.hpp"
#include "phaselda/date.hpp"
#include "phaselda/lda.hpp"
#include "phaselda/textprep.hpp"
#include "phaselda/themes.hpp"
#include "phaselda/util.hpp"

namespace phaselda {

// Everything a run needs. Defaults are the constants the method prescribes:
// cutoff 0.2, min_count 20, K in [2,50], 100 epochs.
struct PipelineConfig {
    std::string input_path;
    CorpusFormat input_format = CorpusFormat::Jsonl;
    DateRange window;
    std::optional<Date> anchor_date;

    double filter_cutoff = 0.2;

    TokenizerConfig tokenizer;
    std::string stopword_path;  // kept for the hash; tokenizer.stopwords holds the words

    int min_count = 20;
    int k_min = 2;
    int k_max = 50;
    int epochs = 100;
    AlphaRule alpha = AlphaRule::fifty_over_k();
    double beta = 0.01;
    std::uint64_t seed = 0;

    int day_offset_hours = 0;
    bool dedup_text = false;
    PercentileMode percentile_mode = PercentileMode::Cumulative75;

    std::string out_dir = "out";     // not hashed: execution knob
    int workers = 1;                 // not hashed: must never change results
    std::string labels_path;         // report input
    std::string lexicon_path;        // report input

    // Canonical serialization of every result-determining field. out_dir,
    // workers and the report-only file paths stay out so that re-running a
    // stage with a different worker count or output directory still matches.
    nlohmann::json hash_fields() const {
        nlohmann::json j;
        j["input"] = {{"path", input_path},
                      {"format", input_format == CorpusFormat::Jsonl ? "jsonl" : "csv"}};
        j["window"] = {{"start", window.start.str()}, {"end", window.end.str()}};
        j["anchor_date"] = anchor_date ? anchor_date->str() : "";
        j["filter"] = {{"cutoff", filter_cutoff}};
        std::vector<std::string> rules;
        for (auto r : tokenizer.strip_patterns) rules.push_back(strip_rule_name(r));
        std::vector<std::string> stop(tokenizer.stopwords.begin(), tokenizer.stopwords.end());
        std::sort(stop.begin(), stop.end());
        j["tokenizer"] = {{"strip", rules},
                          {"stopwords", stop},
                          {"external", tokenizer.external_tokenizer},
                          {"lowercase", tokenizer.lowercase}};
        j["min_count"] = min_count;
        j["topics"] = {{"k_min", k_min},
                       {"k_max", k_max},
                       {"epochs", epochs},
                       {"alpha", alpha.fixed < 0 ? nlohmann::json("50/k") : nlohmann::json(alpha.fixed)},
                       {"beta", beta}};
        j["seed"] = seed;
        j["day_offset_hours"] = day_offset_hours;
        j["dedup_text"] = dedup_text;
        j["percentile_mode"] =
            percentile_mode == PercentileMode::Cumulative75 ? "cumulative75" : "distribution25";
        return j;
    }

    std::string config_hash() const { return to_hex(fnv1a64(hash_fields().dump())); }

    static PipelineConfig load(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw ConfigError("cannot open config file: " + path);
        nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
        if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
        return from_json(j);
    }

    static PipelineConfig from_json(const nlohmann::json& j) {
        PipelineConfig cfg;
        try {
            const auto& input = j.at("input");
            cfg.input_path = input.at("path").get<std::string>();
            cfg.input_format = parse_corpus_format(input.value("format", "jsonl"));

            const auto& window = j.at("window");
            cfg.window.start = Date::parse(window.at("start").get<std::string>());
            cfg.window.end = Date::parse(window.at("end").get<std::string>());
            if (cfg.window.end < cfg.window.start)
                throw ConfigError("config: window end precedes start");

            if (j.contains("anchor_date"))
                cfg.anchor_date = Date::parse(j.at("anchor_date").get<std::string>());

            if (j.contains("filter")) cfg.filter_cutoff = j.at("filter").value("cutoff", 0.2);
            if (!(cfg.filter_cutoff > 0.0 && cfg.filter_cutoff < 1.0))
                throw ConfigError("config: filter.cutoff must lie in (0,1)");

            if (j.contains("tokenizer")) {
                const auto& tok = j.at("tokenizer");
                if (tok.contains("stopwords")) {
                    cfg.stopword_path = tok.at("stopwords").get<std::string>();
                    cfg.tokenizer.stopwords = load_stopwords(cfg.stopword_path);
                }
                if (tok.contains("strip")) {
                    cfg.tokenizer.strip_patterns.clear();
                    for (const auto& r : tok.at("strip"))
                        cfg.tokenizer.strip_patterns.push_back(
                            parse_strip_rule(r.get<std::string>()));
                }
                cfg.tokenizer.external_tokenizer = tok.value("external_tokenizer", "");
                cfg.tokenizer.lowercase = tok.value("lowercase", true);
            }

            cfg.min_count = j.value("min_count", 20);
            if (j.contains("topics")) {
                const auto& t = j.at("topics");
                cfg.k_min = t.value("k_min", 2);
                cfg.k_max = t.value("k_max", 50);
                cfg.epochs = t.value("epochs", 100);
                if (t.contains("alpha")) {
                    const auto& a = t.at("alpha");
                    if (a.is_string()) {
                        std::string s = lower_ascii(a.get<std::string>());
                        if (s != "50/k") throw ConfigError("config: alpha must be a number or \"50/k\"");
                        cfg.alpha = AlphaRule::fifty_over_k();
                    } else {
                        cfg.alpha = AlphaRule::fixed_value(a.get<double>());
                    }
                }
                cfg.beta = t.value("beta", 0.01);
                if (cfg.beta <= 0.0) throw ConfigError("config: beta must be > 0");
            }
            if (cfg.k_min < 2 || cfg.k_min > cfg.k_max)
                throw ConfigError("config: need 2 <= k_min <= k_max");
            if (cfg.epochs < 1) throw ConfigError("config: epochs must be >= 1");

            cfg.seed = j.value("seed", 0ULL);
            cfg.day_offset_hours = j.value("day_offset_hours", 0);
            cfg.dedup_text = j.value("dedup_text", false);
            if (j.contains("percentile_mode"))
                cfg.percentile_mode = parse_percentile_mode(j.at("percentile_mode").get<std::string>());
            cfg.out_dir = j.value("out_dir", "out");
            cfg.workers = j.value("workers", 1);
            if (cfg.workers < 1) throw ConfigError("config: workers must be >= 1");
            cfg.labels_path = j.value("labels", "");
            cfg.lexicon_path = j.value("lexicon", "");
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        return cfg;
    }
};

}  // namespace phaselda
