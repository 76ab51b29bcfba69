#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phaselda/corpus.hpp"
#include "phaselda/rng.hpp"
#include "phaselda/signal.hpp"
#include "phaselda/util.hpp"

namespace phaselda {
namespace synth {

// A volume burst: from start_date the daily rate climbs by ramp_slope per
// day until it reaches plateau, then holds.
struct Burst {
    Date start;
    double ramp_slope;
    double plateau;
};

struct PlantedTopic {
    std::vector<std::string> signature_tokens;
    double share;  // fraction of documents
    std::vector<std::string> themes;  // 1-2 themes, optional
};

struct MentionPlant {
    std::string country;
    std::string alias;  // injected verbatim into the text
    double rate;        // per-doc probability
};

struct SynthSpec {
    DateRange window;
    Date anchor;
    double baseline_rate = 10.0;
    std::vector<Burst> bursts;
    double noise_sd = 0.0;  // gaussian jitter on daily counts; 0 = noise-free
    double cutoff = 0.2;    // smoothing cutoff the oracle scan uses

    std::vector<PlantedTopic> topics;
    int doc_length = 20;
    int users_per_day_pool = 0;  // 0 = one user per doc
    std::vector<MentionPlant> mentions;
    std::uint64_t seed = 0;

    static SynthSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// Exact record of everything the generator planted. Downstream tests treat
// this as ground truth.
struct Ledger {
    std::vector<double> daily_counts;  // emitted (possibly noisy) counts
    std::vector<double> clean_counts;  // noise-free counts
    std::int64_t velocity_threshold = 0;
    std::int64_t acceleration_threshold = 0;
    std::vector<Date> expected_boundaries;  // exhaustive scan over the clean series

    std::map<std::string, int> doc_topic;                      // planted topic per doc
    std::map<std::string, std::vector<std::string>> doc_countries;  // planted mentions
    std::map<std::pair<std::string, std::string>, double> theme_trends;    // (date,theme)
    std::map<std::pair<std::string, std::string>, double> mention_trends;  // (date,country)
    std::size_t doc_count = 0;

    nlohmann::json to_json() const;
};

inline SynthSpec SynthSpec::from_json(const nlohmann::json& j) {
    SynthSpec s;
    s.window.start = Date::parse(j.at("window").at("start").get<std::string>());
    s.window.end = Date::parse(j.at("window").at("end").get<std::string>());
    s.anchor = Date::parse(j.at("anchor").get<std::string>());
    s.baseline_rate = j.value("baseline_rate", 10.0);
    for (const auto& b : j.value("bursts", nlohmann::json::array())) {
        s.bursts.push_back({Date::parse(b.at("start").get<std::string>()),
                            b.at("ramp_slope").get<double>(), b.at("plateau").get<double>()});
    }
    s.noise_sd = j.value("noise_sd", 0.0);
    s.cutoff = j.value("cutoff", 0.2);
    for (const auto& t : j.value("topics", nlohmann::json::array())) {
        PlantedTopic pt;
        if (t.contains("signature_tokens")) {
            pt.signature_tokens = t.at("signature_tokens").get<std::vector<std::string>>();
            if (pt.signature_tokens.empty())
                throw ConfigError("synth: topic with empty signature vocabulary");
        } else {
            // auto vocabulary: vocab_size tokens named k<topic>w<idx>
            const int n = t.value("vocab_size", 100);
            const int idx = static_cast<int>(s.topics.size());
            for (int w = 0; w < n; ++w)
                pt.signature_tokens.push_back("k" + std::to_string(idx) + "w" + std::to_string(w));
        }
        pt.share = t.at("share").get<double>();
        if (t.contains("themes")) pt.themes = t.at("themes").get<std::vector<std::string>>();
        s.topics.push_back(std::move(pt));
    }
    s.doc_length = j.value("doc_length", 20);
    s.users_per_day_pool = j.value("users_per_day_pool", 0);
    for (const auto& m : j.value("mentions", nlohmann::json::array()))
        s.mentions.push_back({m.at("country").get<std::string>(),
                              m.at("alias").get<std::string>(), m.at("rate").get<double>()});
    s.seed = j.value("seed", 0ULL);

    if (!s.window.contains(s.anchor)) throw ConfigError("synth: anchor outside window");
    for (const auto& b : s.bursts)
        if (b.start < s.window.start) throw ConfigError("synth: burst starts before window");
    for (std::size_t i = 1; i < s.bursts.size(); ++i)
        if (!(s.bursts[i - 1].start < s.bursts[i].start))
            throw ConfigError("synth: burst start dates must be strictly increasing");
    double share_sum = 0.0;
    for (const auto& t : s.topics) share_sum += t.share;
    if (!s.topics.empty() && std::abs(share_sum - 1.0) > 1e-9)
        throw ConfigError("synth: topic shares must sum to 1");
    return s;
}

inline nlohmann::json SynthSpec::to_json() const {
    nlohmann::json j;
    j["window"] = {{"start", window.start.str()}, {"end", window.end.str()}};
    j["anchor"] = anchor.str();
    j["baseline_rate"] = baseline_rate;
    j["bursts"] = nlohmann::json::array();
    for (const auto& b : bursts)
        j["bursts"].push_back({{"start", b.start.str()},
                               {"ramp_slope", b.ramp_slope},
                               {"plateau", b.plateau}});
    j["noise_sd"] = noise_sd;
    j["cutoff"] = cutoff;
    j["topics"] = nlohmann::json::array();
    for (const auto& t : topics) {
        nlohmann::json tj{{"share", t.share}, {"signature_tokens", t.signature_tokens}};
        if (!t.themes.empty()) tj["themes"] = t.themes;
        j["topics"].push_back(tj);
    }
    j["doc_length"] = doc_length;
    j["users_per_day_pool"] = users_per_day_pool;
    j["mentions"] = nlohmann::json::array();
    for (const auto& m : mentions)
        j["mentions"].push_back({{"country", m.country}, {"alias", m.alias}, {"rate", m.rate}});
    j["seed"] = seed;
    return j;
}

inline double clean_rate(const SynthSpec& spec, Date day) {
    double rate = spec.baseline_rate;
    for (const auto& b : spec.bursts) {
        if (day < b.start) continue;
        rate += std::min(b.plateau, b.ramp_slope * static_cast<double>(day - b.start + 1));
    }
    return rate;
}

// Brute-force boundary oracle: smooth the clean series, take plain
// differences, apply the floor rules at the anchor, then scan every date and
// collapse qualifying runs. Written here, independently of the phasing
// module, on purpose.
inline void oracle_scan(const DailySeries& clean, Date anchor, double cutoff, Ledger& ledger) {
    const DailySeries smoothed = lowpass(clean, cutoff);
    const int n = smoothed.size();
    std::vector<double> vel(n - 1), acc(n - 2);
    for (int i = 0; i + 1 < n; ++i) vel[i] = smoothed.values[i + 1] - smoothed.values[i];
    for (int i = 0; i + 2 < n; ++i) acc[i] = vel[i + 1] - vel[i];

    // velocity index for date d: d - start - 1; acceleration: d - start - 2
    const auto vel_at = [&](Date d) { return vel[d - smoothed.start - 1]; };
    const auto acc_at = [&](Date d) { return acc[d - smoothed.start - 2]; };

    const double v_anchor = vel_at(anchor);
    const double a_anchor = acc_at(anchor);
    ledger.velocity_threshold = static_cast<std::int64_t>(std::floor(v_anchor)) + 1;
    ledger.acceleration_threshold = static_cast<std::int64_t>(std::floor(a_anchor));

    const auto qualifies = [&](Date d) {
        const double v = vel_at(d), a = acc_at(d);
        return 0.0 < v && v < static_cast<double>(ledger.velocity_threshold) &&
               a > static_cast<double>(ledger.acceleration_threshold);
    };

    ledger.expected_boundaries = {anchor};
    bool prev_qualifies = qualifies(anchor);
    const Date first = smoothed.start + 2;
    const Date last = smoothed.start + (n - 1);
    for (Date d = std::max(anchor + 1, first); d <= last; ++d) {
        const bool q = qualifies(d);
        if (q && !prev_qualifies) ledger.expected_boundaries.push_back(d);
        prev_qualifies = q;
    }
}

inline std::pair<DailySeries, Ledger> gen_series(const SynthSpec& spec) {
    const int n = spec.window.days();
    if (n < kMinFilterLen) throw ConfigError("synth window too short");

    Ledger ledger;
    DailySeries clean{spec.window.start, std::vector<double>(n)};
    for (int i = 0; i < n; ++i)
        clean.values[i] = std::round(clean_rate(spec, spec.window.start + i));

    DailySeries emitted = clean;
    if (spec.noise_sd > 0.0) {
        Rng rng(derive_seed(spec.seed, 0xda7a));
        for (double& v : emitted.values)
            v = std::max(0.0, std::round(v + rng.gaussian(0.0, spec.noise_sd)));
    }

    ledger.clean_counts = clean.values;
    ledger.daily_counts = emitted.values;
    oracle_scan(clean, spec.anchor, spec.cutoff, ledger);
    return {emitted, ledger};
}

struct GeneratedCorpus {
    Corpus corpus;
    Ledger ledger;
};

// Emits documents day by day: counts from gen_series, topics drawn from the
// planted shares, tokens uniform over the topic's signature vocabulary,
// mentions appended verbatim. Everything lands in the ledger, which a final
// recount pass re-verifies against the emitted docs.
inline GeneratedCorpus gen_corpus(const SynthSpec& spec) {
    if (spec.topics.empty()) throw ConfigError("synth: gen_corpus needs at least one topic");
    auto [series, ledger] = gen_series(spec);

    Rng rng(derive_seed(spec.seed, 0xc0de));
    Corpus corpus;
    std::vector<double> shares;
    for (const auto& t : spec.topics) shares.push_back(t.share);

    std::size_t next_id = 0;
    for (int i = 0; i < series.size(); ++i) {
        const Date day = series.date_at(i);
        const int count = static_cast<int>(series.values[i]);
        for (int c = 0; c < count; ++c) {
            Doc doc;
            doc.id = "d" + std::to_string(next_id++);
            doc.timestamp = std::int64_t(day.days()) * 86400 + 3600 * (c % 24);
            const int topic = rng.discrete(shares);
            ledger.doc_topic[doc.id] = topic;

            const auto& sig = spec.topics[topic].signature_tokens;
            std::string text;
            for (int t = 0; t < spec.doc_length; ++t) {
                if (t) text += ' ';
                text += sig[rng.uniform_int(sig.size())];
            }
            for (const auto& m : spec.mentions) {
                if (rng.uniform01() < m.rate) {
                    text += ' ';
                    text += m.alias;
                    ledger.doc_countries[doc.id].push_back(m.country);
                    ledger.mention_trends[{day.str(), m.country}] += 1.0;
                }
            }
            doc.text = std::move(text);
            doc.retweet_count = static_cast<std::int64_t>(rng.uniform_int(50));
            const int pool = spec.users_per_day_pool;
            doc.user_id = pool > 0 ? "u" + std::to_string(rng.uniform_int(pool))
                                   : "u" + std::to_string(next_id);
            corpus.docs.push_back(std::move(doc));

            const auto& themes = spec.topics[topic].themes;
            if (!themes.empty()) {
                const double w = themes.size() == 2 ? 0.5 : 1.0;
                for (const auto& th : themes) ledger.theme_trends[{day.str(), th}] += w;
            }
        }
    }
    ledger.doc_count = corpus.docs.size();

    // Independent recount: the emitted docs must reproduce the ledger counts.
    std::vector<double> recount(series.size(), 0.0);
    for (const Doc& d : corpus.docs) recount[corpus.doc_day(d) - series.start] += 1.0;
    if (recount != ledger.daily_counts)
        throw std::logic_error("synth: ledger/corpus recount mismatch");

    return {std::move(corpus), std::move(ledger)};
}

inline nlohmann::json Ledger::to_json() const {
    nlohmann::json j;
    j["daily_counts"] = daily_counts;
    j["clean_counts"] = clean_counts;
    j["velocity_threshold"] = velocity_threshold;
    j["acceleration_threshold"] = acceleration_threshold;
    j["expected_boundaries"] = nlohmann::json::array();
    for (Date d : expected_boundaries) j["expected_boundaries"].push_back(d.str());
    j["doc_count"] = doc_count;
    j["doc_topic"] = doc_topic;
    nlohmann::json themes = nlohmann::json::array();
    for (const auto& [key, w] : theme_trends)
        themes.push_back({{"date", key.first}, {"theme", key.second}, {"weight", w}});
    j["theme_trends"] = themes;
    nlohmann::json mentions = nlohmann::json::array();
    for (const auto& [key, n] : mention_trends)
        mentions.push_back({{"date", key.first}, {"country", key.second}, {"count", n}});
    j["mention_trends"] = mentions;
    nlohmann::json countries = nlohmann::json::object();
    for (const auto& [id, cs] : doc_countries) countries[id] = cs;
    j["doc_countries"] = countries;
    return j;
}

// Writes the corpus in the same JSONL format the loader reads.
inline void write_corpus_jsonl(const Corpus& corpus, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write corpus file: " + path);
    for (const Doc& d : corpus.docs) {
        nlohmann::json j{{"id", d.id},
                         {"timestamp", d.timestamp},
                         {"text", d.text},
                         {"retweet_count", d.retweet_count},
                         {"user_id", d.user_id}};
        if (!d.lang.empty()) j["lang"] = d.lang;
        os << j.dump() << '\n';
    }
}

}  // namespace synth
}  // namespace phaselda
