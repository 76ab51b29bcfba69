#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "phaselda/corpus.hpp"
#include "phaselda/csv.hpp"
#include "phaselda/lda.hpp"
#include "phaselda/util.hpp"

namespace phaselda {

enum class PercentileMode {
    Cumulative75,    // keep the smallest prefix of largest topics covering >= 75% of docs
    Distribution25,  // keep topics at or above the 25th percentile of topic sizes
};

inline PercentileMode parse_percentile_mode(std::string_view s) {
    if (s == "cumulative75") return PercentileMode::Cumulative75;
    if (s == "distribution25") return PercentileMode::Distribution25;
    throw ConfigError("unknown percentile mode: '" + std::string(s) + "'");
}

// Major-topic filter over hard assignments. Topics are ordered by size
// descending (ties by id); the default keeps the shortest prefix whose
// cumulative size reaches 75% of all assigned docs.
inline std::set<int> major_topics(const std::map<std::string, int>& assignments, int K,
                                  PercentileMode mode = PercentileMode::Cumulative75) {
    if (assignments.empty()) throw ConfigError("major_topics: no assignments");
    std::vector<std::int64_t> sizes(K, 0);
    for (const auto& [id, k] : assignments) {
        if (k < 0 || k >= K) throw ConfigError("assignment topic id out of range");
        ++sizes[k];
    }

    std::set<int> kept;
    if (mode == PercentileMode::Cumulative75) {
        std::vector<int> order(K);
        for (int k = 0; k < K; ++k) order[k] = k;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (sizes[a] != sizes[b]) return sizes[a] > sizes[b];
            return a < b;
        });
        const double threshold = 0.75 * static_cast<double>(assignments.size());
        double cum = 0.0;
        for (int k : order) {
            if (cum >= threshold) break;
            if (sizes[k] == 0) break;  // only empty topics remain
            kept.insert(k);
            cum += static_cast<double>(sizes[k]);
        }
    } else {
        // 25th percentile (linear interpolation) of the K topic sizes.
        std::vector<std::int64_t> sorted = sizes;
        std::sort(sorted.begin(), sorted.end());
        const double pos = 0.25 * static_cast<double>(K - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        const double p25 = lo + 1 < sorted.size()
                               ? sorted[lo] + frac * static_cast<double>(sorted[lo + 1] - sorted[lo])
                               : static_cast<double>(sorted[lo]);
        for (int k = 0; k < K; ++k)
            if (sizes[k] > 0 && static_cast<double>(sizes[k]) >= p25) kept.insert(k);
    }
    return kept;
}

struct Keyword {
    std::string token;
    double probability;
};

struct TopicSummary {
    int phase_index;
    int topic_id;
    std::int64_t size;  // docs assigned
    std::vector<Keyword> keywords;      // <= 30, probability descending
    std::vector<std::string> exemplars; // <= 1000 doc ids, retweets descending
    bool few_keywords = false;          // fewer than 30 tokens ever assigned
};

// Per kept topic: the 30 highest-probability keywords (tokens actually
// assigned to the topic) and the 1000 most-retweeted assigned docs.
inline std::vector<TopicSummary> topic_summaries(
    const LdaModel& model, const EncodedCorpus& corpus,
    const std::map<std::string, std::int64_t>& retweets_by_id, int phase_index,
    const std::set<int>& kept, int max_keywords = 30, int max_exemplars = 1000) {
    const auto assignments = assign_topics(model);
    std::vector<std::int64_t> sizes(model.K, 0);
    for (const auto& [id, k] : assignments) ++sizes[k];

    std::vector<TopicSummary> out;
    for (int k : kept) {
        TopicSummary s;
        s.phase_index = phase_index;
        s.topic_id = k;
        s.size = sizes[k];

        std::vector<int> words;
        for (int w = 0; w < model.V; ++w)
            if (model.kw(k, w) > 0) words.push_back(w);
        std::sort(words.begin(), words.end(), [&](int a, int b) {
            const double pa = model.phi(k, a), pb = model.phi(k, b);
            if (pa != pb) return pa > pb;
            return a < b;
        });
        s.few_keywords = static_cast<int>(words.size()) < max_keywords;
        if (static_cast<int>(words.size()) > max_keywords) words.resize(max_keywords);
        for (int w : words) s.keywords.push_back({corpus.vocab.id_to_token[w], model.phi(k, w)});

        std::vector<std::string> docs;
        for (const auto& [id, topic] : assignments)
            if (topic == k) docs.push_back(id);
        std::sort(docs.begin(), docs.end(), [&](const std::string& a, const std::string& b) {
            const auto ra_it = retweets_by_id.find(a);
            const auto rb_it = retweets_by_id.find(b);
            const std::int64_t ra = ra_it == retweets_by_id.end() ? 0 : ra_it->second;
            const std::int64_t rb = rb_it == retweets_by_id.end() ? 0 : rb_it->second;
            if (ra != rb) return ra > rb;
            return a < b;
        });
        if (static_cast<int>(docs.size()) > max_exemplars) docs.resize(max_exemplars);
        s.exemplars = std::move(docs);
        out.push_back(std::move(s));
    }
    return out;
}

// Human labels per (phase, topic): one theme, or two themes weighted 0.5
// each. News themes may carry one sub-label from the fixed taxonomy.
struct ThemeLabelMap {
    std::map<std::pair<int, int>, std::vector<std::string>> entries;

    const std::vector<std::string>* find(int phase, int topic) const {
        auto it = entries.find({phase, topic});
        return it == entries.end() ? nullptr : &it->second;
    }
};

inline const std::set<std::string>& news_sublabels() {
    static const std::set<std::string> s{"confirmed", "hate", "economy", "cheerup", "education"};
    return s;
}

// A theme whose base name ends in "news" may carry exactly one known suffix.
inline void validate_theme(const std::string& theme, std::size_t lineno) {
    if (theme.empty()) throw ConfigError("labels line " + std::to_string(lineno) + ": empty theme");
    const auto us = theme.find('_');
    if (us == std::string::npos) return;
    const std::string base = theme.substr(0, us);
    const std::string suffix = theme.substr(us + 1);
    if (base.size() >= 4 && base.substr(base.size() - 4) == "news") {
        if (!news_sublabels().count(suffix))
            throw ConfigError("labels line " + std::to_string(lineno) + ": unknown news sub-label '_" +
                              suffix + "' in theme '" + theme + "'");
        if (suffix.find('_') != std::string::npos)
            throw ConfigError("labels line " + std::to_string(lineno) +
                              ": news theme carries more than one sub-label");
    }
}

// labels.csv: phase,topic,themes with themes 1-2 '|'-separated strings.
inline ThemeLabelMap load_label_file(const std::string& path) {
    auto rows = csv::read_file(path);
    if (rows.empty()) throw ConfigError("label file is empty: " + path);

    ThemeLabelMap map;
    std::size_t lineno = 0;
    for (const auto& row : rows) {
        ++lineno;
        if (lineno == 1 && !row.empty() && trim(row[0]) == "phase") continue;  // header
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != 3)
            throw ConfigError("labels line " + std::to_string(lineno) + ": expected phase,topic,themes");
        int phase, topic;
        try {
            phase = std::stoi(row[0]);
            topic = std::stoi(row[1]);
        } catch (const std::exception&) {
            throw ConfigError("labels line " + std::to_string(lineno) + ": bad phase/topic number");
        }
        std::vector<std::string> themes;
        for (const auto& part : split(row[2], '|')) {
            std::string theme = trim(part);
            validate_theme(theme, lineno);
            if (std::find(themes.begin(), themes.end(), theme) == themes.end())
                themes.push_back(theme);  // merge duplicate theme strings
        }
        auto& entry = map.entries[{phase, topic}];
        for (const auto& t : themes)
            if (std::find(entry.begin(), entry.end(), t) == entry.end()) entry.push_back(t);
        if (entry.size() > 2)
            throw ConfigError("labels line " + std::to_string(lineno) + ": topic (" + row[0] + "," +
                              row[1] + ") has more than 2 themes");
    }
    return map;
}

// Daily (date, key) -> weighted count. Keys are themes or country names.
struct TrendTable {
    std::map<std::pair<Date, std::string>, double> rows;

    void add(Date date, const std::string& key, double weight) {
        rows[{date, key}] += weight;
    }

    double total() const {
        double t = 0.0;
        for (const auto& [k, v] : rows) t += v;
        return t;
    }
};

// Accumulates one phase's theme weights: each doc in a kept topic adds 1.0
// to its single theme or 0.5 to each of its two themes on the doc's date.
// Every kept topic must be labeled.
inline void add_theme_trends(TrendTable& table, int phase_index,
                             const std::map<std::string, int>& assignments,
                             const std::set<int>& kept, const ThemeLabelMap& labels,
                             const std::map<std::string, Date>& date_by_id) {
    std::vector<int> unlabeled;
    for (int k : kept)
        if (!labels.find(phase_index, k)) unlabeled.push_back(k);
    if (!unlabeled.empty()) {
        std::string list;
        for (int k : unlabeled) list += (list.empty() ? "" : ", ") + std::to_string(k);
        throw ConfigError("phase " + std::to_string(phase_index) +
                          ": kept topics without theme labels: " + list);
    }

    for (const auto& [doc_id, topic] : assignments) {
        if (!kept.count(topic)) continue;
        const auto* themes = labels.find(phase_index, topic);
        const auto date_it = date_by_id.find(doc_id);
        if (date_it == date_by_id.end())
            throw ConfigError("doc '" + doc_id + "' has an assignment but no date");
        const double w = themes->size() == 2 ? 0.5 : 1.0;
        for (const auto& theme : *themes) table.add(date_it->second, theme, w);
    }
}

// Country aliases for mention counting; matching is a case-insensitive
// (ASCII) substring test on the document text, at most once per country
// per document.
struct MentionLexicon {
    std::map<std::string, std::vector<std::string>> aliases;  // country -> aliases
};

inline MentionLexicon load_lexicon_file(const std::string& path) {
    auto rows = csv::read_file(path);
    MentionLexicon lex;
    std::size_t lineno = 0;
    for (const auto& row : rows) {
        ++lineno;
        if (lineno == 1 && !row.empty() && trim(row[0]) == "country") continue;
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != 2)
            throw ConfigError("lexicon line " + std::to_string(lineno) + ": expected country,alias");
        const std::string country = trim(row[0]);
        const std::string alias = trim(row[1]);
        if (country.empty() || alias.empty())
            throw ConfigError("lexicon line " + std::to_string(lineno) + ": empty country or alias");
        lex.aliases[country].push_back(lower_ascii(alias));
    }
    if (lex.aliases.empty()) throw ConfigError("lexicon has no entries: " + path);
    return lex;
}

inline TrendTable mention_trends(const Corpus& corpus, const MentionLexicon& lexicon) {
    if (lexicon.aliases.empty()) throw ConfigError("mention lexicon is empty");
    TrendTable table;
    for (const Doc& doc : corpus.docs) {
        const std::string text = lower_ascii(doc.text);
        const Date day = corpus.doc_day(doc);
        for (const auto& [country, aliases] : lexicon.aliases) {
            for (const auto& alias : aliases) {
                if (text.find(alias) != std::string::npos) {
                    table.add(day, country, 1.0);
                    break;  // at most once per country per doc
                }
            }
        }
    }
    return table;
}

}  // namespace phaselda
