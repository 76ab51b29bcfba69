#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "phaselda/csv.hpp"
#include "phaselda/date.hpp"
#include "phaselda/series.hpp"
#include "phaselda/util.hpp"

namespace phaselda {

struct Doc {
    std::string id;
    std::int64_t timestamp;  // epoch seconds, UTC
    std::string text;
    std::int64_t retweet_count;
    std::string user_id;
    std::string lang;  // optional
};

struct Corpus {
    std::vector<Doc> docs;
    std::int64_t day_offset_seconds = 0;  // shifts the day boundary from UTC midnight

    Date doc_day(const Doc& d) const { return day_of(d.timestamp, day_offset_seconds); }

    bool empty() const { return docs.empty(); }
    std::size_t size() const { return docs.size(); }

    DateRange date_range() const {
        if (docs.empty()) throw ConfigError("empty corpus has no date range");
        Date lo = doc_day(docs.front()), hi = lo;
        for (const Doc& d : docs) {
            Date day = doc_day(d);
            lo = std::min(lo, day);
            hi = std::max(hi, day);
        }
        return {lo, hi};
    }

    // Keeps only docs whose day falls inside the window.
    Corpus filtered(DateRange window) const {
        Corpus out;
        out.day_offset_seconds = day_offset_seconds;
        for (const Doc& d : docs)
            if (window.contains(doc_day(d))) out.docs.push_back(d);
        return out;
    }
};

enum class CorpusFormat { Jsonl, Csv };

inline CorpusFormat parse_corpus_format(std::string_view s) {
    if (s == "jsonl") return CorpusFormat::Jsonl;
    if (s == "csv") return CorpusFormat::Csv;
    throw ConfigError("unknown corpus format: '" + std::string(s) + "' (expected jsonl or csv)");
}

struct LoadReport {
    std::size_t loaded = 0;
    std::size_t skipped = 0;     // malformed records
    std::size_t duplicates = 0;  // repeated ids (first kept)
};

namespace detail {

inline bool doc_from_json(const nlohmann::json& j, Doc& doc, std::string& why) {
    if (!j.is_object()) { why = "not an object"; return false; }
    try {
        if (!j.contains("id") || !j.at("id").is_string()) { why = "missing id"; return false; }
        doc.id = j.at("id").get<std::string>();
        if (doc.id.empty()) { why = "empty id"; return false; }
        if (!j.contains("timestamp")) { why = "missing timestamp"; return false; }
        const auto& ts = j.at("timestamp");
        if (ts.is_number_integer()) doc.timestamp = ts.get<std::int64_t>();
        else if (ts.is_string()) doc.timestamp = parse_timestamp(ts.get<std::string>());
        else { why = "bad timestamp"; return false; }
        if (!j.contains("text") || !j.at("text").is_string()) { why = "missing text"; return false; }
        doc.text = j.at("text").get<std::string>();
        if (!j.contains("retweet_count") || !j.at("retweet_count").is_number_integer()) {
            why = "missing retweet_count";
            return false;
        }
        doc.retweet_count = j.at("retweet_count").get<std::int64_t>();
        if (doc.retweet_count < 0) { why = "negative retweet_count"; return false; }
        if (!j.contains("user_id") || !j.at("user_id").is_string()) { why = "missing user_id"; return false; }
        doc.user_id = j.at("user_id").get<std::string>();
        doc.lang = j.value("lang", std::string());
        return true;
    } catch (const std::exception& e) {
        why = e.what();
        return false;
    }
}

}  // namespace detail

// Loads a corpus file. Malformed records are skipped (counted, warned);
// duplicate ids keep the first occurrence. Docs come back sorted by
// timestamp (stable, so equal timestamps keep file order).
inline Corpus load_corpus(const std::string& path, CorpusFormat format,
                          LoadReport* report = nullptr, Warnings* warnings = nullptr) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open corpus file: " + path);

    Corpus corpus;
    LoadReport rep;
    std::unordered_set<std::string> seen_ids;

    auto add = [&](Doc&& doc, std::size_t lineno) {
        if (!seen_ids.insert(doc.id).second) {
            ++rep.duplicates;
            warn(warnings, "line " + std::to_string(lineno) + ": duplicate id '" + doc.id +
                               "', keeping first");
            return;
        }
        corpus.docs.push_back(std::move(doc));
        ++rep.loaded;
    };
    auto skip = [&](std::size_t lineno, const std::string& why) {
        ++rep.skipped;
        warn(warnings, "line " + std::to_string(lineno) + ": skipped record (" + why + ")");
    };

    if (format == CorpusFormat::Jsonl) {
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            if (trim(line).empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) { skip(lineno, "invalid JSON"); continue; }
            Doc doc;
            std::string why;
            if (!detail::doc_from_json(j, doc, why)) { skip(lineno, why); continue; }
            add(std::move(doc), lineno);
        }
    } else {
        csv::Reader reader(is);
        std::vector<std::string> row;
        if (!reader.next(row)) throw ConfigError("CSV corpus file has no header row: " + path);
        std::map<std::string, std::size_t> col;
        for (std::size_t i = 0; i < row.size(); ++i) col[trim(row[i])] = i;
        for (const char* required : {"id", "timestamp", "text", "retweet_count", "user_id"})
            if (!col.count(required))
                throw ConfigError("CSV corpus header missing column '" + std::string(required) + "'");
        const std::size_t lang_col = col.count("lang") ? col["lang"] : SIZE_MAX;

        std::size_t lineno = 1;
        while (reader.next(row)) {
            ++lineno;
            if (row.size() == 1 && row[0].empty()) continue;
            if (row.size() < col.size()) { skip(lineno, "too few fields"); continue; }
            Doc doc;
            try {
                doc.id = row[col["id"]];
                if (doc.id.empty()) { skip(lineno, "empty id"); continue; }
                doc.timestamp = parse_timestamp(row[col["timestamp"]]);
                doc.text = row[col["text"]];
                const std::string& rt = row[col["retweet_count"]];
                std::size_t pos = 0;
                doc.retweet_count = std::stoll(rt, &pos);
                if (pos != rt.size() || doc.retweet_count < 0) { skip(lineno, "bad retweet_count"); continue; }
                doc.user_id = row[col["user_id"]];
                if (lang_col != SIZE_MAX && lang_col < row.size()) doc.lang = row[lang_col];
            } catch (const std::exception& e) {
                skip(lineno, e.what());
                continue;
            }
            add(std::move(doc), lineno);
        }
    }

    std::stable_sort(corpus.docs.begin(), corpus.docs.end(),
                     [](const Doc& a, const Doc& b) { return a.timestamp < b.timestamp; });
    if (report) *report = rep;
    return corpus;
}

// Daily document counts over the window; days without docs get 0.
inline DailySeries daily_counts(const Corpus& corpus, DateRange window,
                                Warnings* warnings = nullptr) {
    if (window.days() <= 0) throw ConfigError("empty study window");
    DailySeries series{window.start, std::vector<double>(window.days(), 0.0)};
    bool any = false;
    for (const Doc& d : corpus.docs) {
        Date day = corpus.doc_day(d);
        if (!window.contains(day)) continue;
        series.values[day - window.start] += 1.0;
        any = true;
    }
    if (!any && !corpus.docs.empty())
        warn(warnings, "study window " + window.start.str() + ".." + window.end.str() +
                           " contains no documents");
    return series;
}

struct DailyBreakdown {
    DailySeries tweets;
    DailySeries retweets;
    DailySeries unique_users;
};

inline DailyBreakdown daily_breakdown(const Corpus& corpus, DateRange window) {
    const int n = window.days();
    DailyBreakdown out{{window.start, std::vector<double>(n, 0.0)},
                       {window.start, std::vector<double>(n, 0.0)},
                       {window.start, std::vector<double>(n, 0.0)}};
    std::vector<std::set<std::string>> users(n);
    for (const Doc& d : corpus.docs) {
        Date day = corpus.doc_day(d);
        if (!window.contains(day)) continue;
        const int i = day - window.start;
        out.tweets.values[i] += 1.0;
        out.retweets.values[i] += static_cast<double>(d.retweet_count);
        users[i].insert(d.user_id);
    }
    for (int i = 0; i < n; ++i) out.unique_users.values[i] = static_cast<double>(users[i].size());
    return out;
}

inline double tweet_depth(double tweets_per_day, double retweets_per_day) {
    return tweets_per_day > 0.0 ? retweets_per_day / tweets_per_day : 0.0;
}

// Per-phase descriptive rates. users_per_day is the mean over the phase's
// days of that day's distinct-user count.
struct PhaseStats {
    int phase_index;
    double users_per_day;
    double tweets_per_day;    // A
    double retweets_per_day;  // B
    double depth;             // B/A
    bool zero_tweets = false;
};

inline PhaseStats phase_stats(const Corpus& corpus, int phase_index, DateRange phase) {
    const int days = phase.days();
    if (days <= 0) throw ConfigError("phase has no days");

    std::size_t doc_count = 0;
    std::int64_t retweet_sum = 0;
    std::vector<std::set<std::string>> users(days);
    for (const Doc& d : corpus.docs) {
        Date day = corpus.doc_day(d);
        if (!phase.contains(day)) continue;
        ++doc_count;
        retweet_sum += d.retweet_count;
        users[day - phase.start].insert(d.user_id);
    }
    double user_days = 0.0;
    for (const auto& s : users) user_days += static_cast<double>(s.size());

    PhaseStats stats;
    stats.phase_index = phase_index;
    stats.tweets_per_day = static_cast<double>(doc_count) / days;
    stats.retweets_per_day = static_cast<double>(retweet_sum) / days;
    stats.users_per_day = user_days / days;
    stats.zero_tweets = doc_count == 0;
    stats.depth = tweet_depth(stats.tweets_per_day, stats.retweets_per_day);
    return stats;
}

}  // namespace phaselda
