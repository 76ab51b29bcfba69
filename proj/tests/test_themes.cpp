#include <catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "phaselda/rng.hpp"
#include "phaselda/themes.hpp"
#include "planted.hpp"

using namespace phaselda;

namespace {

std::map<std::string, int> assignments_from_sizes(const std::vector<int>& sizes) {
    std::map<std::string, int> out;
    int n = 0;
    for (std::size_t k = 0; k < sizes.size(); ++k)
        for (int i = 0; i < sizes[k]; ++i) out["d" + std::to_string(n++)] = static_cast<int>(k);
    return out;
}

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = "/tmp/phaselda_test_" + name;
    std::ofstream os(path, std::ios::binary);
    os << content;
    return path;
}

}  // namespace

TEST_CASE("major_topics: cumulative-75 rule") {
    // sizes [50,30,15,5]: 50+30 = 80 >= 75 -> keep {0,1}
    auto kept = major_topics(assignments_from_sizes({50, 30, 15, 5}), 4);
    CHECK(kept == std::set<int>{0, 1});

    // single topic keeps itself
    CHECK(major_topics(assignments_from_sizes({10}), 1) == std::set<int>{0});

    // exactly 75% stops the prefix
    CHECK(major_topics(assignments_from_sizes({75, 20, 5}), 3) == std::set<int>{0});

    CHECK_THROWS_AS(major_topics({}, 3), ConfigError);
}

TEST_CASE("major_topics: kept prefix covers >= 75% and is minimal") {
    Rng rng(500);
    for (int trial = 0; trial < 500; ++trial) {
        const int K = 1 + static_cast<int>(rng.uniform_int(40));
        std::vector<int> sizes(K);
        int total = 0;
        for (int& s : sizes) {
            s = static_cast<int>(rng.uniform_int(60));
            total += s;
        }
        if (total == 0) { sizes[0] = 1; total = 1; }
        const auto assignments = assignments_from_sizes(sizes);
        const auto kept = major_topics(assignments, K);

        std::int64_t covered = 0;
        int smallest_kept = -1;
        for (int k : kept) {
            covered += sizes[k];
            if (smallest_kept < 0 || sizes[k] < sizes[smallest_kept]) smallest_kept = k;
        }
        CHECK(static_cast<double>(covered) >= 0.75 * total);
        // minimal: dropping the smallest kept topic dips below 75%
        CHECK(static_cast<double>(covered - sizes[smallest_kept]) < 0.75 * total);
        for (int k : kept) CHECK(sizes[k] > 0);
    }
}

TEST_CASE("major_topics: distribution-25 mode keeps topics above the size percentile") {
    const auto assignments = assignments_from_sizes({50, 30, 15, 5});
    // sorted sizes [5,15,30,50]; p25 = 5 + 0.75*(15-5) = 12.5 -> keep sizes >= 12.5
    auto kept = major_topics(assignments, 4, PercentileMode::Distribution25);
    CHECK(kept == std::set<int>{0, 1, 2});
}

TEST_CASE("topic_summaries: keyword ordering and exemplar truncation") {
    auto pc = planted::make(2, 40, 12, 50, 67);
    LdaModel m = gibbs_train(pc.corpus, 2, 25.0, 0.01, 60, 1);

    std::map<std::string, std::int64_t> retweets;
    for (std::size_t i = 0; i < pc.corpus.docs.size(); ++i)
        retweets[pc.corpus.docs[i].doc_id] = static_cast<std::int64_t>(i % 17);

    const auto assignments = assign_topics(m);
    const auto kept = major_topics(assignments, m.K);
    const auto summaries = topic_summaries(m, pc.corpus, retweets, 1, kept);
    REQUIRE_FALSE(summaries.empty());
    for (const auto& s : summaries) {
        CHECK(s.phase_index == 1);
        CHECK(s.keywords.size() <= 30);
        for (std::size_t i = 1; i < s.keywords.size(); ++i)
            CHECK(s.keywords[i - 1].probability >= s.keywords[i].probability);
        CHECK(s.exemplars.size() <= 1000);
        for (std::size_t i = 1; i < s.exemplars.size(); ++i)
            CHECK(retweets[s.exemplars[i - 1]] >= retweets[s.exemplars[i]]);
        // planted signature tokens dominate their topic's keywords
        std::size_t signature_hits = 0;
        for (const auto& kw : s.keywords)
            if (kw.token.substr(0, 2) == "t0" || kw.token.substr(0, 2) == "t1") ++signature_hits;
        CHECK(signature_hits == s.keywords.size());
    }

    // a topic with 5 assigned docs gets 5 exemplars
    const auto& any = summaries.front();
    CHECK(static_cast<std::int64_t>(any.exemplars.size()) == any.size);
}

TEST_CASE("load_label_file: parsing, merging, and rejection") {
    const std::string good = write_temp("labels_good.csv",
                                        "phase,topic,themes\n"
                                        "1,3,news_confirmed\n"
                                        "1,4,news_hate|politics\n"
                                        "2,0,celebrity\n"
                                        "2,1,news|news\n");
    ThemeLabelMap labels = load_label_file(good);
    std::remove(good.c_str());
    REQUIRE(labels.find(1, 3));
    CHECK(*labels.find(1, 3) == std::vector<std::string>{"news_confirmed"});
    CHECK(*labels.find(1, 4) == std::vector<std::string>{"news_hate", "politics"});
    CHECK(*labels.find(2, 1) == std::vector<std::string>{"news"});  // duplicates merged
    CHECK(labels.find(0, 0) == nullptr);

    const std::string three = write_temp("labels_three.csv", "phase,topic,themes\n1,3,a|b|c\n");
    CHECK_THROWS_AS(load_label_file(three), ConfigError);
    std::remove(three.c_str());

    const std::string badsuffix =
        write_temp("labels_suffix.csv", "phase,topic,themes\n1,3,news_viral\n");
    CHECK_THROWS_WITH(load_label_file(badsuffix),
                      Catch::Matchers::ContainsSubstring("line 2"));
    std::remove(badsuffix.c_str());

    // localnews with a valid suffix is fine; non-news themes may use underscores
    const std::string local = write_temp("labels_local.csv",
                                         "phase,topic,themes\n0,0,localnews_economy|stay_home\n");
    ThemeLabelMap ok = load_label_file(local);
    std::remove(local.c_str());
    CHECK(ok.find(0, 0)->size() == 2);
}

TEST_CASE("theme_trends: weights and conservation") {
    // topic 0 labeled {news}, topic 1 labeled {news_confirmed, politics}
    ThemeLabelMap labels;
    labels.entries[{0, 0}] = {"news"};
    labels.entries[{0, 1}] = {"news_confirmed", "politics"};

    std::map<std::string, int> assignments;
    std::map<std::string, Date> dates;
    const Date day = Date::parse("2020-02-01");
    for (int i = 0; i < 10; ++i) {
        assignments["a" + std::to_string(i)] = 0;
        dates["a" + std::to_string(i)] = day;
        assignments["b" + std::to_string(i)] = 1;
        dates["b" + std::to_string(i)] = day;
    }

    TrendTable table;
    add_theme_trends(table, 0, assignments, {0, 1}, labels, dates);
    CHECK(table.rows.at({day, "news"}) == 10.0);
    CHECK(table.rows.at({day, "news_confirmed"}) == 5.0);
    CHECK(table.rows.at({day, "politics"}) == 5.0);
    CHECK(table.total() == 20.0);  // one unit of weight per kept doc

    // docs in discarded topics contribute nothing
    TrendTable only0;
    add_theme_trends(only0, 0, assignments, {0}, labels, dates);
    CHECK(only0.total() == 10.0);

    // unlabeled kept topic -> error naming it
    ThemeLabelMap partial;
    partial.entries[{0, 0}] = {"news"};
    TrendTable t2;
    CHECK_THROWS_WITH(add_theme_trends(t2, 0, assignments, {0, 1}, partial, dates),
                      Catch::Matchers::ContainsSubstring("1"));
}

TEST_CASE("mention_trends: substring matching with per-doc dedup") {
    Corpus corpus;
    auto add_doc = [&](const std::string& id, const std::string& text) {
        Doc d;
        d.id = id;
        d.timestamp = std::int64_t(Date::parse("2020-03-01").days()) * 86400;
        d.text = text;
        d.retweet_count = 0;
        d.user_id = "u";
        corpus.docs.push_back(d);
    };
    add_doc("1", "corona in Italy and the US");
    add_doc("2", "italy italy italy");
    add_doc("3", "nothing here");

    MentionLexicon lex;
    lex.aliases["Italy"] = {"italy"};
    lex.aliases["US"] = {"us", "u.s."};

    TrendTable table = mention_trends(corpus, lex);
    const Date day = Date::parse("2020-03-01");
    CHECK(table.rows.at({day, "Italy"}) == 2.0);  // docs 1 and 2, each once
    CHECK(table.rows.at({day, "US"}) == 1.0);

    // per-country daily count never exceeds the daily doc count
    for (const auto& [key, v] : table.rows) CHECK(v <= 3.0);
}

TEST_CASE("lexicon file loads and validates") {
    const std::string path = write_temp("lexicon.csv",
                                        "country,alias\nItaly,italy\nItaly,italia\nUS,u.s.\n");
    MentionLexicon lex = load_lexicon_file(path);
    std::remove(path.c_str());
    CHECK(lex.aliases.at("Italy").size() == 2);
    CHECK(lex.aliases.at("US").size() == 1);

    const std::string empty = write_temp("lexicon_empty.csv", "country,alias\n");
    CHECK_THROWS_AS(load_lexicon_file(empty), ConfigError);
    std::remove(empty.c_str());
}
