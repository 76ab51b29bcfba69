#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "phaselda/corpus.hpp"
#include "phaselda/rng.hpp"

using namespace phaselda;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = "/tmp/phaselda_test_" + name;
    std::ofstream os(path, std::ios::binary);
    os << content;
    return path;
}

Doc make_doc(const std::string& id, const std::string& day, int hour, std::int64_t retweets,
             const std::string& user) {
    Doc d;
    d.id = id;
    d.timestamp = std::int64_t(Date::parse(day).days()) * 86400 + hour * 3600;
    d.text = "text " + id;
    d.retweet_count = retweets;
    d.user_id = user;
    return d;
}

}  // namespace

TEST_CASE("load_corpus jsonl: well-formed, malformed, duplicates") {
    const std::string path = write_temp("corpus.jsonl", R"({"id":"a","timestamp":"2020-01-02T10:00:00","text":"hello","retweet_count":3,"user_id":"u1"}
{"id":"b","timestamp":1577961000,"text":"second","retweet_count":0,"user_id":"u2","lang":"ko"}
{"id":"c","text":"missing timestamp","retweet_count":1,"user_id":"u3"}
{"id":"a","timestamp":"2020-01-03T10:00:00","text":"dup id","retweet_count":9,"user_id":"u4"}
not json at all
{"id":"d","timestamp":"2020-01-01T00:00:00","text":"first","retweet_count":2,"user_id":"u1"}
)");
    LoadReport report;
    Warnings warnings;
    Corpus corpus = load_corpus(path, CorpusFormat::Jsonl, &report, &warnings);
    std::remove(path.c_str());

    CHECK(report.loaded == 3);
    CHECK(report.skipped == 2);
    CHECK(report.duplicates == 1);
    REQUIRE(corpus.size() == 3);
    // sorted by timestamp: d (Jan 1), a (Jan 2 10:00), b (Jan 2 10:30)
    CHECK(corpus.docs[0].id == "d");
    CHECK(corpus.docs[1].id == "a");
    CHECK(corpus.docs[2].id == "b");
    CHECK(corpus.docs[1].retweet_count == 3);  // first occurrence kept
    CHECK(warnings.size() == 3);
}

TEST_CASE("load_corpus csv matches jsonl semantics") {
    const std::string path = write_temp("corpus.csv",
                                        "id,timestamp,text,retweet_count,user_id\r\n"
                                        "a,2020-01-02T10:00:00,\"hello, world\",3,u1\r\n"
                                        "b,2020-01-01T09:00:00,plain,0,u2\r\n"
                                        "c,2020-01-01T09:00:00,bad count,-1,u2\r\n");
    LoadReport report;
    Corpus corpus = load_corpus(path, CorpusFormat::Csv, &report);
    std::remove(path.c_str());

    CHECK(report.loaded == 2);
    CHECK(report.skipped == 1);
    REQUIRE(corpus.size() == 2);
    CHECK(corpus.docs[0].id == "b");
    CHECK(corpus.docs[1].text == "hello, world");
}

TEST_CASE("load_corpus: unreadable file is fatal") {
    CHECK_THROWS_AS(load_corpus("/nonexistent/nowhere.jsonl", CorpusFormat::Jsonl), ConfigError);
}

TEST_CASE("daily_counts: planted days, zeros, window mismatch") {
    Corpus corpus;
    corpus.docs = {make_doc("1", "2020-01-01", 1, 0, "u1"), make_doc("2", "2020-01-01", 22, 0, "u2"),
                   make_doc("3", "2020-01-03", 5, 0, "u1")};
    const DateRange window{Date::parse("2020-01-01"), Date::parse("2020-01-03")};

    DailySeries counts = daily_counts(corpus, window);
    CHECK(counts.values == std::vector<double>{2, 0, 1});

    // empty corpus -> zeros
    Corpus empty;
    CHECK(daily_counts(empty, window).values == std::vector<double>{0, 0, 0});

    // disjoint window -> zeros plus a warning
    Warnings warnings;
    const DateRange far{Date::parse("2021-01-01"), Date::parse("2021-01-03")};
    CHECK(daily_counts(corpus, far, &warnings).values == std::vector<double>{0, 0, 0});
    CHECK(warnings.size() == 1);
}

TEST_CASE("daily_counts conserves corpus size and ignores input order") {
    Corpus corpus;
    Rng rng(11);
    const Date start = Date::parse("2020-02-01");
    for (int i = 0; i < 500; ++i) {
        corpus.docs.push_back(make_doc("d" + std::to_string(i),
                                       (start + static_cast<int>(rng.uniform_int(30))).str(),
                                       static_cast<int>(rng.uniform_int(24)), 0, "u"));
    }
    const DateRange window{start, start + 29};
    DailySeries counts = daily_counts(corpus, window);
    double total = 0;
    for (double v : counts.values) total += v;
    CHECK(total == 500.0);

    std::reverse(corpus.docs.begin(), corpus.docs.end());
    CHECK(daily_counts(corpus, window).values == counts.values);
}

TEST_CASE("phase_stats rates and depth") {
    Corpus corpus;
    // 2-day phase: day 1 has docs from u1,u1,u2 (retweets 4,6,10); day 2 has u1 (retweets 0)
    corpus.docs = {make_doc("1", "2020-01-01", 1, 4, "u1"), make_doc("2", "2020-01-01", 2, 6, "u1"),
                   make_doc("3", "2020-01-01", 3, 10, "u2"), make_doc("4", "2020-01-02", 1, 0, "u1")};
    const PhaseStats stats =
        phase_stats(corpus, 0, {Date::parse("2020-01-01"), Date::parse("2020-01-02")});
    CHECK(stats.tweets_per_day == 2.0);
    CHECK(stats.retweets_per_day == 10.0);
    CHECK(stats.users_per_day == 1.5);  // 2 users day 1, 1 user day 2
    CHECK(stats.depth == 5.0);
    CHECK_FALSE(stats.zero_tweets);
    CHECK(stats.users_per_day <= stats.tweets_per_day);

    // zero-tweet phase: depth 0 with flag
    const PhaseStats empty =
        phase_stats(corpus, 1, {Date::parse("2020-02-01"), Date::parse("2020-02-02")});
    CHECK(empty.zero_tweets);
    CHECK(empty.depth == 0.0);
}

TEST_CASE("tweet depth reproduces published phase rows") {
    // (tweets/day A, retweets/day B, depth) for each published phase
    struct Row { double a, b, depth; };
    const Row rows[] = {
        {28.17, 21.78, 0.77},       {5244.09, 56809.78, 10.83},
        {17796.08, 211310.89, 11.87}, {13095.65, 147759.41, 11.28},
        {385.63, 1315.13, 3.41},    {5272.04, 22128.76, 4.20},
    };
    for (const Row& r : rows)
        CHECK(std::abs(tweet_depth(r.a, r.b) - r.depth) <= 0.01);
}

TEST_CASE("filtered keeps only docs inside the window") {
    Corpus corpus;
    corpus.docs = {make_doc("1", "2020-01-01", 1, 0, "u"), make_doc("2", "2020-02-01", 1, 0, "u"),
                   make_doc("3", "2020-03-01", 1, 0, "u")};
    Corpus inside = corpus.filtered({Date::parse("2020-01-15"), Date::parse("2020-02-15")});
    REQUIRE(inside.size() == 1);
    CHECK(inside.docs[0].id == "2");
}
