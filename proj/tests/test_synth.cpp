#include <catch_amalgamated.hpp>

#include "phaselda/synth.hpp"

using namespace phaselda;

namespace {

synth::SynthSpec base_spec() {
    synth::SynthSpec spec;
    spec.window = {Date::parse("2020-01-01"), Date::parse("2020-03-27")};
    spec.anchor = Date::parse("2020-01-20");
    spec.baseline_rate = 10.0;
    spec.seed = 42;
    return spec;
}

}  // namespace

TEST_CASE("gen_series: constant baseline yields anchor-only boundaries") {
    synth::SynthSpec spec = base_spec();
    auto [series, ledger] = synth::gen_series(spec);
    CHECK(series.size() == spec.window.days());
    for (double v : series.values) CHECK(v == 10.0);
    CHECK(ledger.expected_boundaries == std::vector<Date>{spec.anchor});
}

TEST_CASE("gen_series: ledger thresholds follow the floor rules") {
    synth::SynthSpec spec = base_spec();
    spec.bursts = {{spec.anchor, 300.0, 4000.0}};
    auto [series, ledger] = synth::gen_series(spec);

    // recompute from the clean smoothed series, independently
    DailySeries clean{spec.window.start, ledger.clean_counts};
    Kinetics kin = kinetics(lowpass(clean, spec.cutoff));
    const double v = kin.velocity.at(spec.anchor);
    const double a = kin.acceleration.at(spec.anchor);
    CHECK(ledger.velocity_threshold == static_cast<std::int64_t>(std::floor(v)) + 1);
    CHECK(ledger.acceleration_threshold == static_cast<std::int64_t>(std::floor(a)));
}

TEST_CASE("gen_series: determinism and noise reproducibility") {
    synth::SynthSpec spec = base_spec();
    spec.bursts = {{spec.anchor, 200.0, 2000.0}};
    spec.noise_sd = 15.0;
    auto [s1, l1] = synth::gen_series(spec);
    auto [s2, l2] = synth::gen_series(spec);
    CHECK(s1.values == s2.values);
    CHECK(l1.expected_boundaries == l2.expected_boundaries);

    spec.seed = 43;
    auto [s3, l3] = synth::gen_series(spec);
    CHECK(s1.values != s3.values);
    // the oracle scans the clean series; noise does not move it
    CHECK(l1.expected_boundaries == l3.expected_boundaries);
}

TEST_CASE("gen_series rejects contradictory specs") {
    synth::SynthSpec spec = base_spec();
    spec.bursts = {{Date::parse("2019-12-01"), 100.0, 1000.0}};
    nlohmann::json j = spec.to_json();
    CHECK_THROWS_AS(synth::SynthSpec::from_json(j), ConfigError);
}

TEST_CASE("spec json round trip") {
    synth::SynthSpec spec = base_spec();
    spec.bursts = {{spec.anchor, 300.0, 4000.0}};
    spec.topics = {{{"alpha", "beta"}, 0.6, {"news"}}, {{"gamma"}, 0.4, {"politics", "news_economy"}}};
    spec.mentions = {{"Italy", "italy", 0.1}};
    spec.doc_length = 15;

    synth::SynthSpec back = synth::SynthSpec::from_json(spec.to_json());
    CHECK(back.window.start == spec.window.start);
    CHECK(back.anchor == spec.anchor);
    CHECK(back.bursts.size() == 1);
    CHECK(back.topics.size() == 2);
    CHECK(back.topics[1].themes == spec.topics[1].themes);
    CHECK(back.mentions.size() == 1);
    CHECK(back.doc_length == 15);
}

TEST_CASE("gen_corpus: ledger partition and recount") {
    synth::SynthSpec spec = base_spec();
    spec.window = {Date::parse("2020-01-01"), Date::parse("2020-01-31")};
    spec.anchor = Date::parse("2020-01-10");
    spec.baseline_rate = 32.0;  // ~1000 docs over 31 days
    spec.topics = {{{}, 0.5, {"news"}}, {{}, 0.5, {"politics"}}};
    for (int t = 0; t < 2; ++t)
        for (int w = 0; w < 30; ++w)
            spec.topics[t].signature_tokens.push_back("k" + std::to_string(t) + "w" +
                                                      std::to_string(w));
    spec.mentions = {{"Italy", "italy", 0.05}, {"China", "china", 0.2}, {"US", "u.s.", 0.1}};

    synth::GeneratedCorpus gen = synth::gen_corpus(spec);
    CHECK(gen.ledger.doc_count == gen.corpus.size());
    CHECK(gen.ledger.doc_topic.size() == gen.corpus.size());

    // planted topics cover both groups
    int seen[2] = {0, 0};
    for (const auto& [id, t] : gen.ledger.doc_topic) ++seen[t];
    CHECK(seen[0] > 0);
    CHECK(seen[1] > 0);

    // theme ledger arithmetic: every doc contributes exactly weight 1
    double theme_total = 0.0;
    for (const auto& [key, w] : gen.ledger.theme_trends) theme_total += w;
    CHECK(theme_total == static_cast<double>(gen.corpus.size()));

    // mention ledger equals a direct recount of planted mentions
    std::map<std::pair<std::string, std::string>, double> recount;
    for (const Doc& d : gen.corpus.docs) {
        auto it = gen.ledger.doc_countries.find(d.id);
        if (it == gen.ledger.doc_countries.end()) continue;
        for (const auto& country : it->second)
            recount[{gen.corpus.doc_day(d).str(), country}] += 1.0;
    }
    CHECK(recount == gen.ledger.mention_trends);

    // same spec + seed -> byte-identical corpus
    synth::GeneratedCorpus again = synth::gen_corpus(spec);
    REQUIRE(again.corpus.size() == gen.corpus.size());
    for (std::size_t i = 0; i < gen.corpus.docs.size(); ++i) {
        CHECK(gen.corpus.docs[i].id == again.corpus.docs[i].id);
        CHECK(gen.corpus.docs[i].text == again.corpus.docs[i].text);
        CHECK(gen.corpus.docs[i].retweet_count == again.corpus.docs[i].retweet_count);
    }
}
