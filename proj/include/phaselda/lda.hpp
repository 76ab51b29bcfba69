#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "phaselda/rng.hpp"
#include "phaselda/textprep.hpp"
#include "phaselda/util.hpp"

namespace phaselda {

// Collapsed-Gibbs LDA state. Count matrices are flat row-major; they are
// kept exactly consistent with the per-token assignments at all times.
struct LdaModel {
    int K = 0;
    int V = 0;
    double alpha = 0.0;
    double beta = 0.0;
    std::uint64_t seed = 0;
    int epochs_run = 0;

    std::vector<std::string> doc_ids;
    std::vector<std::vector<int>> assignments;  // parallel to the training docs' tokens

    std::vector<std::int64_t> n_dk;  // D x K
    std::vector<std::int64_t> n_kw;  // K x V
    std::vector<std::int64_t> n_k;   // K

    int D() const { return static_cast<int>(doc_ids.size()); }

    std::int64_t& dk(int d, int k) { return n_dk[static_cast<std::size_t>(d) * K + k]; }
    std::int64_t dk(int d, int k) const { return n_dk[static_cast<std::size_t>(d) * K + k]; }
    std::int64_t& kw(int k, int w) { return n_kw[static_cast<std::size_t>(k) * V + w]; }
    std::int64_t kw(int k, int w) const { return n_kw[static_cast<std::size_t>(k) * V + w]; }

    // Posterior-mean topic-word distribution, row k sums to 1.
    double phi(int k, int w) const {
        return (static_cast<double>(kw(k, w)) + beta) /
               (static_cast<double>(n_k[k]) + V * beta);
    }

    // Posterior-mean document-topic distribution for a doc of length len.
    double theta(int d, int k, std::size_t len) const {
        return (static_cast<double>(dk(d, k)) + alpha) /
               (static_cast<double>(len) + K * alpha);
    }
};

using EpochCallback = std::function<void(const LdaModel&, int epoch)>;

// One full collapsed-Gibbs training run. Deterministic in
// (corpus, K, alpha, beta, epochs, seed): documents and tokens are swept in
// order and all randomness comes from the seeded engine.
inline LdaModel gibbs_train(const EncodedCorpus& corpus, int K, double alpha, double beta,
                            int epochs = 100, std::uint64_t seed = 0,
                            Warnings* warnings = nullptr,
                            const EpochCallback& after_epoch = nullptr) {
    if (K < 2) throw ConfigError("LDA needs K >= 2, got " + std::to_string(K));
    if (corpus.docs.empty()) throw ConfigError("cannot train LDA on an empty corpus");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (K > static_cast<int>(corpus.docs.size()))
        warn(warnings, "K=" + std::to_string(K) + " exceeds document count " +
                           std::to_string(corpus.docs.size()) + " (degenerate but legal)");

    LdaModel m;
    m.K = K;
    m.V = corpus.vocab.size();
    m.alpha = alpha;
    m.beta = beta;
    m.seed = seed;
    const int D = static_cast<int>(corpus.docs.size());
    m.doc_ids.reserve(D);
    for (const auto& d : corpus.docs) m.doc_ids.push_back(d.doc_id);
    m.assignments.resize(D);
    m.n_dk.assign(static_cast<std::size_t>(D) * K, 0);
    m.n_kw.assign(static_cast<std::size_t>(K) * m.V, 0);
    m.n_k.assign(K, 0);

    Rng rng(seed);
    for (int d = 0; d < D; ++d) {
        const auto& tokens = corpus.docs[d].tokens;
        auto& z = m.assignments[d];
        z.resize(tokens.size());
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const int k = static_cast<int>(rng.uniform_int(K));
            z[i] = k;
            ++m.dk(d, k);
            ++m.kw(k, tokens[i]);
            ++m.n_k[k];
        }
    }

    const double vbeta = m.V * beta;
    std::vector<double> weights(K);
    for (int epoch = 1; epoch <= epochs; ++epoch) {
        for (int d = 0; d < D; ++d) {
            const auto& tokens = corpus.docs[d].tokens;
            auto& z = m.assignments[d];
            for (std::size_t i = 0; i < tokens.size(); ++i) {
                const int w = tokens[i];
                const int old_k = z[i];
                --m.dk(d, old_k);
                --m.kw(old_k, w);
                --m.n_k[old_k];

                for (int k = 0; k < K; ++k) {
                    weights[k] = (m.dk(d, k) + alpha) * (m.kw(k, w) + beta) /
                                 (m.n_k[k] + vbeta);
                }
                const int new_k = rng.discrete(weights.data(), K);

                z[i] = new_k;
                ++m.dk(d, new_k);
                ++m.kw(new_k, w);
                ++m.n_k[new_k];
            }
        }
        m.epochs_run = epoch;
        if (after_epoch) after_epoch(m, epoch);
    }
    return m;
}

// PPL = exp(-mean log sum_k theta_dk phi_kw) over all tokens, with theta and
// phi the posterior means from the count matrices.
inline double perplexity(const LdaModel& model, const EncodedCorpus& corpus) {
    if (corpus.docs.empty()) throw ConfigError("cannot compute perplexity of an empty corpus");
    if (static_cast<int>(corpus.docs.size()) != model.D())
        throw ConfigError("perplexity: corpus has " + std::to_string(corpus.docs.size()) +
                          " docs but model was trained on " + std::to_string(model.D()));
    if (corpus.vocab.size() != model.V)
        throw ConfigError("perplexity: vocabulary size mismatch");

    const int K = model.K;
    double log_sum = 0.0;
    std::size_t n_tokens = 0;
    std::vector<double> theta(K);
    for (int d = 0; d < model.D(); ++d) {
        const auto& tokens = corpus.docs[d].tokens;
        // theta's normalizer is the model's own token count for the doc, so
        // that theta rows always sum to 1 whatever corpus is scored
        std::size_t model_len = 0;
        for (int k = 0; k < K; ++k) model_len += static_cast<std::size_t>(model.dk(d, k));
        for (int k = 0; k < K; ++k) theta[k] = model.theta(d, k, model_len);
        for (int w : tokens) {
            double p = 0.0;
            for (int k = 0; k < K; ++k) p += theta[k] * model.phi(k, w);
            log_sum += std::log(p);
        }
        n_tokens += tokens.size();
    }
    if (n_tokens == 0) throw ConfigError("cannot compute perplexity: corpus has no tokens");
    return std::exp(-log_sum / static_cast<double>(n_tokens));
}

// Perplexity of the collapsed joint likelihood p(w, z | alpha, beta): the
// Dirichlet-multinomial marginals over both count matrices, per token. This
// is the quantity LDA toolkits report as training perplexity. Unlike the
// mixture form above it carries the model-complexity penalty, so sweeping K
// gives an interior minimum instead of rewarding every extra topic.
inline double joint_perplexity(const LdaModel& model, const EncodedCorpus& corpus) {
    if (corpus.docs.empty()) throw ConfigError("cannot compute perplexity of an empty corpus");
    if (static_cast<int>(corpus.docs.size()) != model.D())
        throw ConfigError("joint_perplexity: document count mismatch");

    const int K = model.K;
    const double alpha = model.alpha, beta = model.beta;
    double ll = 0.0;
    std::size_t n_tokens = 0;

    const double lg_alpha = std::lgamma(alpha);
    const double lg_kalpha = std::lgamma(K * alpha);
    for (int d = 0; d < model.D(); ++d) {
        std::int64_t len = 0;
        for (int k = 0; k < K; ++k) len += model.dk(d, k);
        ll += lg_kalpha - std::lgamma(static_cast<double>(len) + K * alpha);
        for (int k = 0; k < K; ++k)
            if (model.dk(d, k) > 0)
                ll += std::lgamma(static_cast<double>(model.dk(d, k)) + alpha) - lg_alpha;
        n_tokens += static_cast<std::size_t>(len);
    }

    const double lg_beta = std::lgamma(beta);
    const double lg_vbeta = std::lgamma(model.V * beta);
    for (int k = 0; k < K; ++k) {
        ll += lg_vbeta - std::lgamma(static_cast<double>(model.n_k[k]) + model.V * beta);
        for (int w = 0; w < model.V; ++w)
            if (model.kw(k, w) > 0)
                ll += std::lgamma(static_cast<double>(model.kw(k, w)) + beta) - lg_beta;
    }
    if (n_tokens == 0) throw ConfigError("cannot compute perplexity: corpus has no tokens");
    return std::exp(-ll / static_cast<double>(n_tokens));
}

// Hard assignment: argmax_k n_dk, ties to the lowest k.
inline std::map<std::string, int> assign_topics(const LdaModel& model) {
    std::map<std::string, int> out;
    for (int d = 0; d < model.D(); ++d) {
        int best = 0;
        std::int64_t best_n = model.dk(d, 0);
        for (int k = 1; k < model.K; ++k) {
            if (model.dk(d, k) > best_n) {
                best_n = model.dk(d, k);
                best = k;
            }
        }
        out[model.doc_ids[d]] = best;
    }
    return out;
}

struct SweepEntry {
    int k;
    double perplexity;
    double seconds;
};

struct SweepResult {
    std::vector<SweepEntry> entries;  // ordered by k; failed k values absent
    std::vector<std::pair<int, std::string>> failures;
    int k_star = 0;
    LdaModel best;  // the model for k_star
};

// alpha under the configured rule: fixed value, or 50/K when value < 0.
struct AlphaRule {
    double fixed = -1.0;  // < 0 means "50/K"

    double operator()(int k) const { return fixed < 0.0 ? 50.0 / k : fixed; }

    static AlphaRule fifty_over_k() { return AlphaRule{-1.0}; }
    static AlphaRule fixed_value(double v) {
        if (v <= 0.0) throw ConfigError("alpha must be > 0");
        return AlphaRule{v};
    }
};

// Trains one model per K in [k_min, k_max] (independent chains, per-K derived
// seeds), keeps the model minimizing perplexity. Ties favor the smallest K.
// The sweep may run on several workers; seeds derive from K alone, so the
// result is identical for any worker count. Pass all_models to retain every
// trained model instead of best-only.
inline SweepResult select_k(const EncodedCorpus& corpus, int k_min = 2, int k_max = 50,
                            AlphaRule alpha_rule = AlphaRule::fifty_over_k(),
                            double beta = 0.01, int epochs = 100, std::uint64_t seed = 0,
                            Warnings* warnings = nullptr, int workers = 1,
                            std::vector<LdaModel>* all_models = nullptr) {
    if (k_min > k_max) throw ConfigError("k_min must be <= k_max");
    if (k_min < 2) throw ConfigError("k_min must be >= 2");

    const int n = k_max - k_min + 1;
    std::vector<std::optional<SweepEntry>> entries(n);
    std::vector<std::optional<LdaModel>> models(n);
    std::vector<std::string> errors(n);

    auto run_one = [&](int slot) {
        const int k = k_min + slot;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            LdaModel m = gibbs_train(corpus, k, alpha_rule(k), beta, epochs,
                                     derive_seed(seed, static_cast<std::uint64_t>(k)), nullptr);
            const double ppl = joint_perplexity(m, corpus);
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            entries[slot] = SweepEntry{k, ppl, secs};
            models[slot] = std::move(m);
        } catch (const std::exception& e) {
            errors[slot] = e.what();
        }
    };

    if (workers <= 1 || n == 1) {
        for (int slot = 0; slot < n; ++slot) run_one(slot);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        const int nthreads = std::min(workers, n);
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back([&] {
                for (int slot = next.fetch_add(1); slot < n; slot = next.fetch_add(1))
                    run_one(slot);
            });
        for (auto& th : pool) th.join();
    }

    SweepResult result;
    double best_ppl = std::numeric_limits<double>::infinity();
    for (int slot = 0; slot < n; ++slot) {
        const int k = k_min + slot;
        if (!entries[slot]) {
            result.failures.emplace_back(k, errors[slot]);
            warn(warnings, "K=" + std::to_string(k) + " failed: " + errors[slot]);
            continue;
        }
        result.entries.push_back(*entries[slot]);
        if (entries[slot]->perplexity < best_ppl) {  // strict: ties keep the smaller K
            best_ppl = entries[slot]->perplexity;
            result.k_star = k;
            result.best = *models[slot];
        }
        if (all_models) all_models->push_back(std::move(*models[slot]));
    }
    if (result.entries.empty())
        throw ConfigError("topic-count sweep failed for every K in [" + std::to_string(k_min) +
                          "," + std::to_string(k_max) + "]");
    return result;
}

// ---- binary model serialization -------------------------------------------
//
// model_<phase>.bin layout (little-endian):
//   magic "PLDM" | u32 version=1 | u64 config_hash | u64 seed
//   i32 K | i32 V | i32 D | f64 alpha | f64 beta | i32 epochs_run
//   V vocabulary tokens (u32 length + bytes)
//   per doc: id (u32 length + bytes), u32 token count, tokens (i32),
//            assignments (i32)
// Count matrices are rebuilt from the assignments on load.

namespace detail {

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ConfigError("model file truncated");
    return v;
}

inline void put_string(std::ostream& os, const std::string& s) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& is) {
    const auto len = get<std::uint32_t>(is);
    std::string s(len, '\0');
    is.read(s.data(), len);
    if (!is) throw ConfigError("model file truncated");
    return s;
}

}  // namespace detail

struct ModelFile {
    LdaModel model;
    EncodedCorpus corpus;  // tokens + vocabulary round-trip with the model
    std::uint64_t config_hash = 0;
};

inline void save_model(const std::string& path, const LdaModel& model,
                       const EncodedCorpus& corpus, std::uint64_t config_hash) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write model file: " + path);
    os.write("PLDM", 4);
    detail::put<std::uint32_t>(os, 1);
    detail::put<std::uint64_t>(os, config_hash);
    detail::put<std::uint64_t>(os, model.seed);
    detail::put<std::int32_t>(os, model.K);
    detail::put<std::int32_t>(os, model.V);
    detail::put<std::int32_t>(os, model.D());
    detail::put<double>(os, model.alpha);
    detail::put<double>(os, model.beta);
    detail::put<std::int32_t>(os, model.epochs_run);
    for (const auto& tok : corpus.vocab.id_to_token) detail::put_string(os, tok);
    for (int d = 0; d < model.D(); ++d) {
        const auto& doc = corpus.docs[d];
        detail::put_string(os, doc.doc_id);
        detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(doc.tokens.size()));
        for (int w : doc.tokens) detail::put<std::int32_t>(os, w);
        for (int z : model.assignments[d]) detail::put<std::int32_t>(os, z);
    }
    if (!os) throw ConfigError("failed writing model file: " + path);
}

inline ModelFile load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open model file: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "PLDM", 4) != 0)
        throw ConfigError("not a model file: " + path);
    const auto version = detail::get<std::uint32_t>(is);
    if (version != 1) throw ConfigError("unsupported model file version " + std::to_string(version));

    ModelFile mf;
    mf.config_hash = detail::get<std::uint64_t>(is);
    LdaModel& m = mf.model;
    m.seed = detail::get<std::uint64_t>(is);
    m.K = detail::get<std::int32_t>(is);
    m.V = detail::get<std::int32_t>(is);
    const int D = detail::get<std::int32_t>(is);
    m.alpha = detail::get<double>(is);
    m.beta = detail::get<double>(is);
    m.epochs_run = detail::get<std::int32_t>(is);

    mf.corpus.vocab.id_to_token.resize(m.V);
    mf.corpus.vocab.counts.assign(m.V, 0);
    for (int w = 0; w < m.V; ++w) {
        mf.corpus.vocab.id_to_token[w] = detail::get_string(is);
        mf.corpus.vocab.token_to_id[mf.corpus.vocab.id_to_token[w]] = w;
    }

    m.n_dk.assign(static_cast<std::size_t>(D) * m.K, 0);
    m.n_kw.assign(static_cast<std::size_t>(m.K) * m.V, 0);
    m.n_k.assign(m.K, 0);
    m.doc_ids.resize(D);
    m.assignments.resize(D);
    mf.corpus.docs.resize(D);
    for (int d = 0; d < D; ++d) {
        m.doc_ids[d] = detail::get_string(is);
        mf.corpus.docs[d].doc_id = m.doc_ids[d];
        const auto n = detail::get<std::uint32_t>(is);
        auto& tokens = mf.corpus.docs[d].tokens;
        tokens.resize(n);
        for (auto& w : tokens) {
            w = detail::get<std::int32_t>(is);
            if (w < 0 || w >= m.V) throw ConfigError("corrupt model file: token id out of range");
            ++mf.corpus.vocab.counts[w];
        }
        auto& z = m.assignments[d];
        z.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const int k = detail::get<std::int32_t>(is);
            if (k < 0 || k >= m.K) throw ConfigError("corrupt model file: topic id out of range");
            z[i] = k;
            ++m.dk(d, k);
            ++m.kw(k, tokens[i]);
            ++m.n_k[k];
        }
    }
    return mf;
}

}  // namespace phaselda
