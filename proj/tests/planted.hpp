#pragma once

// Planted-partition corpora for sampler tests: disjoint per-topic
// vocabularies, docs drawn uniformly from their topic's tokens. The planted
// labels are the oracle.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "phaselda/rng.hpp"
#include "phaselda/textprep.hpp"

namespace planted {

struct PlantedCorpus {
    phaselda::EncodedCorpus corpus;
    std::vector<int> labels;  // planted topic per encoded doc
    int n_topics;
};

inline PlantedCorpus make(int n_topics, int docs_per_topic, int doc_len, int vocab_per_topic,
                          std::uint64_t seed) {
    phaselda::Rng rng(seed);
    std::vector<std::vector<std::string>> docs;
    std::vector<std::string> ids;
    std::vector<int> labels;
    for (int t = 0; t < n_topics; ++t) {
        for (int d = 0; d < docs_per_topic; ++d) {
            std::vector<std::string> doc;
            for (int i = 0; i < doc_len; ++i) {
                const int w = static_cast<int>(rng.uniform_int(vocab_per_topic));
                doc.push_back("t" + std::to_string(t) + "w" + std::to_string(w));
            }
            ids.push_back("doc" + std::to_string(labels.size()));
            docs.push_back(std::move(doc));
            labels.push_back(t);
        }
    }
    PlantedCorpus out;
    out.corpus = phaselda::encode(ids, docs, phaselda::build_vocabulary(docs, 1));
    out.labels = std::move(labels);
    out.n_topics = n_topics;
    return out;
}

// Fraction of docs whose argmax topic matches the planted label under the
// best greedy topic relabeling.
inline double accuracy_up_to_relabeling(const PlantedCorpus& pc,
                                        const std::map<std::string, int>& assignments, int K) {
    // confusion[planted][assigned]
    std::vector<std::vector<int>> confusion(pc.n_topics, std::vector<int>(K, 0));
    for (std::size_t d = 0; d < pc.corpus.docs.size(); ++d)
        ++confusion[pc.labels[d]][assignments.at(pc.corpus.docs[d].doc_id)];

    // greedy matching: largest confusion cells first, one assignment per side
    std::vector<bool> used_planted(pc.n_topics, false), used_assigned(K, false);
    long correct = 0;
    for (int step = 0; step < std::min(pc.n_topics, K); ++step) {
        int best_p = -1, best_a = -1, best_n = -1;
        for (int p = 0; p < pc.n_topics; ++p) {
            if (used_planted[p]) continue;
            for (int a = 0; a < K; ++a) {
                if (used_assigned[a]) continue;
                if (confusion[p][a] > best_n) {
                    best_n = confusion[p][a];
                    best_p = p;
                    best_a = a;
                }
            }
        }
        if (best_n <= 0) break;
        used_planted[best_p] = true;
        used_assigned[best_a] = true;
        correct += best_n;
    }
    return static_cast<double>(correct) / static_cast<double>(pc.corpus.docs.size());
}

}  // namespace planted
