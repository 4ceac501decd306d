#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "relevancy/corpus.hpp"

namespace relevancy {

/// Parameters of the planted-feature corpus used for desk-scale verification.
/// Each class owns a disjoint set of predictive tokens; every document
/// position emits one of its class's predictive tokens with probability
/// `emission_prob`, otherwise a uniform noise token.
struct SyntheticSpec {
    uint32_t num_classes = 4;
    uint32_t docs_per_class = 200;
    uint32_t predictive_per_class = 50;
    uint32_t noise_tokens = 2000;
    uint32_t doc_len = 30;
    double emission_prob = 0.3;
    uint64_t seed = 7;
};

struct SyntheticCorpus {
    Corpus corpus;                           // all documents tagged Train
    std::vector<std::string> planted;        // ground-truth predictive tokens
};

/// Deterministic under spec.seed. Errors on degenerate specs (fewer than two
/// classes, no predictive or noise tokens, doc_len < 2).
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

/// Writes the corpus as `label<TAB>text` lines.
void write_corpus_tsv(const Corpus& corpus, const std::string& path);

}  // namespace relevancy
