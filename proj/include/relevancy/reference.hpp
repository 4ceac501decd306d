#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "relevancy/corpus.hpp"
#include "relevancy/vectorize.hpp"

namespace relevancy::reference {

// Serial direct-from-definition implementations of the scoring kernels and
// the TF-IDF build. They share no code with the parallel kernels and are the
// comparison baseline for the test suite and the benchmark. Written for
// clarity over speed: dense per-feature extraction, no sparsity tricks.

std::vector<double> chi2_scores(const SparseDocTermMatrix& matrix,
                                std::span<const uint32_t> labels, uint32_t num_classes);

std::vector<double> anova_f_scores(const SparseDocTermMatrix& matrix,
                                   std::span<const uint32_t> labels, uint32_t num_classes);

std::vector<double> mi_scores(const Corpus& corpus, const Vocabulary& vocab);

SparseDocTermMatrix tfidf_matrix(const Corpus& corpus, const Vocabulary& vocab, bool normalize);

}  // namespace relevancy::reference
