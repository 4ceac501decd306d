#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "relevancy/corpus.hpp"
#include "relevancy/vectorize.hpp"

namespace relevancy {

/// Per-feature filter scores, their min-max normalized variants and the
/// aggregate relevancy (sum of the three normalized columns, range [0,3]).
/// `selected` is filled later by the subset search.
struct FeatureScoreTable {
    std::vector<std::string> terms;
    std::vector<double> chi2;
    std::vector<double> anova_f;
    std::vector<double> mi;
    std::vector<double> chi2_norm;
    std::vector<double> anova_norm;
    std::vector<double> mi_norm;
    std::vector<double> relevancy;
    std::vector<uint8_t> selected;

    size_t size() const { return terms.size(); }
};

/// Weighted chi-square of class-summed feature mass against the
/// class-size-proportional expectation. Zero-mass features score 0.
std::vector<double> chi2_scores(const SparseDocTermMatrix& matrix,
                                std::span<const uint32_t> labels, uint32_t num_classes);

/// One-way ANOVA F statistic per feature (zeros included in every group).
/// Zero within-group variance with nonzero between-group variance yields the
/// largest finite double as an infinity sentinel.
std::vector<double> anova_f_scores(const SparseDocTermMatrix& matrix,
                                   std::span<const uint32_t> labels, uint32_t num_classes);

/// Discrete mutual information between binarized term presence and the label,
/// in nats, over the training split of `corpus`. Nonnegative; floating slack
/// below zero is clamped.
std::vector<double> mi_scores(const Corpus& corpus, const Vocabulary& vocab);

/// Min-max scaling to [0,1]; a constant column maps to all zeros.
std::vector<double> normalize_scores(std::span<const double> raw);

/// Sums the three normalized columns into `relevancy`. Errors if any
/// normalized column is missing or mis-sized.
void aggregate_relevancy(FeatureScoreTable& table);

/// Runs all three filters on the training split, normalizes (ANOVA infinity
/// sentinels replaced by the column's max finite value first) and aggregates.
FeatureScoreTable score_features(const Corpus& corpus, const Vocabulary& vocab,
                                 const SparseDocTermMatrix& matrix);

}  // namespace relevancy
