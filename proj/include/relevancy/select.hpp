#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "relevancy/filters.hpp"

namespace relevancy {

/// Outcome of the cumulative subset search over k rank partitions.
struct FeatureSelection {
    std::vector<uint32_t> ranked;                           // by relevancy, descending
    uint32_t k = 0;
    std::vector<std::pair<size_t, size_t>> partitions;      // [begin,end) into ranked
    uint32_t best_prefix = 0;                               // partitions kept
    std::vector<uint32_t> selected;                         // union of kept partitions
    std::vector<double> trace;                              // metric per prefix, length k
};

/// Feature ids sorted by relevancy descending, ties by ascending id.
std::vector<uint32_t> rank_features(const FeatureScoreTable& table);

/// k contiguous slices over [0, num_features); the first (V mod k) slices get
/// the extra feature. Errors when k is 0 or exceeds V.
std::vector<std::pair<size_t, size_t>> partition_ranked(size_t num_features, uint32_t k);

/// Metric for a candidate feature set; the ids arrive in rank order.
using EvaluateCallback = std::function<double(std::span<const uint32_t>)>;

/// Evaluates the k cumulative prefixes in order and keeps the argmax, ties
/// broken toward the smaller prefix. The callback runs exactly k times; a
/// callback failure aborts naming the offending prefix index.
FeatureSelection incremental_search(const FeatureScoreTable& table, uint32_t k,
                                    const EvaluateCallback& evaluate);

/// Marks table.selected from a finished selection.
void apply_selection(FeatureScoreTable& table, const FeatureSelection& selection);

}  // namespace relevancy
