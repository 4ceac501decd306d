#include "relevancy/select.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "relevancy/errors.hpp"

namespace relevancy {

std::vector<uint32_t> rank_features(const FeatureScoreTable& table) {
    if (table.relevancy.size() != table.size())
        throw ValidationError("relevancy column not populated");
    std::vector<uint32_t> order(table.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        if (table.relevancy[a] != table.relevancy[b])
            return table.relevancy[a] > table.relevancy[b];
        return a < b;
    });
    return order;
}

std::vector<std::pair<size_t, size_t>> partition_ranked(size_t num_features, uint32_t k) {
    if (k == 0) throw ValidationError("k must be at least 1");
    if (k > num_features)
        throw ValidationError("k (" + std::to_string(k) + ") exceeds feature count (" +
                              std::to_string(num_features) + ")");
    const size_t base = num_features / k;
    const size_t extra = num_features % k;
    std::vector<std::pair<size_t, size_t>> slices;
    slices.reserve(k);
    size_t at = 0;
    for (uint32_t i = 0; i < k; ++i) {
        size_t len = base + (i < extra ? 1 : 0);
        slices.emplace_back(at, at + len);
        at += len;
    }
    return slices;
}

FeatureSelection incremental_search(const FeatureScoreTable& table, uint32_t k,
                                    const EvaluateCallback& evaluate) {
    FeatureSelection sel;
    sel.ranked = rank_features(table);
    sel.k = k;
    sel.partitions = partition_ranked(sel.ranked.size(), k);
    sel.trace.reserve(k);

    size_t best_idx = 0;
    double best_metric = 0.0;
    for (uint32_t i = 0; i < k; ++i) {
        const size_t prefix_end = sel.partitions[i].second;
        double metric;
        try {
            metric = evaluate(std::span<const uint32_t>(sel.ranked.data(), prefix_end));
        } catch (const std::exception& e) {
            throw ValidationError("subset evaluation failed on prefix " + std::to_string(i + 1) +
                                  " of " + std::to_string(k) + ": " + e.what());
        }
        sel.trace.push_back(metric);
        if (i == 0 || metric > best_metric) {
            best_metric = metric;
            best_idx = i;
        }
    }

    sel.best_prefix = static_cast<uint32_t>(best_idx + 1);
    const size_t keep = sel.partitions[best_idx].second;
    sel.selected.assign(sel.ranked.begin(), sel.ranked.begin() + static_cast<ptrdiff_t>(keep));
    return sel;
}

void apply_selection(FeatureScoreTable& table, const FeatureSelection& selection) {
    table.selected.assign(table.size(), 0);
    for (uint32_t id : selection.selected) {
        if (id >= table.size()) throw ValidationError("selected feature id out of range");
        table.selected[id] = 1;
    }
}

}  // namespace relevancy
