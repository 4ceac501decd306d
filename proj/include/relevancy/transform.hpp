#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <utility>

#include "relevancy/corpus.hpp"
#include "relevancy/pos_tagger.hpp"
#include "relevancy/vectorize.hpp"

namespace relevancy {

constexpr std::string_view kMaskPrefix = "<MASK>+";

struct TransformReport {
    int method = 0;
    uint32_t vocab_before = 0;        // distinct tokens observed in the corpus
    uint32_t vocab_after = 0;
    uint32_t mask_tags_added = 0;     // distinct <MASK>+tag composites introduced
    uint64_t tokens_removed_or_masked = 0;
};

/// Method 1: deletes every token outside the selected set, preserving the
/// order of survivors. Documents emptied by the rewrite stay in the corpus,
/// flagged empty. Applied to train and test alike.
std::pair<Corpus, TransformReport> rewrite_selected(const Corpus& corpus,
                                                    const std::unordered_set<std::string>& selected);

/// Method 2: replaces every unselected token with the composite
/// `<MASK>+tag`, keeping sentence length intact. Tokens that are already
/// mask composites pass through, which makes the transform idempotent.
std::pair<Corpus, TransformReport> mask_low_rank(const Corpus& corpus,
                                                 const std::unordered_set<std::string>& selected,
                                                 const PosTagger& tagger);

/// Selected feature ids resolved to their term strings.
std::unordered_set<std::string> selected_terms(const Vocabulary& vocab,
                                               std::span<const uint32_t> selected_ids);

}  // namespace relevancy
