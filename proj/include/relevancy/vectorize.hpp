#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "relevancy/corpus.hpp"

namespace relevancy {

/// Lexicographically ordered training vocabulary with dense feature ids.
struct Vocabulary {
    std::vector<std::string> terms;
    std::unordered_map<std::string, uint32_t> index;

    uint32_t size() const { return static_cast<uint32_t>(terms.size()); }

    std::optional<uint32_t> lookup(std::string_view term) const {
        auto it = index.find(std::string(term));
        if (it == index.end()) return std::nullopt;
        return it->second;
    }
};

/// Row-compressed documents x features matrix. Column ids are strictly
/// increasing within each row; weights are nonnegative.
struct SparseDocTermMatrix {
    uint32_t num_docs = 0;
    uint32_t num_features = 0;
    bool normalized = false;
    std::vector<uint64_t> row_ptr;  // num_docs + 1
    std::vector<uint32_t> col;
    std::vector<double> val;

    size_t nnz() const { return col.size(); }
    std::span<const uint32_t> row_cols(size_t d) const {
        return {col.data() + row_ptr[d], col.data() + row_ptr[d + 1]};
    }
    std::span<const double> row_vals(size_t d) const {
        return {val.data() + row_ptr[d], val.data() + row_ptr[d + 1]};
    }
};

/// All train-split tokens with document frequency >= min_doc_freq.
/// Errors if the training split is empty.
Vocabulary build_vocabulary(const Corpus& corpus, uint32_t min_doc_freq = 1);

/// TF-IDF rows for every document in corpus order. tf is the raw count;
/// idf(t) = ln((1+N)/(1+df(t))) + 1 with N and df taken over the training
/// split; non-empty rows are L2-normalized unless `normalize` is false.
/// Out-of-vocabulary tokens are ignored.
SparseDocTermMatrix tfidf_matrix(const Corpus& corpus, const Vocabulary& vocab,
                                 bool normalize = true);

/// Submatrix keeping the given rows, in the given order.
SparseDocTermMatrix select_rows(const SparseDocTermMatrix& m, std::span<const size_t> rows);

}  // namespace relevancy
