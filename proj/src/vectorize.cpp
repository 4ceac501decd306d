#include "relevancy/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "relevancy/errors.hpp"

namespace relevancy {

Vocabulary build_vocabulary(const Corpus& corpus, uint32_t min_doc_freq) {
    if (corpus.documents.empty()) throw ValidationError("corpus is empty");
    if (corpus.count_split(Split::Train) == 0)
        throw ValidationError("training split is empty; cannot build vocabulary");

    // std::map gives the lexicographic ordering directly.
    std::map<std::string, uint32_t> doc_freq;
    std::vector<std::string_view> seen;
    for (const Document& doc : corpus.documents) {
        if (doc.split != Split::Train) continue;
        seen.assign(doc.tokens.begin(), doc.tokens.end());
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        for (std::string_view t : seen) ++doc_freq[std::string(t)];
    }

    Vocabulary vocab;
    for (auto& [term, df] : doc_freq) {
        if (df < min_doc_freq) continue;
        vocab.index.emplace(term, static_cast<uint32_t>(vocab.terms.size()));
        vocab.terms.push_back(term);
    }
    return vocab;
}

SparseDocTermMatrix tfidf_matrix(const Corpus& corpus, const Vocabulary& vocab, bool normalize) {
    const size_t n_docs = corpus.documents.size();
    const uint32_t V = vocab.size();

    // Document frequency and N over the training split only, so test rows are
    // weighted by the fitted idf.
    std::vector<uint64_t> df(V, 0);
    uint64_t n_train = 0;
    {
        std::vector<uint32_t> ids;
        for (const Document& doc : corpus.documents) {
            if (doc.split != Split::Train) continue;
            ++n_train;
            ids.clear();
            for (const std::string& t : doc.tokens)
                if (auto id = vocab.lookup(t)) ids.push_back(*id);
            std::sort(ids.begin(), ids.end());
            ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
            for (uint32_t id : ids) ++df[id];
        }
    }
    std::vector<double> idf(V);
    for (uint32_t t = 0; t < V; ++t)
        idf[t] = std::log((1.0 + static_cast<double>(n_train)) /
                          (1.0 + static_cast<double>(df[t]))) +
                 1.0;

    // Count distinct in-vocab terms per row, then fill rows independently.
    SparseDocTermMatrix m;
    m.num_docs = static_cast<uint32_t>(n_docs);
    m.num_features = V;
    m.normalized = normalize;
    m.row_ptr.assign(n_docs + 1, 0);

    std::vector<std::vector<std::pair<uint32_t, double>>> rows(n_docs);
#pragma omp parallel for schedule(dynamic, 64)
    for (size_t d = 0; d < n_docs; ++d) {
        const Document& doc = corpus.documents[d];
        std::vector<std::pair<uint32_t, uint32_t>> counts;  // (feature, tf)
        {
            std::vector<uint32_t> ids;
            ids.reserve(doc.tokens.size());
            for (const std::string& t : doc.tokens)
                if (auto id = vocab.lookup(t)) ids.push_back(*id);
            std::sort(ids.begin(), ids.end());
            for (size_t i = 0; i < ids.size();) {
                size_t j = i;
                while (j < ids.size() && ids[j] == ids[i]) ++j;
                counts.emplace_back(ids[i], static_cast<uint32_t>(j - i));
                i = j;
            }
        }
        auto& row = rows[d];
        row.reserve(counts.size());
        double sq_sum = 0.0;
        for (auto [t, tf] : counts) {
            double w = static_cast<double>(tf) * idf[t];
            row.emplace_back(t, w);
            sq_sum += w * w;
        }
        if (normalize && sq_sum > 0.0) {
            double inv = 1.0 / std::sqrt(sq_sum);
            for (auto& [t, w] : row) w *= inv;
        }
    }

    for (size_t d = 0; d < n_docs; ++d) m.row_ptr[d + 1] = m.row_ptr[d] + rows[d].size();
    m.col.resize(m.row_ptr[n_docs]);
    m.val.resize(m.row_ptr[n_docs]);
    for (size_t d = 0; d < n_docs; ++d) {
        uint64_t base = m.row_ptr[d];
        for (size_t i = 0; i < rows[d].size(); ++i) {
            m.col[base + i] = rows[d][i].first;
            m.val[base + i] = rows[d][i].second;
        }
    }
    return m;
}

SparseDocTermMatrix select_rows(const SparseDocTermMatrix& m, std::span<const size_t> rows) {
    SparseDocTermMatrix out;
    out.num_docs = static_cast<uint32_t>(rows.size());
    out.num_features = m.num_features;
    out.normalized = m.normalized;
    out.row_ptr.assign(rows.size() + 1, 0);
    for (size_t i = 0; i < rows.size(); ++i)
        out.row_ptr[i + 1] = out.row_ptr[i] + (m.row_ptr[rows[i] + 1] - m.row_ptr[rows[i]]);
    out.col.resize(out.row_ptr.back());
    out.val.resize(out.row_ptr.back());
    for (size_t i = 0; i < rows.size(); ++i) {
        uint64_t src = m.row_ptr[rows[i]];
        uint64_t len = m.row_ptr[rows[i] + 1] - src;
        std::copy_n(m.col.begin() + static_cast<ptrdiff_t>(src), len,
                    out.col.begin() + static_cast<ptrdiff_t>(out.row_ptr[i]));
        std::copy_n(m.val.begin() + static_cast<ptrdiff_t>(src), len,
                    out.val.begin() + static_cast<ptrdiff_t>(out.row_ptr[i]));
    }
    return out;
}

}  // namespace relevancy
