#include "relevancy/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace relevancy::reference {

namespace {

// Dense column t of the matrix, one value per document.
std::vector<double> dense_column(const SparseDocTermMatrix& m, uint32_t t) {
    std::vector<double> x(m.num_docs, 0.0);
    for (uint32_t d = 0; d < m.num_docs; ++d) {
        auto cols = m.row_cols(d);
        auto vals = m.row_vals(d);
        for (size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == t) x[d] = vals[i];
    }
    return x;
}

}  // namespace

std::vector<double> chi2_scores(const SparseDocTermMatrix& matrix,
                                std::span<const uint32_t> labels, uint32_t num_classes) {
    std::vector<double> scores(matrix.num_features, 0.0);
    for (uint32_t t = 0; t < matrix.num_features; ++t) {
        std::vector<double> x = dense_column(matrix, t);
        double total = 0.0;
        for (double v : x) total += v;
        if (total <= 0.0) continue;
        double score = 0.0;
        for (uint32_t c = 0; c < num_classes; ++c) {
            double observed = 0.0;
            uint64_t n_c = 0;
            for (size_t d = 0; d < x.size(); ++d) {
                if (labels[d] == c) {
                    observed += x[d];
                    ++n_c;
                }
            }
            double expected = total * static_cast<double>(n_c) / static_cast<double>(x.size());
            if (expected > 0.0) score += (observed - expected) * (observed - expected) / expected;
        }
        scores[t] = score;
    }
    return scores;
}

std::vector<double> anova_f_scores(const SparseDocTermMatrix& matrix,
                                   std::span<const uint32_t> labels, uint32_t num_classes) {
    const size_t n = matrix.num_docs;
    std::vector<double> scores(matrix.num_features, 0.0);
    for (uint32_t t = 0; t < matrix.num_features; ++t) {
        std::vector<double> x = dense_column(matrix, t);

        double grand_mean = 0.0;
        for (double v : x) grand_mean += v;
        grand_mean /= static_cast<double>(n);

        double ss_between = 0.0;
        double ss_within = 0.0;
        for (uint32_t c = 0; c < num_classes; ++c) {
            std::vector<double> group;
            for (size_t d = 0; d < n; ++d)
                if (labels[d] == c) group.push_back(x[d]);
            double mean = 0.0;
            for (double v : group) mean += v;
            mean /= static_cast<double>(group.size());
            ss_between += static_cast<double>(group.size()) * (mean - grand_mean) * (mean - grand_mean);
            for (double v : group) ss_within += (v - mean) * (v - mean);
        }
        double ms_between = ss_between / static_cast<double>(num_classes - 1);
        double ms_within = ss_within / static_cast<double>(n - num_classes);
        if (ms_within > 0.0)
            scores[t] = ms_between / ms_within;
        else
            scores[t] = ms_between > 0.0 ? std::numeric_limits<double>::max() : 0.0;
    }
    return scores;
}

std::vector<double> mi_scores(const Corpus& corpus, const Vocabulary& vocab) {
    const uint32_t num_classes = corpus.num_classes();
    std::vector<const Document*> train;
    for (const Document& d : corpus.documents)
        if (d.split == Split::Train) train.push_back(&d);
    const double n = static_cast<double>(train.size());

    std::vector<double> scores(vocab.size(), 0.0);
    for (uint32_t t = 0; t < vocab.size(); ++t) {
        const std::string& term = vocab.terms[t];
        // Full 2 x C contingency table for presence of this term.
        std::vector<std::vector<double>> joint(2, std::vector<double>(num_classes, 0.0));
        for (const Document* doc : train) {
            bool present = std::find(doc->tokens.begin(), doc->tokens.end(), term) !=
                           doc->tokens.end();
            joint[present ? 1 : 0][doc->label] += 1.0;
        }
        double mi = 0.0;
        for (int b = 0; b < 2; ++b) {
            double p_b = 0.0;
            for (uint32_t c = 0; c < num_classes; ++c) p_b += joint[b][c];
            p_b /= n;
            for (uint32_t c = 0; c < num_classes; ++c) {
                double p_joint = joint[b][c] / n;
                double p_c = 0.0;
                for (int bb = 0; bb < 2; ++bb) p_c += joint[bb][c];
                p_c /= n;
                if (p_joint > 0.0 && p_b > 0.0 && p_c > 0.0)
                    mi += p_joint * std::log(p_joint / (p_b * p_c));
            }
        }
        scores[t] = std::max(mi, 0.0);
    }
    return scores;
}

SparseDocTermMatrix tfidf_matrix(const Corpus& corpus, const Vocabulary& vocab, bool normalize) {
    // Plain per-document evaluation of the stated formula on dense rows.
    uint64_t n_train = 0;
    std::vector<uint64_t> df(vocab.size(), 0);
    for (const Document& doc : corpus.documents) {
        if (doc.split != Split::Train) continue;
        ++n_train;
        std::set<uint32_t> seen;
        for (const std::string& t : doc.tokens)
            if (auto id = vocab.lookup(t)) seen.insert(*id);
        for (uint32_t id : seen) ++df[id];
    }

    SparseDocTermMatrix m;
    m.num_docs = static_cast<uint32_t>(corpus.documents.size());
    m.num_features = vocab.size();
    m.normalized = normalize;
    m.row_ptr.push_back(0);
    for (const Document& doc : corpus.documents) {
        std::map<uint32_t, double> row;
        for (const std::string& t : doc.tokens)
            if (auto id = vocab.lookup(t)) row[*id] += 1.0;
        for (auto& [id, tf] : row)
            tf *= std::log((1.0 + static_cast<double>(n_train)) /
                           (1.0 + static_cast<double>(df[id]))) +
                  1.0;
        if (normalize) {
            double norm = 0.0;
            for (auto& [id, w] : row) norm += w * w;
            if (norm > 0.0) {
                norm = std::sqrt(norm);
                for (auto& [id, w] : row) w /= norm;
            }
        }
        for (auto& [id, w] : row) {
            m.col.push_back(id);
            m.val.push_back(w);
        }
        m.row_ptr.push_back(m.col.size());
    }
    return m;
}

}  // namespace relevancy::reference
