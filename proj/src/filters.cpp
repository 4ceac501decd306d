#include "relevancy/filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relevancy/errors.hpp"

namespace relevancy {

namespace {

// Column-compressed view of a CSR matrix. Entries within a column keep
// ascending document order, so per-feature accumulation is bit-reproducible
// no matter how features are scheduled across threads.
struct ColumnView {
    std::vector<uint64_t> col_ptr;
    std::vector<uint32_t> doc;
    std::vector<double> val;
};

ColumnView transpose(const SparseDocTermMatrix& m) {
    ColumnView cv;
    cv.col_ptr.assign(static_cast<size_t>(m.num_features) + 1, 0);
    for (uint32_t c : m.col) ++cv.col_ptr[c + 1];
    for (size_t t = 0; t < m.num_features; ++t) cv.col_ptr[t + 1] += cv.col_ptr[t];
    cv.doc.resize(m.nnz());
    cv.val.resize(m.nnz());
    std::vector<uint64_t> cursor(cv.col_ptr.begin(), cv.col_ptr.end() - 1);
    for (uint32_t d = 0; d < m.num_docs; ++d) {
        for (uint64_t i = m.row_ptr[d]; i < m.row_ptr[d + 1]; ++i) {
            uint64_t at = cursor[m.col[i]]++;
            cv.doc[at] = d;
            cv.val[at] = m.val[i];
        }
    }
    return cv;
}

std::vector<uint64_t> class_sizes(std::span<const uint32_t> labels, uint32_t num_classes) {
    std::vector<uint64_t> n(num_classes, 0);
    for (uint32_t y : labels) {
        if (y >= num_classes) throw ValidationError("label id out of range");
        ++n[y];
    }
    return n;
}

}  // namespace

std::vector<double> chi2_scores(const SparseDocTermMatrix& matrix,
                                std::span<const uint32_t> labels, uint32_t num_classes) {
    if (labels.size() != matrix.num_docs)
        throw ValidationError("label count does not match document count");
    if (num_classes < 2) throw ValidationError("chi-square needs at least 2 classes");
    for (double w : matrix.val)
        if (w < 0.0) throw ValidationError("chi-square requires nonnegative weights");

    const auto n_c = class_sizes(labels, num_classes);
    const double n_total = static_cast<double>(matrix.num_docs);
    const ColumnView cv = transpose(matrix);

    std::vector<double> scores(matrix.num_features, 0.0);
#pragma omp parallel for schedule(dynamic, 256)
    for (size_t t = 0; t < matrix.num_features; ++t) {
        std::vector<double> observed(num_classes, 0.0);
        double mass = 0.0;
        for (uint64_t i = cv.col_ptr[t]; i < cv.col_ptr[t + 1]; ++i) {
            observed[labels[cv.doc[i]]] += cv.val[i];
            mass += cv.val[i];
        }
        if (mass <= 0.0) continue;
        double score = 0.0;
        for (uint32_t c = 0; c < num_classes; ++c) {
            double expected = mass * static_cast<double>(n_c[c]) / n_total;
            if (expected > 0.0) {
                double diff = observed[c] - expected;
                score += diff * diff / expected;
            }
        }
        scores[t] = score;
    }
    return scores;
}

std::vector<double> anova_f_scores(const SparseDocTermMatrix& matrix,
                                   std::span<const uint32_t> labels, uint32_t num_classes) {
    if (labels.size() != matrix.num_docs)
        throw ValidationError("label count does not match document count");
    if (num_classes < 2) throw ValidationError("ANOVA needs at least 2 classes");
    const auto n_c = class_sizes(labels, num_classes);
    for (uint32_t c = 0; c < num_classes; ++c)
        if (n_c[c] == 0) throw ValidationError("every class needs at least one document");
    const uint64_t n = matrix.num_docs;
    if (n <= num_classes)
        throw ValidationError("ANOVA needs more documents than classes");

    const ColumnView cv = transpose(matrix);
    const double df_between = static_cast<double>(num_classes - 1);
    const double df_within = static_cast<double>(n - num_classes);

    std::vector<double> scores(matrix.num_features, 0.0);
#pragma omp parallel for schedule(dynamic, 256)
    for (size_t t = 0; t < matrix.num_features; ++t) {
        // Pass 1: per-class sums over the full column (absent entries are 0).
        std::vector<double> sum(num_classes, 0.0);
        std::vector<uint64_t> nnz(num_classes, 0);
        for (uint64_t i = cv.col_ptr[t]; i < cv.col_ptr[t + 1]; ++i) {
            sum[labels[cv.doc[i]]] += cv.val[i];
            ++nnz[labels[cv.doc[i]]];
        }
        double grand_sum = 0.0;
        for (uint32_t c = 0; c < num_classes; ++c) grand_sum += sum[c];
        const double grand_mean = grand_sum / static_cast<double>(n);

        std::vector<double> mean(num_classes);
        double ss_between = 0.0;
        for (uint32_t c = 0; c < num_classes; ++c) {
            mean[c] = sum[c] / static_cast<double>(n_c[c]);
            double d = mean[c] - grand_mean;
            ss_between += static_cast<double>(n_c[c]) * d * d;
        }

        // Pass 2: within-class squared deviations; the zero entries of class c
        // contribute (n_c - nnz_c) * mean_c^2 in closed form.
        std::vector<double> ss_within_c(num_classes, 0.0);
        for (uint64_t i = cv.col_ptr[t]; i < cv.col_ptr[t + 1]; ++i) {
            uint32_t c = labels[cv.doc[i]];
            double d = cv.val[i] - mean[c];
            ss_within_c[c] += d * d;
        }
        double ss_within = 0.0;
        for (uint32_t c = 0; c < num_classes; ++c)
            ss_within += ss_within_c[c] +
                         static_cast<double>(n_c[c] - nnz[c]) * mean[c] * mean[c];

        const double ms_between = ss_between / df_between;
        const double ms_within = ss_within / df_within;
        if (ms_within > 0.0) {
            scores[t] = ms_between / ms_within;
        } else {
            scores[t] = ms_between > 0.0 ? std::numeric_limits<double>::max() : 0.0;
        }
    }
    return scores;
}

std::vector<double> mi_scores(const Corpus& corpus, const Vocabulary& vocab) {
    const uint32_t num_classes = corpus.num_classes();
    const uint32_t V = vocab.size();

    // Presence counts per (feature, class) over the training split.
    std::vector<uint64_t> n_c(num_classes, 0);
    std::vector<uint64_t> present(static_cast<size_t>(V) * num_classes, 0);
    uint64_t n_train = 0;
    uint32_t classes_seen = 0;
    {
        std::vector<uint32_t> ids;
        for (const Document& doc : corpus.documents) {
            if (doc.split != Split::Train) continue;
            ++n_train;
            if (n_c[doc.label]++ == 0) ++classes_seen;
            ids.clear();
            for (const std::string& t : doc.tokens)
                if (auto id = vocab.lookup(t)) ids.push_back(*id);
            std::sort(ids.begin(), ids.end());
            ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
            for (uint32_t id : ids) ++present[static_cast<size_t>(id) * num_classes + doc.label];
        }
    }
    if (classes_seen < 2)
        throw ValidationError("mutual information needs at least 2 classes in the training split");

    const double n = static_cast<double>(n_train);
    std::vector<double> scores(V, 0.0);
#pragma omp parallel for schedule(dynamic, 256)
    for (size_t t = 0; t < V; ++t) {
        const uint64_t* row = &present[t * num_classes];
        uint64_t present_total = 0;
        for (uint32_t c = 0; c < num_classes; ++c) present_total += row[c];
        double score = 0.0;
        for (uint32_t c = 0; c < num_classes; ++c) {
            if (n_c[c] == 0) continue;
            const double p_class = static_cast<double>(n_c[c]) / n;
            // present cell then absent cell; 0 * ln(0/q) is 0 by convention.
            const uint64_t cells[2] = {row[c], n_c[c] - row[c]};
            const uint64_t marginals[2] = {present_total, n_train - present_total};
            for (int b = 0; b < 2; ++b) {
                if (cells[b] == 0 || marginals[b] == 0) continue;
                const double p_joint = static_cast<double>(cells[b]) / n;
                const double p_b = static_cast<double>(marginals[b]) / n;
                score += p_joint * std::log(p_joint / (p_b * p_class));
            }
        }
        scores[t] = std::max(score, 0.0);
    }
    return scores;
}

std::vector<double> normalize_scores(std::span<const double> raw) {
    if (raw.empty()) throw ValidationError("cannot normalize an empty score column");
    double lo = raw[0], hi = raw[0];
    for (double v : raw) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<double> out(raw.size(), 0.0);
    if (hi > lo) {
        double inv = 1.0 / (hi - lo);
        for (size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - lo) * inv;
    }
    return out;
}

void aggregate_relevancy(FeatureScoreTable& table) {
    const size_t v = table.size();
    if (table.chi2_norm.size() != v || table.anova_norm.size() != v || table.mi_norm.size() != v)
        throw ValidationError("normalized score columns missing or mis-sized");
    table.relevancy.resize(v);
    for (size_t i = 0; i < v; ++i)
        table.relevancy[i] = table.chi2_norm[i] + table.anova_norm[i] + table.mi_norm[i];
}

FeatureScoreTable score_features(const Corpus& corpus, const Vocabulary& vocab,
                                 const SparseDocTermMatrix& matrix) {
    const auto train_rows = corpus.split_indices(Split::Train);
    if (matrix.num_docs != corpus.documents.size())
        throw ValidationError("matrix row count does not match corpus");

    SparseDocTermMatrix train = select_rows(matrix, train_rows);
    std::vector<uint32_t> labels;
    labels.reserve(train_rows.size());
    for (size_t i : train_rows) labels.push_back(corpus.documents[i].label);

    FeatureScoreTable table;
    table.terms = vocab.terms;
    table.chi2 = chi2_scores(train, labels, corpus.num_classes());
    table.anova_f = anova_f_scores(train, labels, corpus.num_classes());
    table.mi = mi_scores(corpus, vocab);

    // Replace infinity sentinels with the column's largest finite value so one
    // degenerate feature cannot flatten the rest to zero.
    std::vector<double> anova = table.anova_f;
    double max_finite = 0.0;
    bool any_sentinel = false;
    for (double v : anova) {
        if (v == std::numeric_limits<double>::max())
            any_sentinel = true;
        else
            max_finite = std::max(max_finite, v);
    }
    if (any_sentinel)
        for (double& v : anova)
            if (v == std::numeric_limits<double>::max()) v = max_finite;

    table.chi2_norm = normalize_scores(table.chi2);
    table.anova_norm = normalize_scores(anova);
    table.mi_norm = normalize_scores(table.mi);
    table.selected.assign(table.size(), 0);
    aggregate_relevancy(table);
    return table;
}

}  // namespace relevancy
