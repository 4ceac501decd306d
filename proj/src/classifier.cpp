#include "relevancy/classifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "relevancy/errors.hpp"
#include "relevancy/rng.hpp"

namespace relevancy {

std::optional<uint32_t> EmbeddingTable::lookup(std::string_view token) const {
    auto it = index.find(std::string(token));
    if (it == index.end()) return std::nullopt;
    return it->second;
}

uint32_t EmbeddingTable::add(const std::string& token) {
    auto it = index.find(token);
    if (it != index.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(tokens.size());
    tokens.push_back(token);
    index.emplace(token, id);
    data.resize(data.size() + dim, 0.0);
    return id;
}

EmbeddingTable load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embedding file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ValidationError("embedding file is empty: " + path);
    uint64_t declared_count = 0;
    uint32_t dim = 0;
    {
        std::istringstream header(line);
        if (!(header >> declared_count >> dim) || dim == 0)
            throw ValidationError("embedding header must be \"count dim\": " + path);
    }

    EmbeddingTable table;
    table.dim = dim;
    std::vector<double> row(dim);
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string token;
        ls >> token;
        for (uint32_t i = 0; i < dim; ++i) {
            if (!(ls >> row[i]))
                throw ValidationError("line " + std::to_string(line_no) +
                                      ": expected " + std::to_string(dim) + " numeric entries");
        }
        double trailing;
        if (ls >> trailing)
            throw ValidationError("line " + std::to_string(line_no) + ": row longer than dim");
        uint32_t id = table.add(token);  // duplicate tokens: last occurrence wins
        std::copy(row.begin(), row.end(), table.vec(id).begin());
    }
    if (in.bad()) throw IoError("read error on embedding file: " + path);
    if (declared_count != table.count())
        std::fprintf(stderr, "warning: %s declares %llu vectors, body has %zu; using body\n",
                     path.c_str(), static_cast<unsigned long long>(declared_count), table.count());
    return table;
}

namespace {

double effective_scale(double scale, uint32_t dim) {
    return scale > 0.0 ? scale : 1.0 / static_cast<double>(dim);
}

void fill_random_row(std::span<double> row, Rng& rng, double scale) {
    for (double& v : row) v = rng.next_symmetric(scale);
}

}  // namespace

EmbeddingTable init_random_embeddings(const Vocabulary& vocab, uint32_t dim, uint64_t seed,
                                      double scale) {
    if (dim == 0) throw ValidationError("embedding dimensionality must be at least 1");
    EmbeddingTable table;
    table.dim = dim;
    const double s = effective_scale(scale, dim);
    Rng rng(derive_seed(seed, 0xe5bedd1));
    for (const std::string& term : vocab.terms) {
        uint32_t id = table.add(term);
        fill_random_row(table.vec(id), rng, s);
    }
    return table;
}

namespace {

// FNV-1a; std::hash is implementation-defined and would break cross-platform
// reproducibility of the derived seeds.
uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

void ensure_coverage(EmbeddingTable& table, const std::vector<std::string>& terms, uint64_t seed,
                     double scale) {
    const double s = effective_scale(scale, table.dim);
    for (const std::string& term : terms) {
        if (table.lookup(term)) continue;
        // Seed per token so coverage order cannot shift existing rows.
        Rng rng(derive_seed(seed, fnv1a(term)));
        uint32_t id = table.add(term);
        fill_random_row(table.vec(id), rng, s);
    }
}

namespace {

EmbeddingTable extend_by_four(const EmbeddingTable& table) {
    if (table.meta) throw ValidationError("embedding table is already meta-augmented");
    EmbeddingTable out;
    out.dim = table.dim + 4;
    out.meta = true;
    out.tokens = table.tokens;
    out.index = table.index;
    out.data.assign(out.count() * size_t(out.dim), 0.0);
    for (uint32_t id = 0; id < table.count(); ++id) {
        auto src = table.vec(id);
        std::copy(src.begin(), src.end(), out.vec(id).begin());
    }
    return out;
}

}  // namespace

EmbeddingTable augment_meta(const EmbeddingTable& table, const FeatureScoreTable& scores,
                            const FeatureSelection& selection) {
    EmbeddingTable out = extend_by_four(table);

    std::unordered_map<std::string_view, uint32_t> term_to_feature;
    term_to_feature.reserve(scores.size());
    for (uint32_t f = 0; f < scores.size(); ++f) term_to_feature.emplace(scores.terms[f], f);
    std::vector<uint8_t> selected(scores.size(), 0);
    for (uint32_t id : selection.selected)
        if (id < selected.size()) selected[id] = 1;

    for (uint32_t id = 0; id < out.count(); ++id) {
        auto it = term_to_feature.find(out.tokens[id]);
        if (it == term_to_feature.end()) continue;  // unseen in training scores: zeros
        uint32_t f = it->second;
        auto v = out.vec(id);
        v[out.dim - 4] = scores.chi2_norm[f];
        v[out.dim - 3] = scores.anova_norm[f];
        v[out.dim - 2] = scores.mi_norm[f];
        v[out.dim - 1] = selected[f] ? 1.0 : 0.0;
    }
    return out;
}

EmbeddingTable augment_meta_zeros(const EmbeddingTable& table) {
    return extend_by_four(table);
}

std::vector<double> embed_document(std::span<const std::string> tokens,
                                   const EmbeddingTable& table) {
    std::vector<double> h(table.dim, 0.0);
    size_t hits = 0;
    for (const std::string& t : tokens) {
        if (auto id = table.lookup(t)) {
            auto v = table.vec(*id);
            for (uint32_t i = 0; i < table.dim; ++i) h[i] += v[i];
            ++hits;
        }
    }
    if (hits > 0) {
        double inv = 1.0 / static_cast<double>(hits);
        for (double& x : h) x *= inv;
    }
    return h;
}

namespace {

// Stable softmax in place.
void softmax_inplace(std::vector<double>& logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& z : logits) {
        z = std::exp(z - mx);
        sum += z;
    }
    for (double& z : logits) z /= sum;
}

struct DocForward {
    std::vector<double> h;           // document embedding
    std::vector<uint32_t> hits;      // in-table token ids, one per occurrence
    std::vector<double> probs;
};

DocForward forward(std::span<const double> weights, std::span<const double> bias,
                   const EmbeddingTable& table, uint32_t num_classes, const Document& doc) {
    DocForward f;
    f.h.assign(table.dim, 0.0);
    for (const std::string& t : doc.tokens) {
        if (auto id = table.lookup(t)) {
            f.hits.push_back(*id);
            auto v = table.vec(*id);
            for (uint32_t i = 0; i < table.dim; ++i) f.h[i] += v[i];
        }
    }
    if (!f.hits.empty()) {
        double inv = 1.0 / static_cast<double>(f.hits.size());
        for (double& x : f.h) x *= inv;
    }
    f.probs.assign(num_classes, 0.0);
    const uint32_t dim = table.dim;
    for (uint32_t c = 0; c < num_classes; ++c) {
        double z = bias[c];
        const double* w = weights.data() + size_t(c) * dim;
        for (uint32_t i = 0; i < dim; ++i) z += w[i] * f.h[i];
        f.probs[c] = z;
    }
    softmax_inplace(f.probs);
    return f;
}

}  // namespace

Model train(const Corpus& corpus, EmbeddingTable table, const TrainConfig& config,
            TrainStats* stats) {
    if (config.epochs < 1) throw ValidationError("epochs must be at least 1");
    if (config.learning_rate <= 0.0) throw ValidationError("learning rate must be positive");
    const uint32_t num_classes = corpus.num_classes();
    if (num_classes < 1) throw ValidationError("corpus has no labels");

    std::vector<size_t> train_docs = corpus.split_indices(Split::Train);
    if (train_docs.empty()) throw ValidationError("training split is empty");
    {
        std::vector<uint8_t> seen(num_classes, 0);
        for (size_t i : train_docs) seen[corpus.documents[i].label] = 1;
        for (uint32_t c = 0; c < num_classes; ++c)
            if (!seen[c])
                throw ValidationError("class '" + corpus.label_names[c] +
                                      "' has no training documents");
    }

    Model model;
    model.embeddings = std::move(table);
    model.num_classes = num_classes;
    model.label_names = corpus.label_names;
    model.config = config;
    const uint32_t dim = model.embeddings.dim;
    model.weights.assign(size_t(num_classes) * dim, 0.0);
    model.bias.assign(num_classes, 0.0);

    Rng rng(derive_seed(config.seed, 0x7ea11));
    const uint64_t total_steps = static_cast<uint64_t>(config.epochs) * train_docs.size();
    uint64_t step = 0;
    std::vector<double> grad_logits(num_classes);

    if (stats) stats->epoch_losses.clear();
    const auto t0 = std::chrono::steady_clock::now();
    for (uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(train_docs);
        double epoch_loss = 0.0;
        for (size_t d : train_docs) {
            const Document& doc = corpus.documents[d];
            const double lr = config.learning_rate *
                              (1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
            ++step;

            DocForward f = forward(model.weights, model.bias, model.embeddings, num_classes, doc);
            // logit[y] = log(p[y]) + lse
            const double loss = -std::log(std::max(f.probs[doc.label], 1e-300));
            if (!std::isfinite(loss))
                throw ValidationError("non-finite loss at epoch " + std::to_string(epoch + 1) +
                                      ", step " + std::to_string(step));
            epoch_loss += loss;

            for (uint32_t c = 0; c < num_classes; ++c)
                grad_logits[c] = f.probs[c] - (c == doc.label ? 1.0 : 0.0);

            // dL/dh before W is updated; then W and b.
            std::vector<double> grad_h(dim, 0.0);
            for (uint32_t c = 0; c < num_classes; ++c) {
                double g = grad_logits[c];
                double* w = model.weights.data() + size_t(c) * dim;
                for (uint32_t i = 0; i < dim; ++i) {
                    grad_h[i] += g * w[i];
                    w[i] -= lr * g * f.h[i];
                }
                model.bias[c] -= lr * g;
            }
            if (!config.freeze_embeddings && !f.hits.empty()) {
                const double share = 1.0 / static_cast<double>(f.hits.size());
                for (uint32_t id : f.hits) {
                    auto v = model.embeddings.vec(id);
                    for (uint32_t i = 0; i < dim; ++i) v[i] -= lr * share * grad_h[i];
                }
            }
        }
        if (stats)
            stats->epoch_losses.push_back(epoch_loss / static_cast<double>(train_docs.size()));
    }
    const auto t1 = std::chrono::steady_clock::now();
    if (stats) stats->wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    return model;
}

std::pair<uint32_t, std::vector<double>> predict(const Model& model,
                                                 std::span<const std::string> tokens) {
    std::vector<double> h = embed_document(tokens, model.embeddings);
    std::vector<double> probs(model.num_classes);
    const uint32_t dim = model.embeddings.dim;
    for (uint32_t c = 0; c < model.num_classes; ++c) {
        double z = model.bias[c];
        const double* w = model.weights.data() + size_t(c) * dim;
        for (uint32_t i = 0; i < dim; ++i) z += w[i] * h[i];
        probs[c] = z;
    }
    softmax_inplace(probs);
    uint32_t best = 0;
    for (uint32_t c = 1; c < model.num_classes; ++c)
        if (probs[c] > probs[best]) best = c;  // ties keep the smaller id
    return {best, std::move(probs)};
}

double accuracy(const Model& model, const Corpus& corpus) {
    std::vector<size_t> test_docs = corpus.split_indices(Split::Test);
    if (test_docs.empty()) throw ValidationError("test split is empty");
    long long correct = 0;
#pragma omp parallel for reduction(+ : correct) schedule(dynamic, 32)
    for (size_t i = 0; i < test_docs.size(); ++i) {
        const Document& doc = corpus.documents[test_docs[i]];
        auto [label, probs] = predict(model, doc.tokens);
        if (label == doc.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test_docs.size());
}

EvalStats evaluate(const Model& model, const Corpus& corpus) {
    std::vector<size_t> test_docs = corpus.split_indices(Split::Test);
    if (test_docs.empty()) throw ValidationError("test split is empty");
    std::vector<uint8_t> hit(test_docs.size());
    std::vector<double> loss(test_docs.size());
#pragma omp parallel for schedule(dynamic, 32)
    for (size_t i = 0; i < test_docs.size(); ++i) {
        const Document& doc = corpus.documents[test_docs[i]];
        auto [label, probs] = predict(model, doc.tokens);
        hit[i] = label == doc.label ? 1 : 0;
        loss[i] = -std::log(std::max(probs[doc.label], 1e-300));
    }
    EvalStats stats;
    long long correct = 0;
    double total = 0.0;
    for (size_t i = 0; i < test_docs.size(); ++i) {  // ordered reduction
        correct += hit[i];
        total += loss[i];
    }
    stats.accuracy = static_cast<double>(correct) / static_cast<double>(test_docs.size());
    stats.mean_cross_entropy = total / static_cast<double>(test_docs.size());
    return stats;
}

double batch_loss(const Model& model, std::span<const Document> docs, Gradients* gradients) {
    const uint32_t dim = model.embeddings.dim;
    const uint32_t C = model.num_classes;
    if (gradients) {
        gradients->weights.assign(model.weights.size(), 0.0);
        gradients->bias.assign(model.bias.size(), 0.0);
        gradients->embeddings.assign(model.embeddings.data.size(), 0.0);
    }
    double total = 0.0;
    const double inv_n = 1.0 / static_cast<double>(docs.size());
    for (const Document& doc : docs) {
        DocForward f = forward(model.weights, model.bias, model.embeddings, C, doc);
        total += -std::log(std::max(f.probs[doc.label], 1e-300));
        if (!gradients) continue;
        for (uint32_t c = 0; c < C; ++c) {
            const double g = (f.probs[c] - (c == doc.label ? 1.0 : 0.0)) * inv_n;
            double* gw = gradients->weights.data() + size_t(c) * dim;
            const double* w = model.weights.data() + size_t(c) * dim;
            for (uint32_t i = 0; i < dim; ++i) gw[i] += g * f.h[i];
            gradients->bias[c] += g;
            if (!f.hits.empty() && !model.config.freeze_embeddings) {
                const double share = g / static_cast<double>(f.hits.size());
                for (uint32_t id : f.hits) {
                    double* gv = gradients->embeddings.data() + size_t(id) * dim;
                    for (uint32_t i = 0; i < dim; ++i) gv[i] += share * w[i];
                }
            }
        }
    }
    return total * inv_n;
}

}  // namespace relevancy
