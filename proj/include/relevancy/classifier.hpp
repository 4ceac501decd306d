#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "relevancy/corpus.hpp"
#include "relevancy/filters.hpp"
#include "relevancy/select.hpp"
#include "relevancy/vectorize.hpp"

namespace relevancy {

/// Token -> dense vector table. `meta` marks tables whose vectors carry the
/// four trailing feature-score slots (dim == base dim + 4).
struct EmbeddingTable {
    uint32_t dim = 0;
    bool meta = false;
    std::vector<std::string> tokens;
    std::unordered_map<std::string, uint32_t> index;
    std::vector<double> data;  // row-major, tokens x dim

    size_t count() const { return tokens.size(); }
    std::optional<uint32_t> lookup(std::string_view token) const;
    std::span<const double> vec(uint32_t id) const { return {data.data() + size_t(id) * dim, dim}; }
    std::span<double> vec(uint32_t id) { return {data.data() + size_t(id) * dim, dim}; }
    uint32_t add(const std::string& token);  // zero-initialized row
};

/// Parses the `.vec` text format: header "count dim", then one
/// "token v1 ... vdim" per line. Duplicate tokens keep the last occurrence;
/// a count mismatch warns on stderr and trusts the body.
EmbeddingTable load_embeddings(const std::string& path);

/// Uniform entries in [-scale, +scale], deterministic under seed, one row per
/// vocabulary term. scale <= 0 picks the 1/dim convention.
EmbeddingTable init_random_embeddings(const Vocabulary& vocab, uint32_t dim, uint64_t seed,
                                      double scale = 0.0);

/// Adds randomly initialized rows for vocabulary terms the table lacks
/// (masked composites in particular have no pretrained vectors and must be
/// learned from scratch). Existing rows are untouched.
void ensure_coverage(EmbeddingTable& table, const std::vector<std::string>& terms, uint64_t seed,
                     double scale = 0.0);

/// Extends every vector by [chi2_norm, anova_norm, mi_norm, selected? 1 : 0].
/// Tokens absent from the score table get four zeros. Errors on a table that
/// is already meta.
EmbeddingTable augment_meta(const EmbeddingTable& table, const FeatureScoreTable& scores,
                            const FeatureSelection& selection);

/// Meta-dimensionality baseline: extends every vector by four zero slots.
EmbeddingTable augment_meta_zeros(const EmbeddingTable& table);

/// Mean of the vectors of in-table tokens (over occurrences); if none are in
/// the table the zero vector comes back.
std::vector<double> embed_document(std::span<const std::string> tokens,
                                   const EmbeddingTable& table);

struct TrainConfig {
    double learning_rate = 0.1;
    uint32_t epochs = 5;
    uint64_t seed = 0;
    bool freeze_embeddings = false;
    double init_scale = 0.0;  // <= 0 means 1/dim
};

struct TrainStats {
    double wall_seconds = 0.0;          // epoch loop only
    std::vector<double> epoch_losses;   // mean cross-entropy per epoch
};

/// Averaged-embedding linear classifier: softmax(W . embed(doc) + b).
struct Model {
    EmbeddingTable embeddings;
    uint32_t num_classes = 0;
    std::vector<double> weights;  // num_classes x dim
    std::vector<double> bias;     // num_classes
    std::vector<std::string> label_names;
    TrainConfig config;
};

/// SGD over shuffled training documents with a linearly decaying learning
/// rate. W and b start at zero; embeddings are updated in place unless
/// frozen. Aborts on a non-finite loss, reporting epoch and step.
Model train(const Corpus& corpus, EmbeddingTable table, const TrainConfig& config,
            TrainStats* stats = nullptr);

/// (argmax label, softmax probabilities); ties go to the smallest label id.
std::pair<uint32_t, std::vector<double>> predict(const Model& model,
                                                 std::span<const std::string> tokens);

/// Fraction of correct predictions over the test split. Errors when empty.
double accuracy(const Model& model, const Corpus& corpus);

/// Accuracy plus mean cross-entropy over the test split, accumulated in
/// document order so the result is independent of prediction scheduling.
struct EvalStats {
    double accuracy = 0.0;
    double mean_cross_entropy = 0.0;
};
EvalStats evaluate(const Model& model, const Corpus& corpus);

/// Analytic gradients of the mean cross-entropy over `docs`, laid out like
/// the model parameters. Test-facing surface for the finite-difference check;
/// training applies the same per-document gradients stochastically.
struct Gradients {
    std::vector<double> weights;
    std::vector<double> bias;
    std::vector<double> embeddings;
};
double batch_loss(const Model& model, std::span<const Document> docs,
                  Gradients* gradients = nullptr);

}  // namespace relevancy
