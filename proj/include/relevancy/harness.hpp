#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relevancy/classifier.hpp"
#include "relevancy/corpus.hpp"
#include "relevancy/errors.hpp"
#include "relevancy/synthetic.hpp"
#include "relevancy/transform.hpp"

namespace relevancy {

enum class Method { Baseline1, Baseline2, Method1, Method2, Method3 };

std::string method_name(Method m);
Method parse_method(std::string_view name);

/// Everything one experiment needs: corpus source, methods, repeat count and
/// classifier settings. Loaded from a flat key = value config file.
struct ExperimentConfig {
    std::string corpus_path;                   // empty when synthetic
    std::string corpus_format = "tsv";         // tsv | jsonl | bin
    std::optional<SyntheticSpec> synthetic;
    TokenizerConfig tokenizer;

    std::optional<double> test_fraction = 0.2;  // applied when the corpus is untagged
    double dev_fraction = 0.0;                  // > 0 evaluates the subset search on a
                                                // validation carve instead of the test split
    std::vector<Method> methods = {Method::Baseline1, Method::Baseline2, Method::Method1,
                                   Method::Method2, Method::Method3};
    uint32_t repeats = 10;
    uint32_t k = 20;
    uint32_t min_doc_freq = 1;
    bool normalize_tfidf = true;

    std::string embeddings_path;  // optional .vec file
    uint32_t embedding_dim = 16;  // random embeddings when no .vec given
    TrainConfig classifier;       // seed field is ignored; runs derive their own
    uint64_t master_seed = 7;
    bool master_seed_from_config = false;
};

ExperimentConfig parse_experiment_config(const std::string& path);

struct MethodRun {
    uint64_t seed = 0;
    double accuracy = 0.0;
    double train_seconds = 0.0;
};

struct MethodResult {
    Method method = Method::Baseline1;
    uint32_t vocab_size = 0;       // distinct tokens observed in the method corpus
    double selected_ratio = 1.0;   // |selected| / V; 1 for the baselines
    double accuracy_mean = 0.0;
    double accuracy_std = 0.0;
    double train_seconds_mean = 0.0;
    std::vector<MethodRun> runs;
    std::optional<TransformReport> transform;  // methods 1 and 2
};

struct SelectionSummary {
    uint32_t k = 0;
    uint32_t best_prefix = 0;
    uint64_t selected_count = 0;
    std::vector<double> trace;
};

struct ExperimentReport {
    nlohmann::json config_echo;
    uint32_t train_vocab_size = 0;  // V
    std::optional<SelectionSummary> selection;
    std::vector<MethodResult> methods;
};

/// Stage failures carry the stage name, whatever part of the report was
/// already assembled, and whether the cause was an I/O failure.
class ExperimentError : public ValidationError {
public:
    ExperimentError(const std::string& stage, const std::string& what, nlohmann::json partial,
                    bool io = false)
        : ValidationError("stage '" + stage + "': " + what),
          partial_report(std::move(partial)),
          io_failure(io) {}
    nlohmann::json partial_report;
    bool io_failure = false;
};

/// Metric the subset search maximizes: held-out accuracy, refined by
/// prediction confidence (mean cross-entropy) at a weight too small to ever
/// outvote a single accuracy step. Plain accuracy quantizes at 1/|eval docs|
/// and saturates on easy corpora, where the smaller-prefix tie-break would
/// freeze the search at the first partition.
double subset_search_metric(const EvalStats& stats);

/// How candidate feature subsets get graded. The test split never takes part:
/// with dev_fraction 0 each subset is scored by 2-fold cross-validation over
/// the training documents, otherwise on a single stratified carve of them.
struct SubsetSearchSetup {
    uint32_t k = 20;
    double dev_fraction = 0.0;
    TrainConfig classifier;  // seed is derived from `seed`, not taken from here
    uint64_t seed = 7;
};

FeatureSelection run_subset_search(const Corpus& corpus, const Vocabulary& vocab,
                                   const FeatureScoreTable& scores, const EmbeddingTable& table,
                                   const SubsetSearchSetup& setup);

/// Runs the requested methods end to end: load or generate, split, vectorize,
/// score, search once, then `repeats` seeded training runs per method.
ExperimentReport run_experiment(const ExperimentConfig& config);

enum class ReportFormat { Json, Tsv, Markdown };
ReportFormat parse_report_format(std::string_view name);

nlohmann::json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

/// Renders with the stable column order
/// method, accuracy mean±std, train seconds mean, vocab, ratio.
std::string compare_report(const ExperimentReport& report, ReportFormat format);

}  // namespace relevancy
