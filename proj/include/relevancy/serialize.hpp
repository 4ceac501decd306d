#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "relevancy/classifier.hpp"
#include "relevancy/corpus.hpp"
#include "relevancy/filters.hpp"
#include "relevancy/select.hpp"
#include "relevancy/vectorize.hpp"

namespace relevancy {

inline constexpr int kFormatVersion = 1;

/// Writes to `<path>.tmp` and renames into place on commit, so a failed stage
/// never leaves a partial output behind.
class AtomicWriter {
public:
    explicit AtomicWriter(const std::string& path);
    ~AtomicWriter();
    std::ofstream& stream() { return out_; }
    void commit();

private:
    std::string path_;
    std::string tmp_path_;
    std::ofstream out_;
    bool committed_ = false;
};

void write_json_atomic(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json(const std::string& path);

// Binary container: magic tag, little-endian u32 header length, JSON header,
// then raw payload sections. Each format documents its header fields.

void save_corpus(const Corpus& corpus, const std::string& path);
Corpus read_corpus(const std::string& path);

void save_matrix(const SparseDocTermMatrix& matrix, const Vocabulary& vocab,
                 const std::string& path);
std::pair<SparseDocTermMatrix, Vocabulary> read_matrix(const std::string& path);

void save_scores(const FeatureScoreTable& table, const std::string& path);
FeatureScoreTable read_scores(const std::string& path);

void save_selection(const FeatureSelection& selection, const FeatureScoreTable& table,
                    const std::string& path);
/// Returns the selection plus the selected terms resolved against the stored
/// score table ordering.
struct StoredSelection {
    FeatureSelection selection;
    std::vector<std::string> selected_terms;
};
StoredSelection read_selection(const std::string& path);

void save_model(const Model& model, const std::string& path);
Model read_model(const std::string& path);

}  // namespace relevancy
