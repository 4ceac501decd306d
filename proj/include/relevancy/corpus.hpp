#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace relevancy {

enum class Split : uint8_t { Train = 0, Test = 1 };

struct TokenizerConfig {
    bool lowercase = true;
    bool strip_punct = true;
};

struct Document {
    uint32_t id = 0;
    uint32_t label = 0;
    Split split = Split::Train;
    bool empty = false;  // no tokens survived preprocessing
    std::vector<std::string> tokens;
};

/// Labeled, tokenized documents plus a dense label dictionary and per-document
/// train/test tags. Immutable once built; safe to share across threads.
struct Corpus {
    std::vector<Document> documents;
    std::vector<std::string> label_names;                   // label id -> name
    std::unordered_map<std::string, uint32_t> label_index;  // name -> label id

    uint32_t num_classes() const { return static_cast<uint32_t>(label_names.size()); }

    // Dense id in first-seen order.
    uint32_t intern_label(const std::string& name);

    std::vector<size_t> split_indices(Split s) const;
    size_t count_split(Split s) const;
};

enum class CorpusFormat { Tsv, Jsonl };

/// Whitespace split, then optional lowercasing and punctuation stripping.
/// Never yields empty tokens; empty input yields an empty sequence.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config);

/// Reads `label<TAB>text` lines or `{"label":..., "text":...}` JSONL records
/// (optional "split": "train"|"test") and tokenizes each record.
/// Malformed records raise ValidationError naming the line.
Corpus load_corpus(const std::string& path, CorpusFormat format, const TokenizerConfig& config);

CorpusFormat parse_corpus_format(std::string_view name);

/// Stratified train/test tagging, deterministic under `seed`. Passing nullopt
/// returns the corpus unchanged (pre-tagged corpora keep their tags).
Corpus split_corpus(const Corpus& corpus, std::optional<double> test_fraction, uint64_t seed);

}  // namespace relevancy
