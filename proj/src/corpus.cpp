#include "relevancy/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "relevancy/errors.hpp"
#include "relevancy/rng.hpp"

namespace relevancy {

uint32_t Corpus::intern_label(const std::string& name) {
    auto it = label_index.find(name);
    if (it != label_index.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(label_names.size());
    label_names.push_back(name);
    label_index.emplace(name, id);
    return id;
}

std::vector<size_t> Corpus::split_indices(Split s) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < documents.size(); ++i)
        if (documents[i].split == s) out.push_back(i);
    return out;
}

size_t Corpus::count_split(Split s) const {
    return static_cast<size_t>(
        std::count_if(documents.begin(), documents.end(),
                      [s](const Document& d) { return d.split == s; }));
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
    std::vector<std::string> tokens;
    std::string current;
    current.reserve(16);
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            flush();
            continue;
        }
        if (config.strip_punct && std::ispunct(c)) continue;
        current.push_back(config.lowercase ? static_cast<char>(std::tolower(c)) : ch);
    }
    flush();
    return tokens;
}

CorpusFormat parse_corpus_format(std::string_view name) {
    if (name == "tsv") return CorpusFormat::Tsv;
    if (name == "jsonl") return CorpusFormat::Jsonl;
    throw ValidationError("unknown corpus format: " + std::string(name));
}

namespace {

void append_document(Corpus& corpus, const std::string& label, std::string_view text,
                     std::optional<Split> split, const TokenizerConfig& config) {
    Document doc;
    doc.id = static_cast<uint32_t>(corpus.documents.size());
    doc.label = corpus.intern_label(label);
    doc.tokens = tokenize(text, config);
    doc.empty = doc.tokens.empty();
    if (split) doc.split = *split;
    corpus.documents.push_back(std::move(doc));
}

void load_tsv_line(Corpus& corpus, const std::string& line, size_t line_no,
                   const TokenizerConfig& config) {
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
        throw ValidationError("line " + std::to_string(line_no) + ": expected label<TAB>text");
    std::string label = line.substr(0, tab);
    if (label.empty())
        throw ValidationError("line " + std::to_string(line_no) + ": empty label");
    append_document(corpus, label, std::string_view(line).substr(tab + 1), std::nullopt, config);
}

void load_jsonl_line(Corpus& corpus, const std::string& line, size_t line_no,
                     const TokenizerConfig& config) {
    nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object())
        throw ValidationError("line " + std::to_string(line_no) + ": invalid JSON record");
    if (!rec.contains("label") || !rec.contains("text"))
        throw ValidationError("line " + std::to_string(line_no) + ": record needs label and text");
    std::string label = rec["label"].is_string() ? rec["label"].get<std::string>()
                                                 : rec["label"].dump();
    if (label.empty())
        throw ValidationError("line " + std::to_string(line_no) + ": empty label");
    if (!rec["text"].is_string())
        throw ValidationError("line " + std::to_string(line_no) + ": text must be a string");
    std::optional<Split> split;
    if (rec.contains("split")) {
        std::string s = rec["split"].get<std::string>();
        if (s == "train")
            split = Split::Train;
        else if (s == "test")
            split = Split::Test;
        else
            throw ValidationError("line " + std::to_string(line_no) + ": split must be train|test");
    }
    append_document(corpus, label, rec["text"].get<std::string>(), split, config);
}

}  // namespace

Corpus load_corpus(const std::string& path, CorpusFormat format, const TokenizerConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file: " + path);
    Corpus corpus;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (format == CorpusFormat::Tsv)
            load_tsv_line(corpus, line, line_no, config);
        else
            load_jsonl_line(corpus, line, line_no, config);
    }
    if (in.bad()) throw IoError("read error on corpus file: " + path);
    return corpus;
}

Corpus split_corpus(const Corpus& corpus, std::optional<double> test_fraction, uint64_t seed) {
    if (!test_fraction) return corpus;
    double f = *test_fraction;
    if (!(f > 0.0 && f < 1.0))
        throw ValidationError("test fraction must lie strictly between 0 and 1");

    std::vector<std::vector<size_t>> by_class(corpus.num_classes());
    for (size_t i = 0; i < corpus.documents.size(); ++i)
        by_class[corpus.documents[i].label].push_back(i);

    Corpus out = corpus;
    for (uint32_t c = 0; c < corpus.num_classes(); ++c) {
        auto& members = by_class[c];
        if (members.size() < 2)
            throw ValidationError("class '" + corpus.label_names[c] +
                                  "' has fewer than 2 documents; cannot stratify");
        size_t n_test = static_cast<size_t>(
            std::llround(static_cast<double>(members.size()) * f));
        n_test = std::min(n_test, members.size() - 1);
        Rng rng(derive_seed(seed, c));
        rng.shuffle(members);
        for (size_t j = 0; j < members.size(); ++j)
            out.documents[members[j]].split = j < n_test ? Split::Test : Split::Train;
    }
    return out;
}

}  // namespace relevancy
