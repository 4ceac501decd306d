#include "relevancy/serialize.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>

#include "relevancy/errors.hpp"

namespace relevancy {

namespace {

using nlohmann::json;

void write_raw(std::ofstream& os, const void* data, size_t bytes) {
    os.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

void read_raw(std::ifstream& is, void* data, size_t bytes, const std::string& path) {
    is.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
    if (!is) throw IoError("truncated file: " + path);
}

void write_u32(std::ofstream& os, uint32_t v) { write_raw(os, &v, sizeof v); }

uint32_t read_u32(std::ifstream& is, const std::string& path) {
    uint32_t v = 0;
    read_raw(is, &v, sizeof v, path);
    return v;
}

void write_string(std::ofstream& os, const std::string& s) {
    write_u32(os, static_cast<uint32_t>(s.size()));
    write_raw(os, s.data(), s.size());
}

std::string read_string(std::ifstream& is, const std::string& path) {
    uint32_t len = read_u32(is, path);
    std::string s(len, '\0');
    read_raw(is, s.data(), len, path);
    return s;
}

std::ofstream open_binary_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + path);
    return os;
}

std::ifstream open_binary_in(const std::string& path, const char magic[4]) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char tag[4];
    read_raw(is, tag, 4, path);
    if (std::string_view(tag, 4) != std::string_view(magic, 4))
        throw ValidationError("unexpected file type in " + path);
    return is;
}

json read_header(std::ifstream& is, const std::string& path) {
    uint32_t len = read_u32(is, path);
    std::string raw(len, '\0');
    read_raw(is, raw.data(), len, path);
    json h = json::parse(raw, nullptr, false);
    if (h.is_discarded()) throw ValidationError("corrupt header in " + path);
    if (h.value("version", 0) != kFormatVersion)
        throw ValidationError("unsupported format version in " + path);
    return h;
}

void write_header(std::ofstream& os, const char magic[4], json header) {
    header["version"] = kFormatVersion;
    const std::string raw = header.dump();
    write_raw(os, magic, 4);
    write_u32(os, static_cast<uint32_t>(raw.size()));
    write_raw(os, raw.data(), raw.size());
}

}  // namespace

AtomicWriter::AtomicWriter(const std::string& path)
    : path_(path), tmp_path_(path + ".tmp"), out_(open_binary_out(tmp_path_)) {}

AtomicWriter::~AtomicWriter() {
    if (!committed_) {
        out_.close();
        std::error_code ec;
        std::filesystem::remove(tmp_path_, ec);
    }
}

void AtomicWriter::commit() {
    out_.flush();
    if (!out_) throw IoError("write failed: " + tmp_path_);
    out_.close();
    std::error_code ec;
    std::filesystem::rename(tmp_path_, path_, ec);
    if (ec) throw IoError("cannot move " + tmp_path_ + " to " + path_ + ": " + ec.message());
    committed_ = true;
}

void write_json_atomic(const nlohmann::json& j, const std::string& path) {
    AtomicWriter writer(path);
    writer.stream() << j.dump(2) << '\n';
    writer.commit();
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    json j = json::parse(is, nullptr, false);
    if (j.is_discarded()) throw ValidationError("invalid JSON in " + path);
    return j;
}

// corpus container: header {version, labels}, then per document
// id, label, split, empty, token count, tokens.
void save_corpus(const Corpus& corpus, const std::string& path) {
    AtomicWriter writer(path);
    std::ofstream& os = writer.stream();
    write_header(os, "RVCB", json{{"labels", corpus.label_names},
                                  {"num_docs", corpus.documents.size()}});
    for (const Document& doc : corpus.documents) {
        write_u32(os, doc.id);
        write_u32(os, doc.label);
        uint8_t split = static_cast<uint8_t>(doc.split);
        uint8_t empty = doc.empty ? 1 : 0;
        write_raw(os, &split, 1);
        write_raw(os, &empty, 1);
        write_u32(os, static_cast<uint32_t>(doc.tokens.size()));
        for (const std::string& t : doc.tokens) write_string(os, t);
    }
    writer.commit();
}

Corpus read_corpus(const std::string& path) {
    std::ifstream is = open_binary_in(path, "RVCB");
    json header = read_header(is, path);
    Corpus corpus;
    for (const auto& name : header.at("labels")) corpus.intern_label(name.get<std::string>());
    const size_t num_docs = header.at("num_docs").get<size_t>();
    corpus.documents.reserve(num_docs);
    for (size_t i = 0; i < num_docs; ++i) {
        Document doc;
        doc.id = read_u32(is, path);
        doc.label = read_u32(is, path);
        uint8_t split = 0, empty = 0;
        read_raw(is, &split, 1, path);
        read_raw(is, &empty, 1, path);
        doc.split = split == 0 ? Split::Train : Split::Test;
        doc.empty = empty != 0;
        uint32_t n_tokens = read_u32(is, path);
        doc.tokens.reserve(n_tokens);
        for (uint32_t t = 0; t < n_tokens; ++t) doc.tokens.push_back(read_string(is, path));
        if (doc.label >= corpus.num_classes())
            throw ValidationError("label id out of range in " + path);
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

// matrix container: header {version, num_docs, num_features, normalized,
// terms}, then row_ptr (u64), col (u32), val (f64).
void save_matrix(const SparseDocTermMatrix& matrix, const Vocabulary& vocab,
                 const std::string& path) {
    AtomicWriter writer(path);
    std::ofstream& os = writer.stream();
    write_header(os, "RVMX", json{{"num_docs", matrix.num_docs},
                                  {"num_features", matrix.num_features},
                                  {"normalized", matrix.normalized},
                                  {"nnz", matrix.nnz()},
                                  {"terms", vocab.terms}});
    write_raw(os, matrix.row_ptr.data(), matrix.row_ptr.size() * sizeof(uint64_t));
    write_raw(os, matrix.col.data(), matrix.col.size() * sizeof(uint32_t));
    write_raw(os, matrix.val.data(), matrix.val.size() * sizeof(double));
    writer.commit();
}

std::pair<SparseDocTermMatrix, Vocabulary> read_matrix(const std::string& path) {
    std::ifstream is = open_binary_in(path, "RVMX");
    json header = read_header(is, path);
    SparseDocTermMatrix m;
    m.num_docs = header.at("num_docs").get<uint32_t>();
    m.num_features = header.at("num_features").get<uint32_t>();
    m.normalized = header.at("normalized").get<bool>();
    const size_t nnz = header.at("nnz").get<size_t>();
    m.row_ptr.resize(size_t(m.num_docs) + 1);
    m.col.resize(nnz);
    m.val.resize(nnz);
    read_raw(is, m.row_ptr.data(), m.row_ptr.size() * sizeof(uint64_t), path);
    read_raw(is, m.col.data(), m.col.size() * sizeof(uint32_t), path);
    read_raw(is, m.val.data(), m.val.size() * sizeof(double), path);

    Vocabulary vocab;
    for (const auto& t : header.at("terms")) {
        vocab.index.emplace(t.get<std::string>(), static_cast<uint32_t>(vocab.terms.size()));
        vocab.terms.push_back(t.get<std::string>());
    }
    if (vocab.size() != m.num_features)
        throw ValidationError("term list does not match feature count in " + path);
    return {std::move(m), std::move(vocab)};
}

void save_scores(const FeatureScoreTable& table, const std::string& path) {
    json features = json::array();
    for (size_t i = 0; i < table.size(); ++i) {
        features.push_back({{"term", table.terms[i]},
                            {"chi2", table.chi2[i]},
                            {"anova_f", table.anova_f[i]},
                            {"mi", table.mi[i]},
                            {"chi2_norm", table.chi2_norm[i]},
                            {"anova_norm", table.anova_norm[i]},
                            {"mi_norm", table.mi_norm[i]},
                            {"relevancy", table.relevancy[i]}});
    }
    write_json_atomic(json{{"version", kFormatVersion}, {"scores", features}}, path);
}

FeatureScoreTable read_scores(const std::string& path) {
    json j = read_json(path);
    if (!j.contains("scores")) throw ValidationError("missing scores array in " + path);
    FeatureScoreTable table;
    for (const auto& rec : j["scores"]) {
        table.terms.push_back(rec.at("term").get<std::string>());
        table.chi2.push_back(rec.at("chi2").get<double>());
        table.anova_f.push_back(rec.at("anova_f").get<double>());
        table.mi.push_back(rec.at("mi").get<double>());
        table.chi2_norm.push_back(rec.at("chi2_norm").get<double>());
        table.anova_norm.push_back(rec.at("anova_norm").get<double>());
        table.mi_norm.push_back(rec.at("mi_norm").get<double>());
        table.relevancy.push_back(rec.at("relevancy").get<double>());
    }
    table.selected.assign(table.size(), 0);
    return table;
}

void save_selection(const FeatureSelection& selection, const FeatureScoreTable& table,
                    const std::string& path) {
    json selected_terms = json::array();
    for (uint32_t id : selection.selected) selected_terms.push_back(table.terms.at(id));
    write_json_atomic(json{{"version", kFormatVersion},
                           {"k", selection.k},
                           {"best_prefix", selection.best_prefix},
                           {"trace", selection.trace},
                           {"selected_terms", selected_terms}},
                      path);
}

StoredSelection read_selection(const std::string& path) {
    json j = read_json(path);
    StoredSelection out;
    out.selection.k = j.at("k").get<uint32_t>();
    out.selection.best_prefix = j.at("best_prefix").get<uint32_t>();
    out.selection.trace = j.at("trace").get<std::vector<double>>();
    out.selected_terms = j.at("selected_terms").get<std::vector<std::string>>();
    return out;
}

// model container: header {version, num_classes, dim, meta, config, labels,
// tokens}, then embedding data, W, b (all f64).
void save_model(const Model& model, const std::string& path) {
    AtomicWriter writer(path);
    std::ofstream& os = writer.stream();
    write_header(os, "RVMD",
                 json{{"num_classes", model.num_classes},
                      {"dim", model.embeddings.dim},
                      {"meta", model.embeddings.meta},
                      {"labels", model.label_names},
                      {"tokens", model.embeddings.tokens},
                      {"config",
                       {{"learning_rate", model.config.learning_rate},
                        {"epochs", model.config.epochs},
                        {"seed", model.config.seed},
                        {"freeze_embeddings", model.config.freeze_embeddings},
                        {"init_scale", model.config.init_scale}}}});
    write_raw(os, model.embeddings.data.data(), model.embeddings.data.size() * sizeof(double));
    write_raw(os, model.weights.data(), model.weights.size() * sizeof(double));
    write_raw(os, model.bias.data(), model.bias.size() * sizeof(double));
    writer.commit();
}

Model read_model(const std::string& path) {
    std::ifstream is = open_binary_in(path, "RVMD");
    json header = read_header(is, path);
    Model model;
    model.num_classes = header.at("num_classes").get<uint32_t>();
    model.embeddings.dim = header.at("dim").get<uint32_t>();
    model.embeddings.meta = header.at("meta").get<bool>();
    model.label_names = header.at("labels").get<std::vector<std::string>>();
    for (const auto& t : header.at("tokens")) model.embeddings.add(t.get<std::string>());
    const json& cfg = header.at("config");
    model.config.learning_rate = cfg.at("learning_rate").get<double>();
    model.config.epochs = cfg.at("epochs").get<uint32_t>();
    model.config.seed = cfg.at("seed").get<uint64_t>();
    model.config.freeze_embeddings = cfg.at("freeze_embeddings").get<bool>();
    model.config.init_scale = cfg.at("init_scale").get<double>();
    read_raw(is, model.embeddings.data.data(), model.embeddings.data.size() * sizeof(double), path);
    model.weights.resize(size_t(model.num_classes) * model.embeddings.dim);
    model.bias.resize(model.num_classes);
    read_raw(is, model.weights.data(), model.weights.size() * sizeof(double), path);
    read_raw(is, model.bias.data(), model.bias.size() * sizeof(double), path);
    return model;
}

}  // namespace relevancy
