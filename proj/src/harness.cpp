#include "relevancy/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "relevancy/filters.hpp"
#include "relevancy/pos_tagger.hpp"
#include "relevancy/rng.hpp"
#include "relevancy/select.hpp"
#include "relevancy/serialize.hpp"
#include "relevancy/vectorize.hpp"

namespace relevancy {

using nlohmann::json;

namespace {

// Seed stream tags; new stages append so existing streams never shift.
enum SeedStream : uint64_t {
    kSplitSeed = 1,
    kEmbeddingSeed = 2,
    kSearchSeed = 3,
    kMaskEmbeddingSeed = 4,
    kDevSplitSeed = 5,
    kRunSeedBase = 1000,
};

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::Baseline1: return "baseline1";
        case Method::Baseline2: return "baseline2";
        case Method::Method1: return "method1";
        case Method::Method2: return "method2";
        case Method::Method3: return "method3";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "baseline1") return Method::Baseline1;
    if (name == "baseline2") return Method::Baseline2;
    if (name == "method1") return Method::Method1;
    if (name == "method2") return Method::Method2;
    if (name == "method3") return Method::Method3;
    throw ValidationError("unknown method: " + std::string(name));
}

namespace {

std::string trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError("config key '" + key + "' expects a boolean, got '" + v + "'");
}

template <typename T>
T parse_number(const std::string& v, const std::string& key) {
    std::istringstream ss(v);
    T out;
    if (!(ss >> out)) throw ValidationError("config key '" + key + "' expects a number, got '" + v + "'");
    return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);

    ExperimentConfig cfg;
    SyntheticSpec synth;
    bool use_synthetic = false;
    bool test_fraction_set = false;

    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (!value.empty() && value.front() == '"' && value.back() == '"' && value.size() >= 2)
            value = value.substr(1, value.size() - 2);

        if (key == "corpus") cfg.corpus_path = value;
        else if (key == "format") cfg.corpus_format = value;
        else if (key == "lowercase") cfg.tokenizer.lowercase = parse_bool(value, key);
        else if (key == "strip_punct") cfg.tokenizer.strip_punct = parse_bool(value, key);
        else if (key == "synthetic") use_synthetic = parse_bool(value, key);
        else if (key == "synth_classes") synth.num_classes = parse_number<uint32_t>(value, key);
        else if (key == "synth_docs_per_class") synth.docs_per_class = parse_number<uint32_t>(value, key);
        else if (key == "synth_predictive") synth.predictive_per_class = parse_number<uint32_t>(value, key);
        else if (key == "synth_noise") synth.noise_tokens = parse_number<uint32_t>(value, key);
        else if (key == "synth_doc_len") synth.doc_len = parse_number<uint32_t>(value, key);
        else if (key == "synth_emission") synth.emission_prob = parse_number<double>(value, key);
        else if (key == "test_fraction") { cfg.test_fraction = parse_number<double>(value, key); test_fraction_set = true; }
        else if (key == "dev_fraction") cfg.dev_fraction = parse_number<double>(value, key);
        else if (key == "methods") {
            cfg.methods.clear();
            std::istringstream ms(value);
            std::string m;
            while (std::getline(ms, m, ',')) {
                m = trim(m);
                if (!m.empty()) cfg.methods.push_back(parse_method(m));
            }
            if (cfg.methods.empty()) throw ValidationError("config key 'methods' lists no methods");
        }
        else if (key == "repeats") cfg.repeats = parse_number<uint32_t>(value, key);
        else if (key == "k") cfg.k = parse_number<uint32_t>(value, key);
        else if (key == "min_df") cfg.min_doc_freq = parse_number<uint32_t>(value, key);
        else if (key == "normalize") cfg.normalize_tfidf = parse_bool(value, key);
        else if (key == "embeddings") cfg.embeddings_path = value;
        else if (key == "dim") cfg.embedding_dim = parse_number<uint32_t>(value, key);
        else if (key == "lr") cfg.classifier.learning_rate = parse_number<double>(value, key);
        else if (key == "epochs") cfg.classifier.epochs = parse_number<uint32_t>(value, key);
        else if (key == "freeze") cfg.classifier.freeze_embeddings = parse_bool(value, key);
        else if (key == "init_scale") cfg.classifier.init_scale = parse_number<double>(value, key);
        else if (key == "seed") { cfg.master_seed = parse_number<uint64_t>(value, key); cfg.master_seed_from_config = true; }
        else throw ValidationError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (use_synthetic) {
        synth.seed = cfg.master_seed;
        cfg.synthetic = synth;
    }
    if (cfg.corpus_path.empty() && !cfg.synthetic)
        throw ValidationError("config needs either 'corpus' or 'synthetic = true'");
    if (!cfg.corpus_path.empty() && cfg.synthetic)
        throw ValidationError("config sets both 'corpus' and 'synthetic'");
    if (cfg.repeats < 1) throw ValidationError("repeats must be at least 1");
    if (!test_fraction_set) cfg.test_fraction = 0.2;
    return cfg;
}

namespace {

json config_echo_json(const ExperimentConfig& cfg) {
    json j{{"repeats", cfg.repeats},
           {"k", cfg.k},
           {"min_df", cfg.min_doc_freq},
           {"normalize", cfg.normalize_tfidf},
           {"dim", cfg.embedding_dim},
           {"lr", cfg.classifier.learning_rate},
           {"epochs", cfg.classifier.epochs},
           {"freeze", cfg.classifier.freeze_embeddings},
           {"seed", cfg.master_seed},
           {"dev_fraction", cfg.dev_fraction}};
    json methods = json::array();
    for (Method m : cfg.methods) methods.push_back(method_name(m));
    j["methods"] = methods;
    if (cfg.synthetic) {
        const SyntheticSpec& s = *cfg.synthetic;
        j["synthetic"] = {{"classes", s.num_classes},
                          {"docs_per_class", s.docs_per_class},
                          {"predictive", s.predictive_per_class},
                          {"noise", s.noise_tokens},
                          {"doc_len", s.doc_len},
                          {"emission", s.emission_prob},
                          {"seed", s.seed}};
    } else {
        j["corpus"] = cfg.corpus_path;
        j["format"] = cfg.corpus_format;
    }
    if (!cfg.embeddings_path.empty()) j["embeddings"] = cfg.embeddings_path;
    if (cfg.test_fraction) j["test_fraction"] = *cfg.test_fraction;
    return j;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

uint32_t distinct_observed_tokens(const Corpus& corpus) {
    std::unordered_set<std::string_view> seen;
    for (const Document& d : corpus.documents)
        for (const std::string& t : d.tokens) seen.insert(t);
    return static_cast<uint32_t>(seen.size());
}

}  // namespace

double subset_search_metric(const EvalStats& stats) {
    // Cross-entropy stays below -ln(1e-300) ~ 691, so 1e-6 keeps the
    // refinement under one accuracy step for any eval split up to ~1400 docs.
    return stats.accuracy - 1e-6 * stats.mean_cross_entropy;
}

namespace {

Corpus train_only_corpus(const Corpus& corpus) {
    Corpus out;
    out.label_names = corpus.label_names;
    out.label_index = corpus.label_index;
    for (const Document& d : corpus.documents)
        if (d.split == Split::Train) out.documents.push_back(d);
    return out;
}

Corpus flip_splits(const Corpus& corpus) {
    Corpus out = corpus;
    for (Document& d : out.documents)
        d.split = d.split == Split::Train ? Split::Test : Split::Train;
    return out;
}

}  // namespace

FeatureSelection run_subset_search(const Corpus& corpus, const Vocabulary& vocab,
                                   const FeatureScoreTable& scores, const EmbeddingTable& table,
                                   const SubsetSearchSetup& setup) {
    TrainConfig eval_cfg = setup.classifier;
    eval_cfg.seed = derive_seed(setup.seed, kSearchSeed);

    std::vector<Corpus> folds;
    Corpus train_docs = train_only_corpus(corpus);
    if (setup.dev_fraction > 0.0) {
        folds.push_back(split_corpus(train_docs, setup.dev_fraction,
                                     derive_seed(setup.seed, kDevSplitSeed)));
    } else {
        Corpus half = split_corpus(train_docs, 0.5, derive_seed(setup.seed, kDevSplitSeed));
        folds.push_back(half);
        folds.push_back(flip_splits(half));
    }

    return incremental_search(scores, setup.k, [&](std::span<const uint32_t> prefix) {
        auto terms = selected_terms(vocab, prefix);
        double metric = 0.0;
        for (const Corpus& fold : folds) {
            auto [rewritten, _] = rewrite_selected(fold, terms);
            Model model = train(rewritten, table, eval_cfg);
            metric += subset_search_metric(evaluate(model, rewritten));
        }
        return metric / static_cast<double>(folds.size());
    });
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    ExperimentReport report;
    report.config_echo = config_echo_json(config);
    std::string stage = "setup";
    try {
        // Stage: corpus acquisition.
        stage = "load";
        Corpus corpus;
        if (config.synthetic) {
            corpus = generate_synthetic(*config.synthetic).corpus;
        } else if (config.corpus_format == "bin") {
            corpus = read_corpus(config.corpus_path);
        } else {
            corpus = load_corpus(config.corpus_path, parse_corpus_format(config.corpus_format),
                                 config.tokenizer);
        }

        stage = "split";
        if (corpus.count_split(Split::Test) == 0)
            corpus = split_corpus(corpus, config.test_fraction,
                                  derive_seed(config.master_seed, kSplitSeed));
        if (corpus.count_split(Split::Test) == 0)
            throw ValidationError("corpus has no test documents and no test_fraction was given");

        stage = "vectorize";
        const Vocabulary vocab = build_vocabulary(corpus, config.min_doc_freq);
        report.train_vocab_size = vocab.size();

        stage = "embeddings";
        EmbeddingTable base_table;
        if (!config.embeddings_path.empty()) {
            base_table = load_embeddings(config.embeddings_path);
            ensure_coverage(base_table, vocab.terms, derive_seed(config.master_seed, kEmbeddingSeed),
                            config.classifier.init_scale);
        } else {
            base_table = init_random_embeddings(vocab, config.embedding_dim,
                                                derive_seed(config.master_seed, kEmbeddingSeed),
                                                config.classifier.init_scale);
        }

        const bool needs_fs =
            std::any_of(config.methods.begin(), config.methods.end(), [](Method m) {
                return m == Method::Method1 || m == Method::Method2 || m == Method::Method3;
            });

        FeatureScoreTable scores;
        FeatureSelection selection;
        std::unordered_set<std::string> kept_terms;
        if (needs_fs) {
            stage = "score";
            const SparseDocTermMatrix matrix = tfidf_matrix(corpus, vocab, config.normalize_tfidf);
            scores = score_features(corpus, vocab, matrix);

            stage = "select";
            SubsetSearchSetup setup;
            setup.k = config.k;
            setup.dev_fraction = config.dev_fraction;
            setup.classifier = config.classifier;
            setup.seed = config.master_seed;
            selection = run_subset_search(corpus, vocab, scores, base_table, setup);
            apply_selection(scores, selection);
            kept_terms = selected_terms(vocab, selection.selected);

            SelectionSummary summary;
            summary.k = selection.k;
            summary.best_prefix = selection.best_prefix;
            summary.selected_count = selection.selected.size();
            summary.trace = selection.trace;
            report.selection = summary;
        }

        const uint32_t plain_vocab = distinct_observed_tokens(corpus);
        const double ratio =
            needs_fs ? static_cast<double>(selection.selected.size()) / vocab.size() : 1.0;

        for (Method m : config.methods) {
            stage = method_name(m);
            MethodResult result;
            result.method = m;

            Corpus method_corpus;
            EmbeddingTable method_table;
            switch (m) {
                case Method::Baseline1:
                    method_corpus = corpus;
                    method_table = base_table;
                    result.vocab_size = plain_vocab;
                    result.selected_ratio = 1.0;
                    break;
                case Method::Baseline2:
                    method_corpus = corpus;
                    method_table = augment_meta_zeros(base_table);
                    result.vocab_size = plain_vocab;
                    result.selected_ratio = 1.0;
                    break;
                case Method::Method1: {
                    auto [rewritten, tr] = rewrite_selected(corpus, kept_terms);
                    method_corpus = std::move(rewritten);
                    method_table = base_table;
                    result.transform = tr;
                    result.vocab_size = tr.vocab_after;
                    result.selected_ratio = ratio;
                    break;
                }
                case Method::Method2: {
                    auto tagger = default_tagger();
                    auto [masked, tr] = mask_low_rank(corpus, kept_terms, *tagger);
                    method_corpus = std::move(masked);
                    method_table = base_table;
                    // Mask composites have no pretrained rows; they start
                    // random and get learned during training.
                    std::vector<std::string> mask_terms;
                    {
                        std::unordered_set<std::string> seen;
                        for (const Document& d : method_corpus.documents)
                            for (const std::string& t : d.tokens)
                                if (t.rfind(kMaskPrefix, 0) == 0 && seen.insert(t).second)
                                    mask_terms.push_back(t);
                    }
                    std::sort(mask_terms.begin(), mask_terms.end());
                    ensure_coverage(method_table, mask_terms,
                                    derive_seed(config.master_seed, kMaskEmbeddingSeed),
                                    config.classifier.init_scale);
                    result.transform = tr;
                    result.vocab_size = tr.vocab_after;
                    result.selected_ratio = ratio;
                    break;
                }
                case Method::Method3:
                    method_corpus = corpus;  // text identical to baseline 1
                    method_table = augment_meta(base_table, scores, selection);
                    result.vocab_size = plain_vocab;
                    result.selected_ratio = ratio;
                    break;
            }

            std::vector<double> accs, secs;
            for (uint32_t r = 0; r < config.repeats; ++r) {
                TrainConfig run_cfg = config.classifier;
                run_cfg.seed = derive_seed(config.master_seed, kRunSeedBase + r);
                TrainStats stats;
                Model model = train(method_corpus, method_table, run_cfg, &stats);
                MethodRun run;
                run.seed = run_cfg.seed;
                run.accuracy = accuracy(model, method_corpus);
                run.train_seconds = stats.wall_seconds;
                accs.push_back(run.accuracy);
                secs.push_back(run.train_seconds);
                result.runs.push_back(run);
            }
            result.accuracy_mean = mean_of(accs);
            result.accuracy_std = sample_std(accs, result.accuracy_mean);
            result.train_seconds_mean = mean_of(secs);
            report.methods.push_back(std::move(result));
        }
        return report;
    } catch (const ExperimentError&) {
        throw;
    } catch (const IoError& e) {
        throw ExperimentError(stage, e.what(), report_to_json(report), true);
    } catch (const std::exception& e) {
        throw ExperimentError(stage, e.what(), report_to_json(report));
    }
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "json") return ReportFormat::Json;
    if (name == "tsv") return ReportFormat::Tsv;
    if (name == "markdown" || name == "md") return ReportFormat::Markdown;
    throw ValidationError("unknown report format: " + std::string(name));
}

json report_to_json(const ExperimentReport& report) {
    json j{{"version", kFormatVersion},
           {"config", report.config_echo},
           {"train_vocab_size", report.train_vocab_size}};
    if (report.selection) {
        j["selection"] = {{"k", report.selection->k},
                          {"best_prefix", report.selection->best_prefix},
                          {"selected_count", report.selection->selected_count},
                          {"trace", report.selection->trace}};
    } else {
        j["selection"] = nullptr;
    }
    json methods = json::array();
    for (const MethodResult& r : report.methods) {
        json runs = json::array();
        for (const MethodRun& run : r.runs)
            runs.push_back({{"seed", run.seed},
                            {"accuracy", run.accuracy},
                            {"train_seconds", run.train_seconds}});
        json m{{"method", method_name(r.method)},
               {"vocab", r.vocab_size},
               {"selected_ratio", r.selected_ratio},
               {"accuracy_mean", r.accuracy_mean},
               {"accuracy_std", r.accuracy_std},
               {"train_seconds_mean", r.train_seconds_mean},
               {"runs", runs}};
        if (r.transform) {
            m["transform"] = {{"method", r.transform->method},
                              {"vocab_before", r.transform->vocab_before},
                              {"vocab_after", r.transform->vocab_after},
                              {"mask_tags_added", r.transform->mask_tags_added},
                              {"tokens_removed_or_masked", r.transform->tokens_removed_or_masked}};
        }
        methods.push_back(std::move(m));
    }
    j["methods"] = std::move(methods);
    return j;
}

ExperimentReport report_from_json(const json& j) {
    ExperimentReport report;
    report.config_echo = j.value("config", json::object());
    report.train_vocab_size = j.at("train_vocab_size").get<uint32_t>();
    if (j.contains("selection") && !j["selection"].is_null()) {
        SelectionSummary s;
        s.k = j["selection"].at("k").get<uint32_t>();
        s.best_prefix = j["selection"].at("best_prefix").get<uint32_t>();
        s.selected_count = j["selection"].at("selected_count").get<uint64_t>();
        s.trace = j["selection"].at("trace").get<std::vector<double>>();
        report.selection = s;
    }
    for (const auto& m : j.at("methods")) {
        MethodResult r;
        r.method = parse_method(m.at("method").get<std::string>());
        r.vocab_size = m.at("vocab").get<uint32_t>();
        r.selected_ratio = m.at("selected_ratio").get<double>();
        r.accuracy_mean = m.at("accuracy_mean").get<double>();
        r.accuracy_std = m.at("accuracy_std").get<double>();
        r.train_seconds_mean = m.at("train_seconds_mean").get<double>();
        for (const auto& run : m.at("runs")) {
            MethodRun mr;
            mr.seed = run.at("seed").get<uint64_t>();
            mr.accuracy = run.at("accuracy").get<double>();
            mr.train_seconds = run.at("train_seconds").get<double>();
            r.runs.push_back(mr);
        }
        if (m.contains("transform")) {
            TransformReport tr;
            tr.method = m["transform"].at("method").get<int>();
            tr.vocab_before = m["transform"].at("vocab_before").get<uint32_t>();
            tr.vocab_after = m["transform"].at("vocab_after").get<uint32_t>();
            tr.mask_tags_added = m["transform"].at("mask_tags_added").get<uint32_t>();
            tr.tokens_removed_or_masked =
                m["transform"].at("tokens_removed_or_masked").get<uint64_t>();
            r.transform = tr;
        }
        report.methods.push_back(std::move(r));
    }
    return report;
}

std::string compare_report(const ExperimentReport& report, ReportFormat format) {
    if (format == ReportFormat::Json) return report_to_json(report).dump(2) + "\n";

    char buf[160];
    std::string out;
    const char* header = "method\taccuracy\ttrain_seconds\tvocab\tratio";
    if (format == ReportFormat::Tsv) {
        out += header;
        out += '\n';
        for (const MethodResult& r : report.methods) {
            std::snprintf(buf, sizeof buf, "%s\t%.4f ± %.4f\t%.4f\t%u\t%.3f\n",
                          method_name(r.method).c_str(), r.accuracy_mean, r.accuracy_std,
                          r.train_seconds_mean, r.vocab_size, r.selected_ratio);
            out += buf;
        }
        return out;
    }

    out += "| method | accuracy | train_seconds | vocab | ratio |\n";
    out += "|---|---|---|---|---|\n";
    for (const MethodResult& r : report.methods) {
        std::snprintf(buf, sizeof buf, "| %s | %.4f ± %.4f | %.4f | %u | %.3f |\n",
                      method_name(r.method).c_str(), r.accuracy_mean, r.accuracy_std,
                      r.train_seconds_mean, r.vocab_size, r.selected_ratio);
        out += buf;
    }
    return out;
}

}  // namespace relevancy
