// relevancy: feature scoring, subset search and classification pipeline.
// Subcommands compose through files so every stage is inspectable:
//   ingest -> corpus.bin -> vectorize -> matrix.bin -> score -> scores.json
//   -> select -> selection.json -> transform / train / eval
// `experiment` runs the whole pipeline in-process for timing fidelity.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "relevancy/classifier.hpp"
#include "relevancy/corpus.hpp"
#include "relevancy/errors.hpp"
#include "relevancy/filters.hpp"
#include "relevancy/harness.hpp"
#include "relevancy/pos_tagger.hpp"
#include "relevancy/rng.hpp"
#include "relevancy/select.hpp"
#include "relevancy/serialize.hpp"
#include "relevancy/synthetic.hpp"
#include "relevancy/transform.hpp"
#include "relevancy/vectorize.hpp"

namespace {

using namespace relevancy;
using nlohmann::json;

uint64_t default_seed() {
    if (const char* env = std::getenv("RELEVANCY_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw ValidationError("RELEVANCY_SEED must be an unsigned integer");
        }
    }
    return 0;
}

struct IngestArgs {
    std::string input, format = "tsv", out;
    bool lowercase = false, strip_punct = false;
    std::optional<double> test_fraction;
    uint64_t seed = 0;
    bool seed_given = false;
};

void cmd_ingest(const IngestArgs& a) {
    TokenizerConfig tok{a.lowercase, a.strip_punct};
    Corpus corpus = load_corpus(a.input, parse_corpus_format(a.format), tok);
    uint64_t seed = a.seed_given ? a.seed : default_seed();
    if (a.test_fraction) corpus = split_corpus(corpus, a.test_fraction, seed);
    save_corpus(corpus, a.out);
    std::cerr << "ingested " << corpus.documents.size() << " documents, "
              << corpus.num_classes() << " classes\n";
}

void cmd_vectorize(const std::string& corpus_path, uint32_t min_df, bool normalize,
                   const std::string& out) {
    Corpus corpus = read_corpus(corpus_path);
    Vocabulary vocab = build_vocabulary(corpus, min_df);
    SparseDocTermMatrix matrix = tfidf_matrix(corpus, vocab, normalize);
    save_matrix(matrix, vocab, out);
    std::cerr << "vectorized: " << matrix.num_docs << " docs x " << matrix.num_features
              << " features, " << matrix.nnz() << " entries\n";
}

void cmd_score(const std::string& matrix_path, const std::string& corpus_path,
               const std::string& out) {
    Corpus corpus = read_corpus(corpus_path);
    auto [matrix, vocab] = read_matrix(matrix_path);
    FeatureScoreTable table = score_features(corpus, vocab, matrix);
    save_scores(table, out);
    std::cerr << "scored " << table.size() << " features\n";
}

struct SelectArgs {
    std::string scores, corpus, out, embeddings;
    uint32_t k = 20, dim = 16, epochs = 5;
    double lr = 0.1, dev_fraction = 0.0;
    uint64_t seed = 0;
    bool seed_given = false;
};

void cmd_select(const SelectArgs& a) {
    Corpus corpus = read_corpus(a.corpus);
    FeatureScoreTable table = read_scores(a.scores);
    const uint64_t seed = a.seed_given ? a.seed : default_seed();

    Vocabulary vocab;
    for (const std::string& t : table.terms) {
        vocab.index.emplace(t, static_cast<uint32_t>(vocab.terms.size()));
        vocab.terms.push_back(t);
    }

    EmbeddingTable base = a.embeddings.empty()
                              ? init_random_embeddings(vocab, a.dim, derive_seed(seed, 2))
                              : load_embeddings(a.embeddings);
    if (!a.embeddings.empty()) ensure_coverage(base, vocab.terms, derive_seed(seed, 2));

    SubsetSearchSetup setup;
    setup.k = a.k;
    setup.dev_fraction = a.dev_fraction;
    setup.classifier.learning_rate = a.lr;
    setup.classifier.epochs = a.epochs;
    setup.seed = seed;
    FeatureSelection selection = run_subset_search(corpus, vocab, table, base, setup);
    save_selection(selection, table, a.out);
    std::cerr << "selected " << selection.selected.size() << " of " << table.size()
              << " features (best prefix " << selection.best_prefix << "/" << selection.k << ")\n";
}

void cmd_transform(int method, const std::string& selection_path, const std::string& corpus_path,
                   const std::string& out, const std::string& report_path) {
    Corpus corpus = read_corpus(corpus_path);
    StoredSelection stored = read_selection(selection_path);
    std::unordered_set<std::string> selected(stored.selected_terms.begin(),
                                             stored.selected_terms.end());
    Corpus transformed;
    TransformReport report;
    if (method == 1) {
        std::tie(transformed, report) = rewrite_selected(corpus, selected);
    } else if (method == 2) {
        auto tagger = default_tagger();
        std::tie(transformed, report) = mask_low_rank(corpus, selected, *tagger);
    } else {
        throw ValidationError("--method must be 1 or 2");
    }
    save_corpus(transformed, out);
    if (!report_path.empty()) {
        write_json_atomic(json{{"version", kFormatVersion},
                               {"method", report.method},
                               {"vocab_before", report.vocab_before},
                               {"vocab_after", report.vocab_after},
                               {"mask_tags_added", report.mask_tags_added},
                               {"tokens_removed_or_masked", report.tokens_removed_or_masked}},
                          report_path);
    }
    std::cerr << "method " << method << ": vocab " << report.vocab_before << " -> "
              << report.vocab_after << "\n";
}

struct TrainArgs {
    std::string corpus, out, embeddings, scores, selection;
    uint32_t dim = 16, epochs = 5;
    double lr = 0.1, init_scale = 0.0;
    uint64_t seed = 0;
    bool seed_given = false;
    bool freeze = false;
    std::string meta;  // "", "scores", "zeros"
};

void cmd_train(const TrainArgs& a) {
    Corpus corpus = read_corpus(a.corpus);
    const uint64_t seed = a.seed_given ? a.seed : default_seed();

    Vocabulary vocab = build_vocabulary(corpus, 1);
    EmbeddingTable table;
    if (a.embeddings.empty()) {
        table = init_random_embeddings(vocab, a.dim, derive_seed(seed, 2), a.init_scale);
    } else {
        table = load_embeddings(a.embeddings);
        ensure_coverage(table, vocab.terms, derive_seed(seed, 2), a.init_scale);
    }

    if (a.meta == "zeros") {
        table = augment_meta_zeros(table);
    } else if (a.meta == "scores") {
        if (a.scores.empty() || a.selection.empty())
            throw ValidationError("--meta scores needs --scores and --selection");
        FeatureScoreTable scores = read_scores(a.scores);
        StoredSelection stored = read_selection(a.selection);
        FeatureSelection sel = stored.selection;
        sel.selected.clear();
        std::unordered_map<std::string, uint32_t> term_idx;
        for (uint32_t i = 0; i < scores.size(); ++i) term_idx.emplace(scores.terms[i], i);
        for (const std::string& t : stored.selected_terms) {
            auto it = term_idx.find(t);
            if (it != term_idx.end()) sel.selected.push_back(it->second);
        }
        table = augment_meta(table, scores, sel);
    } else if (!a.meta.empty()) {
        throw ValidationError("--meta must be 'scores' or 'zeros'");
    }

    TrainConfig cfg;
    cfg.learning_rate = a.lr;
    cfg.epochs = a.epochs;
    cfg.seed = seed;
    cfg.freeze_embeddings = a.freeze;
    cfg.init_scale = a.init_scale;
    TrainStats stats;
    Model model = train(corpus, std::move(table), cfg, &stats);
    save_model(model, a.out);
    std::cerr << "trained " << model.num_classes << "-class model, dim "
              << model.embeddings.dim << ", " << stats.wall_seconds << "s\n";
}

void cmd_predict(const std::string& model_path, const std::string& input) {
    Model model = read_model(model_path);
    std::ifstream in(input);
    if (!in) throw IoError("cannot open input file: " + input);
    TokenizerConfig tok;
    std::string line;
    while (std::getline(in, line)) {
        auto tokens = tokenize(line, tok);
        auto [label, probs] = predict(model, tokens);
        std::cout << model.label_names.at(label) << '\t' << probs[label] << '\n';
    }
}

void cmd_eval(const std::string& model_path, const std::string& corpus_path) {
    Model model = read_model(model_path);
    Corpus corpus = read_corpus(corpus_path);
    std::cout << accuracy(model, corpus) << '\n';
}

struct SynthArgs {
    uint32_t classes = 4, per_class = 200, predictive = 50, noise = 2000, len = 30;
    double emission = 0.3;
    uint64_t seed = 7;
    bool seed_given = false;
    std::string out, plant;
};

void cmd_synth(const SynthArgs& a) {
    SyntheticSpec spec;
    spec.num_classes = a.classes;
    spec.docs_per_class = a.per_class;
    spec.predictive_per_class = a.predictive;
    spec.noise_tokens = a.noise;
    spec.doc_len = a.len;
    spec.emission_prob = a.emission;
    spec.seed = a.seed_given ? a.seed : (std::getenv("RELEVANCY_SEED") ? default_seed() : a.seed);
    SyntheticCorpus synth = generate_synthetic(spec);
    write_corpus_tsv(synth.corpus, a.out);
    if (!a.plant.empty())
        write_json_atomic(json{{"version", kFormatVersion}, {"planted", synth.planted}}, a.plant);
    std::cerr << "generated " << synth.corpus.documents.size() << " documents, "
              << synth.planted.size() << " planted tokens\n";
}

void cmd_experiment(const std::string& config_path, const std::string& out,
                    const std::string& format) {
    ExperimentConfig config = parse_experiment_config(config_path);
    if (!config.master_seed_from_config && std::getenv("RELEVANCY_SEED")) {
        config.master_seed = default_seed();
        if (config.synthetic) config.synthetic->seed = config.master_seed;
    }
    ExperimentReport report = run_experiment(config);
    write_json_atomic(report_to_json(report), out);
    if (!format.empty())
        std::cout << compare_report(report, parse_report_format(format));
    std::cerr << "experiment complete: " << report.methods.size() << " methods x "
              << config.repeats << " runs\n";
}

void cmd_report(const std::string& report_path, const std::string& format) {
    ExperimentReport report = report_from_json(read_json(report_path));
    std::cout << compare_report(report, parse_report_format(format));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feature relevancy scoring, subset search and classification toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Print help for every subcommand");

    // ingest
    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Load and tokenize a labeled text corpus");
    c_ingest->add_option("--input", ingest.input, "Input file")->required();
    c_ingest->add_option("--format", ingest.format, "Input format: tsv | jsonl")
        ->check(CLI::IsMember({"tsv", "jsonl"}));
    c_ingest->add_flag("--lowercase", ingest.lowercase, "Lowercase all tokens");
    c_ingest->add_flag("--strip-punct", ingest.strip_punct, "Strip punctuation characters");
    double ingest_fraction = -1.0;
    c_ingest->add_option("--test-fraction", ingest_fraction,
                         "Stratified test fraction (omit to keep existing tags)");
    auto* ingest_seed = c_ingest->add_option("--seed", ingest.seed, "Split seed");
    c_ingest->add_option("--out", ingest.out, "Output corpus.bin")->required();
    c_ingest->callback([&] {
        if (ingest_fraction >= 0.0) ingest.test_fraction = ingest_fraction;
        ingest.seed_given = ingest_seed->count() > 0;
        cmd_ingest(ingest);
    });

    // vectorize
    std::string vec_corpus, vec_out;
    uint32_t vec_min_df = 1;
    bool vec_no_normalize = false;
    auto* c_vec = app.add_subcommand("vectorize", "Build vocabulary and TF-IDF matrix");
    c_vec->add_option("--corpus", vec_corpus, "corpus.bin")->required();
    c_vec->add_option("--min-df", vec_min_df, "Minimum document frequency");
    c_vec->add_flag("--no-normalize", vec_no_normalize, "Skip L2 row normalization");
    c_vec->add_option("--out", vec_out, "Output matrix.bin")->required();
    c_vec->callback([&] { cmd_vectorize(vec_corpus, vec_min_df, !vec_no_normalize, vec_out); });

    // score
    std::string score_matrix, score_corpus, score_out;
    auto* c_score = app.add_subcommand("score", "Compute filter scores and relevancy");
    c_score->add_option("--matrix", score_matrix, "matrix.bin")->required();
    c_score->add_option("--corpus", score_corpus, "corpus.bin")->required();
    c_score->add_option("--out", score_out, "Output scores.json")->required();
    c_score->callback([&] { cmd_score(score_matrix, score_corpus, score_out); });

    // select
    SelectArgs sel;
    auto* c_sel = app.add_subcommand("select", "Cumulative subset search over ranked features");
    c_sel->add_option("--scores", sel.scores, "scores.json")->required();
    c_sel->add_option("--corpus", sel.corpus, "corpus.bin")->required();
    c_sel->add_option("--k", sel.k, "Number of rank partitions");
    c_sel->add_option("--dim", sel.dim, "Random embedding dimensionality");
    c_sel->add_option("--embeddings", sel.embeddings, "Pretrained .vec file");
    c_sel->add_option("--lr", sel.lr, "Evaluator learning rate");
    c_sel->add_option("--epochs", sel.epochs, "Evaluator epochs");
    c_sel->add_option("--dev-fraction", sel.dev_fraction,
                      "Evaluate on a validation carve of the training split");
    auto* sel_seed = c_sel->add_option("--seed", sel.seed, "Evaluator seed");
    c_sel->add_option("--out", sel.out, "Output selection.json")->required();
    c_sel->callback([&] {
        sel.seed_given = sel_seed->count() > 0;
        cmd_select(sel);
    });

    // transform
    int tr_method = 0;
    std::string tr_selection, tr_corpus, tr_out, tr_report;
    auto* c_tr = app.add_subcommand("transform", "Rewrite (method 1) or mask (method 2) a corpus");
    c_tr->add_option("--method", tr_method, "1 = keep selected, 2 = mask unselected")
        ->required()
        ->check(CLI::Range(1, 2));
    c_tr->add_option("--selection", tr_selection, "selection.json")->required();
    c_tr->add_option("--corpus", tr_corpus, "corpus.bin")->required();
    c_tr->add_option("--out", tr_out, "Output corpus.bin")->required();
    c_tr->add_option("--report", tr_report, "Optional transform report JSON");
    c_tr->callback([&] { cmd_transform(tr_method, tr_selection, tr_corpus, tr_out, tr_report); });

    // train
    TrainArgs tra;
    auto* c_train = app.add_subcommand("train", "Train the averaged-embedding linear classifier");
    c_train->add_option("--corpus", tra.corpus, "corpus.bin")->required();
    c_train->add_option("--embeddings", tra.embeddings, "Pretrained .vec file");
    c_train->add_option("--dim", tra.dim, "Random embedding dimensionality");
    c_train->add_option("--lr", tra.lr, "Initial learning rate");
    c_train->add_option("--epochs", tra.epochs, "Training epochs");
    c_train->add_flag("--freeze", tra.freeze, "Freeze embeddings during training");
    c_train->add_option("--init-scale", tra.init_scale, "Random init scale (0 = 1/dim)");
    c_train->add_option("--meta", tra.meta, "Meta slots: scores | zeros");
    c_train->add_option("--scores", tra.scores, "scores.json for --meta scores");
    c_train->add_option("--selection", tra.selection, "selection.json for --meta scores");
    auto* tr_seed = c_train->add_option("--seed", tra.seed, "Training seed");
    c_train->add_option("--out", tra.out, "Output model.bin")->required();
    c_train->callback([&] {
        tra.seed_given = tr_seed->count() > 0;
        cmd_train(tra);
    });

    // predict
    std::string pr_model, pr_input;
    auto* c_pred = app.add_subcommand("predict", "Predict labels for one document per line");
    c_pred->add_option("--model", pr_model, "model.bin")->required();
    c_pred->add_option("--input", pr_input, "Text file, one document per line")->required();
    c_pred->callback([&] { cmd_predict(pr_model, pr_input); });

    // eval
    std::string ev_model, ev_corpus;
    auto* c_eval = app.add_subcommand("eval", "Accuracy of a model on a corpus test split");
    c_eval->add_option("--model", ev_model, "model.bin")->required();
    c_eval->add_option("--corpus", ev_corpus, "corpus.bin")->required();
    c_eval->callback([&] { cmd_eval(ev_model, ev_corpus); });

    // synth
    SynthArgs sy;
    auto* c_synth = app.add_subcommand("synth", "Generate a planted-feature synthetic corpus");
    c_synth->add_option("--classes", sy.classes, "Number of classes");
    c_synth->add_option("--per-class", sy.per_class, "Documents per class");
    c_synth->add_option("--predictive", sy.predictive, "Predictive tokens per class");
    c_synth->add_option("--noise", sy.noise, "Shared noise tokens");
    c_synth->add_option("--len", sy.len, "Tokens per document");
    c_synth->add_option("--emission", sy.emission, "Predictive emission probability");
    auto* sy_seed = c_synth->add_option("--seed", sy.seed, "Generator seed");
    c_synth->add_option("--out", sy.out, "Output TSV corpus")->required();
    c_synth->add_option("--plant", sy.plant, "Optional planted-token JSON");
    c_synth->callback([&] {
        sy.seed_given = sy_seed->count() > 0;
        cmd_synth(sy);
    });

    // experiment
    std::string exp_config, exp_out, exp_format;
    auto* c_exp = app.add_subcommand("experiment", "Run baselines and methods end to end");
    c_exp->add_option("--config", exp_config, "Flat key = value config file")->required();
    c_exp->add_option("--out", exp_out, "Output report JSON")->required();
    c_exp->add_option("--print", exp_format, "Also print the table: json | tsv | markdown");
    c_exp->callback([&] { cmd_experiment(exp_config, exp_out, exp_format); });

    // report
    std::string rep_path, rep_format = "markdown";
    auto* c_rep = app.add_subcommand("report", "Render a report JSON as a table");
    c_rep->add_option("--report", rep_path, "report.json")->required();
    c_rep->add_option("--format", rep_format, "json | tsv | markdown");
    c_rep->callback([&] { cmd_report(rep_path, rep_format); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const relevancy::ExperimentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cerr << "partial report:\n" << e.partial_report.dump(2) << "\n";
        return e.io_failure ? 2 : 1;
    } catch (const relevancy::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const relevancy::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
