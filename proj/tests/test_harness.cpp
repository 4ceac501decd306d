#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "relevancy/errors.hpp"
#include "relevancy/filters.hpp"
#include "relevancy/harness.hpp"
#include "relevancy/rng.hpp"
#include "relevancy/select.hpp"
#include "relevancy/synthetic.hpp"
#include "relevancy/vectorize.hpp"
#include "test_support.hpp"

using namespace relevancy;

namespace {

SyntheticSpec small_spec() {
    SyntheticSpec spec;
    spec.num_classes = 3;
    spec.docs_per_class = 30;
    spec.predictive_per_class = 8;
    spec.noise_tokens = 60;
    spec.doc_len = 12;
    spec.emission_prob = 0.5;
    spec.seed = 21;
    return spec;
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.synthetic = small_spec();
    cfg.repeats = 2;
    cfg.k = 5;
    cfg.embedding_dim = 8;
    cfg.classifier.epochs = 3;
    cfg.master_seed = 21;
    return cfg;
}

}  // namespace

TEST_CASE("generate_synthetic honors its boundary probabilities") {
    SyntheticSpec spec = small_spec();
    spec.emission_prob = 1.0;
    SyntheticCorpus all_predictive = generate_synthetic(spec);
    std::set<std::string> planted(all_predictive.planted.begin(), all_predictive.planted.end());
    for (const Document& d : all_predictive.corpus.documents)
        for (const std::string& t : d.tokens) CHECK(planted.count(t) == 1);

    spec.emission_prob = 0.0;
    SyntheticCorpus all_noise = generate_synthetic(spec);
    for (const Document& d : all_noise.corpus.documents)
        for (const std::string& t : d.tokens) CHECK(planted.count(t) == 0);
}

TEST_CASE("generate_synthetic is deterministic and validates the spec") {
    SyntheticCorpus a = generate_synthetic(small_spec());
    SyntheticCorpus b = generate_synthetic(small_spec());
    REQUIRE(a.corpus.documents.size() == b.corpus.documents.size());
    for (size_t i = 0; i < a.corpus.documents.size(); ++i)
        CHECK(a.corpus.documents[i].tokens == b.corpus.documents[i].tokens);

    SyntheticSpec bad = small_spec();
    bad.num_classes = 1;
    CHECK_THROWS_AS(generate_synthetic(bad), ValidationError);
    bad = small_spec();
    bad.doc_len = 1;
    CHECK_THROWS_AS(generate_synthetic(bad), ValidationError);
}

TEST_CASE("planted tokens are disjoint across classes") {
    SyntheticCorpus s = generate_synthetic(small_spec());
    std::set<std::string> unique(s.planted.begin(), s.planted.end());
    CHECK(unique.size() == s.planted.size());
    CHECK(s.planted.size() == 3u * 8u);
}

TEST_CASE("run_experiment produces a deterministic report modulo timing") {
    ExperimentConfig cfg = small_config();
    cfg.methods = {Method::Baseline1, Method::Method1};

    ExperimentReport r1 = run_experiment(cfg);
    ExperimentReport r2 = run_experiment(cfg);

    auto strip = [](ExperimentReport& r) {
        for (auto& m : r.methods) {
            m.train_seconds_mean = 0.0;
            for (auto& run : m.runs) run.train_seconds = 0.0;
        }
    };
    strip(r1);
    strip(r2);
    CHECK(report_to_json(r1) == report_to_json(r2));
}

TEST_CASE("report means recompute bitwise from the run log") {
    ExperimentConfig cfg = small_config();
    cfg.methods = {Method::Baseline1};
    cfg.repeats = 4;
    ExperimentReport r = run_experiment(cfg);
    REQUIRE(r.methods.size() == 1);
    const MethodResult& m = r.methods[0];
    REQUIRE(m.runs.size() == 4);
    double acc = 0.0, secs = 0.0;
    for (const MethodRun& run : m.runs) {
        acc += run.accuracy;
        secs += run.train_seconds;
    }
    CHECK(m.accuracy_mean == acc / 4.0);
    CHECK(m.train_seconds_mean == secs / 4.0);
}

TEST_CASE("method3 text is identical to baseline1 and only embeddings differ") {
    ExperimentConfig cfg = small_config();
    cfg.methods = {Method::Baseline1, Method::Baseline2, Method::Method3};
    ExperimentReport r = run_experiment(cfg);
    REQUIRE(r.methods.size() == 3);
    CHECK(r.methods[0].vocab_size == r.methods[2].vocab_size);
    CHECK(r.methods[1].vocab_size == r.methods[0].vocab_size);
    CHECK_FALSE(r.methods[2].transform.has_value());
}

TEST_CASE("method2 reports mask accounting through the harness") {
    ExperimentConfig cfg = small_config();
    cfg.methods = {Method::Method1, Method::Method2};
    cfg.repeats = 1;
    ExperimentReport r = run_experiment(cfg);
    REQUIRE(r.methods.size() == 2);
    REQUIRE(r.methods[0].transform.has_value());
    REQUIRE(r.methods[1].transform.has_value());
    const TransformReport& m1 = *r.methods[0].transform;
    const TransformReport& m2 = *r.methods[1].transform;
    CHECK(m1.mask_tags_added == 0);
    CHECK(m2.vocab_after - m1.vocab_after == m2.mask_tags_added);
    CHECK(m2.mask_tags_added > 0);
    CHECK(r.methods[1].vocab_size == m2.vocab_after);
}

TEST_CASE("experiment runs from a partial pretrained vec file") {
    // tokens missing from the table get random rows; the run must complete
    // and stay deterministic.
    SyntheticCorpus s = generate_synthetic(small_spec());
    auto dir = std::filesystem::temp_directory_path();
    auto vec_path = (dir / "partial.vec").string();
    {
        std::ofstream out(vec_path, std::ios::trunc);
        out << "2 6\n";
        out << s.planted[0] << " 1 0 0 0 0 0\n";
        out << s.planted[1] << " 0 1 0 0 0 0\n";
    }
    ExperimentConfig cfg = small_config();
    cfg.methods = {Method::Baseline1, Method::Method3};
    cfg.repeats = 1;
    cfg.embeddings_path = vec_path;
    ExperimentReport r1 = run_experiment(cfg);
    ExperimentReport r2 = run_experiment(cfg);
    REQUIRE(r1.methods.size() == 2);
    CHECK(r1.methods[0].accuracy_mean == r2.methods[0].accuracy_mean);
    CHECK(r1.methods[1].accuracy_mean == r2.methods[1].accuracy_mean);
    std::filesystem::remove(vec_path);
}

TEST_CASE("scores and ranking ignore test-split documents entirely") {
    // shuffle test labels -> identical score table and ranking
    SyntheticCorpus s = generate_synthetic(small_spec());
    Corpus corpus = split_corpus(s.corpus, 0.25, 5);

    Corpus shuffled = corpus;
    Rng rng(8);
    for (Document& d : shuffled.documents)
        if (d.split == Split::Test)
            d.label = static_cast<uint32_t>(rng.next_below(shuffled.num_classes()));

    Vocabulary v1 = build_vocabulary(corpus, 1);
    Vocabulary v2 = build_vocabulary(shuffled, 1);
    CHECK(v1.terms == v2.terms);

    FeatureScoreTable t1 = score_features(corpus, v1, tfidf_matrix(corpus, v1, true));
    FeatureScoreTable t2 = score_features(shuffled, v2, tfidf_matrix(shuffled, v2, true));
    CHECK(t1.chi2 == t2.chi2);
    CHECK(t1.anova_f == t2.anova_f);
    CHECK(t1.mi == t2.mi);
    CHECK(t1.relevancy == t2.relevancy);
    CHECK(rank_features(t1) == rank_features(t2));
}

TEST_CASE("subset search never reads test labels") {
    // The full selection, not just the scores, must survive shuffling the
    // test labels, in both cross-validation and dev-carve mode.
    SyntheticCorpus s = generate_synthetic(small_spec());
    Corpus corpus = split_corpus(s.corpus, 0.25, 5);

    Corpus shuffled = corpus;
    Rng rng(9);
    for (Document& d : shuffled.documents)
        if (d.split == Split::Test)
            d.label = static_cast<uint32_t>(rng.next_below(shuffled.num_classes()));

    for (double dev_fraction : {0.0, 0.25}) {
        auto run_selection = [&](const Corpus& c) {
            Vocabulary vocab = build_vocabulary(c, 1);
            FeatureScoreTable scores = score_features(c, vocab, tfidf_matrix(c, vocab, true));
            EmbeddingTable table = init_random_embeddings(vocab, 8, 33);
            SubsetSearchSetup setup;
            setup.k = 4;
            setup.dev_fraction = dev_fraction;
            setup.classifier.epochs = 2;
            setup.seed = 55;
            return run_subset_search(c, vocab, scores, table, setup);
        };
        FeatureSelection a = run_selection(corpus);
        FeatureSelection b = run_selection(shuffled);
        CHECK(a.trace == b.trace);
        CHECK(a.best_prefix == b.best_prefix);
        CHECK(a.selected == b.selected);
    }
}

TEST_CASE("experiment validates corpus sources") {
    ExperimentConfig cfg;
    cfg.corpus_path = "/nonexistent/corpus.tsv";
    cfg.methods = {Method::Baseline1};
    CHECK_THROWS_AS(run_experiment(cfg), ExperimentError);
    try {
        run_experiment(cfg);
    } catch (const ExperimentError& e) {
        CHECK(e.io_failure);
        CHECK(std::string(e.what()).find("load") != std::string::npos);
        CHECK(e.partial_report.contains("config"));
    }
}

TEST_CASE("config file parsing covers the full key set") {
    auto path = (std::filesystem::temp_directory_path() / "exp_cfg.toml").string();
    {
        std::ofstream out(path, std::ios::trunc);
        out << "# comment line\n"
               "synthetic = true\n"
               "synth_classes = 3\n"
               "synth_docs_per_class = 30\n"
               "synth_predictive = 8\n"
               "synth_noise = 60\n"
               "synth_doc_len = 12\n"
               "synth_emission = 0.5\n"
               "methods = baseline1, method1\n"
               "repeats = 2\n"
               "k = 5\n"
               "dim = 8\n"
               "lr = 0.2\n"
               "epochs = 3\n"
               "seed = 21\n"
               "test_fraction = 0.25\n";
    }
    ExperimentConfig cfg = parse_experiment_config(path);
    CHECK(cfg.synthetic.has_value());
    CHECK(cfg.synthetic->num_classes == 3);
    CHECK(cfg.synthetic->seed == 21);
    CHECK(cfg.methods == std::vector<Method>{Method::Baseline1, Method::Method1});
    CHECK(cfg.repeats == 2);
    CHECK(cfg.k == 5);
    CHECK(cfg.classifier.learning_rate == 0.2);
    CHECK(*cfg.test_fraction == 0.25);
    std::filesystem::remove(path);

    auto bad = (std::filesystem::temp_directory_path() / "exp_bad.toml").string();
    {
        std::ofstream out(bad, std::ios::trunc);
        out << "unknown_key = 1\n";
    }
    CHECK_THROWS_AS(parse_experiment_config(bad), ValidationError);
    std::filesystem::remove(bad);
}

TEST_CASE("compare_report renders the stable column order") {
    ExperimentConfig cfg = small_config();
    cfg.methods = {Method::Baseline1, Method::Method1};
    cfg.repeats = 1;
    ExperimentReport r = run_experiment(cfg);

    std::string md = compare_report(r, ReportFormat::Markdown);
    CHECK(md.find("| method | accuracy | train_seconds | vocab | ratio |") != std::string::npos);
    CHECK(std::count(md.begin(), md.end(), '\n') == 4);  // header + rule + 2 rows

    std::string tsv = compare_report(r, ReportFormat::Tsv);
    CHECK(tsv.rfind("method\taccuracy\ttrain_seconds\tvocab\tratio\n", 0) == 0);

    // json -> load -> render is idempotent
    nlohmann::json j = report_to_json(r);
    ExperimentReport back = report_from_json(j);
    CHECK(report_to_json(back) == j);
    CHECK(compare_report(back, ReportFormat::Markdown) == md);
}

TEST_CASE("empty method list renders a header-only table") {
    ExperimentReport r;
    r.train_vocab_size = 0;
    std::string tsv = compare_report(r, ReportFormat::Tsv);
    CHECK(tsv == "method\taccuracy\ttrain_seconds\tvocab\tratio\n");
}
