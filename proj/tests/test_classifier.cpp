#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "relevancy/classifier.hpp"
#include "relevancy/errors.hpp"
#include "relevancy/serialize.hpp"
#include "test_support.hpp"

using namespace relevancy;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path, std::ios::trunc);
    out << content;
    return path;
}

Vocabulary vocab_of(std::vector<std::string> terms) {
    Vocabulary v;
    for (auto& t : terms) {
        v.index.emplace(t, static_cast<uint32_t>(v.terms.size()));
        v.terms.push_back(std::move(t));
    }
    return v;
}

// Random model for gradient checking, optionally meta-augmented.
Model random_model(Rng& rng, uint32_t num_tokens, uint32_t dim, uint32_t num_classes, bool meta) {
    Model m;
    m.num_classes = num_classes;
    m.embeddings.dim = dim;
    m.embeddings.meta = meta;
    for (uint32_t t = 0; t < num_tokens; ++t) {
        uint32_t id = m.embeddings.add("tok" + std::to_string(t));
        for (double& x : m.embeddings.vec(id)) x = rng.next_symmetric(0.8);
    }
    m.weights.resize(size_t(num_classes) * dim);
    m.bias.resize(num_classes);
    for (double& w : m.weights) w = rng.next_symmetric(0.5);
    for (double& b : m.bias) b = rng.next_symmetric(0.5);
    for (uint32_t c = 0; c < num_classes; ++c) m.label_names.push_back("c" + std::to_string(c));
    return m;
}

std::vector<Document> random_docs(Rng& rng, uint32_t num_tokens, uint32_t num_classes,
                                  uint32_t count) {
    std::vector<Document> docs(count);
    for (uint32_t i = 0; i < count; ++i) {
        docs[i].id = i;
        docs[i].label = static_cast<uint32_t>(rng.next_below(num_classes));
        uint32_t len = 1 + static_cast<uint32_t>(rng.next_below(6));
        for (uint32_t j = 0; j < len; ++j)
            docs[i].tokens.push_back("tok" + std::to_string(rng.next_below(num_tokens + 2)));
    }
    return docs;
}

}  // namespace

TEST_CASE("load_embeddings parses the vec format") {
    auto path = write_temp("emb_ok.vec", "2 3\na 1 2 3\nb 0.5 -1.5 2.25\n");
    EmbeddingTable t = load_embeddings(path);
    CHECK(t.dim == 3);
    CHECK(t.count() == 2);
    auto a = t.vec(*t.lookup("a"));
    CHECK(a[0] == 1.0);
    CHECK(a[2] == 3.0);
}

TEST_CASE("load_embeddings rejects ragged rows with the line number") {
    auto path = write_temp("emb_ragged.vec", "2 3\na 1 2 3\nb 1 2\n");
    CHECK_THROWS_WITH_AS(load_embeddings(path), doctest::Contains("line 3"), ValidationError);

    auto longer = write_temp("emb_long.vec", "1 2\na 1 2 3\n");
    CHECK_THROWS_WITH_AS(load_embeddings(longer), doctest::Contains("line 2"), ValidationError);

    auto nonnum = write_temp("emb_nan.vec", "1 2\na 1 x\n");
    CHECK_THROWS_AS(load_embeddings(nonnum), ValidationError);

    CHECK_THROWS_AS(load_embeddings("/nonexistent/none.vec"), IoError);
}

TEST_CASE("load_embeddings duplicate tokens keep the last occurrence") {
    auto path = write_temp("emb_dup.vec", "2 2\na 1 1\na 9 9\n");
    EmbeddingTable t = load_embeddings(path);
    CHECK(t.count() == 1);
    CHECK(t.vec(0)[0] == 9.0);
}

TEST_CASE("init_random_embeddings is deterministic and honors scale") {
    Vocabulary v = vocab_of({"a", "b", "c"});
    EmbeddingTable t1 = init_random_embeddings(v, 8, 42, 0.25);
    EmbeddingTable t2 = init_random_embeddings(v, 8, 42, 0.25);
    CHECK(t1.data == t2.data);
    for (double x : t1.data) CHECK(std::abs(x) <= 0.25);

    EmbeddingTable zero = init_random_embeddings(v, 4, 7, 0.0);
    // scale 0 falls back to 1/dim
    for (double x : zero.data) CHECK(std::abs(x) <= 0.25);
}

TEST_CASE("embed_document averages over occurrences") {
    EmbeddingTable t;
    t.dim = 2;
    uint32_t a = t.add("a");
    uint32_t b = t.add("b");
    t.vec(a)[0] = 1.0;
    t.vec(b)[1] = 1.0;

    std::vector<std::string> aa{"a", "a"};
    auto va = embed_document(aa, t);
    CHECK(va == std::vector<double>{1.0, 0.0});

    std::vector<std::string> ab{"a", "b"};
    CHECK(embed_document(ab, t) == std::vector<double>{0.5, 0.5});

    std::vector<std::string> oov{"zz", "qq"};
    CHECK(embed_document(oov, t) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("augment_meta appends the score slots") {
    FeatureScoreTable scores;
    scores.terms = {"a", "b"};
    scores.chi2_norm = {0.2, 0.9};
    scores.anova_norm = {0.1, 0.8};
    scores.mi_norm = {0.3, 0.7};
    scores.relevancy = {0.6, 2.4};
    scores.selected = {0, 1};
    FeatureSelection sel;
    sel.selected = {1};

    Vocabulary v = vocab_of({"a", "b", "oovtok"});
    EmbeddingTable base = init_random_embeddings(v, 4, 9);
    EmbeddingTable meta = augment_meta(base, scores, sel);

    CHECK(meta.dim == 8);
    CHECK(meta.meta);
    auto a = meta.vec(*meta.lookup("a"));
    CHECK(a[4] == 0.2);
    CHECK(a[5] == 0.1);
    CHECK(a[6] == 0.3);
    CHECK(a[7] == 0.0);
    auto b = meta.vec(*meta.lookup("b"));
    CHECK(b[7] == 1.0);
    auto oov = meta.vec(*meta.lookup("oovtok"));
    for (int i = 4; i < 8; ++i) CHECK(oov[i] == 0.0);

    // leading dims bitwise preserved
    for (uint32_t id = 0; id < base.count(); ++id)
        for (uint32_t i = 0; i < 4; ++i) CHECK(meta.vec(id)[i] == base.vec(id)[i]);

    CHECK_THROWS_AS(augment_meta(meta, scores, sel), ValidationError);

    EmbeddingTable zeros = augment_meta_zeros(base);
    CHECK(zeros.dim == 8);
    for (uint32_t id = 0; id < zeros.count(); ++id)
        for (int i = 4; i < 8; ++i) CHECK(zeros.vec(id)[i] == 0.0);
}

TEST_CASE("separable two-document corpus trains to perfect accuracy") {
    Corpus c = test::make_corpus({{"a", {"left"}}, {"b", {"right"}}});
    Vocabulary v = vocab_of({"left", "right"});
    EmbeddingTable table = init_random_embeddings(v, 4, 3);
    TrainConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.epochs = 50;
    cfg.seed = 1;
    Model m = train(c, table, cfg);

    std::vector<std::string> left{"left"}, right{"right"};
    CHECK(predict(m, left).first == 0);
    CHECK(predict(m, right).first == 1);
}

TEST_CASE("training is bitwise deterministic under a fixed seed") {
    Rng rng(99);
    auto docs = random_docs(rng, 6, 3, 20);
    Corpus c;
    for (uint32_t cl = 0; cl < 3; ++cl) c.intern_label("c" + std::to_string(cl));
    c.documents = docs;
    for (uint32_t cl = 0; cl < 3; ++cl) c.documents[cl].label = cl;  // every class trains

    Vocabulary v = vocab_of({"tok0", "tok1", "tok2", "tok3", "tok4", "tok5", "tok6", "tok7"});
    EmbeddingTable table = init_random_embeddings(v, 6, 5);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.seed = 12345;

    Model m1 = train(c, table, cfg);
    Model m2 = train(c, table, cfg);
    CHECK(m1.weights == m2.weights);
    CHECK(m1.bias == m2.bias);
    CHECK(m1.embeddings.data == m2.embeddings.data);
}

TEST_CASE("per-epoch loss is non-increasing on a separable toy set") {
    std::vector<std::pair<std::string, std::vector<std::string>>> docs;
    for (int i = 0; i < 10; ++i) {
        docs.push_back({"a", {"apple", "fruit"}});
        docs.push_back({"b", {"stone", "rock"}});
    }
    Corpus c = test::make_corpus(docs);
    Vocabulary v = vocab_of({"apple", "fruit", "stone", "rock"});
    EmbeddingTable table = init_random_embeddings(v, 8, 2);
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.seed = 4;
    TrainStats stats;
    train(c, table, cfg, &stats);
    REQUIRE(stats.epoch_losses.size() == 10);
    for (size_t e = 2; e < stats.epoch_losses.size(); ++e)
        CHECK(stats.epoch_losses[e] <= stats.epoch_losses[e - 1] + 1e-9);
    CHECK(stats.wall_seconds >= 0.0);
}

TEST_CASE("freezing embeddings leaves the table bitwise unchanged") {
    Corpus c = test::make_corpus({{"a", {"x", "y"}}, {"b", {"z"}}, {"a", {"x"}}, {"b", {"z", "y"}}});
    Vocabulary v = vocab_of({"x", "y", "z"});
    EmbeddingTable table = init_random_embeddings(v, 5, 8);
    auto original = table.data;

    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.freeze_embeddings = true;
    Model frozen = train(c, table, cfg);
    CHECK(frozen.embeddings.data == original);

    cfg.freeze_embeddings = false;
    Model tuned = train(c, table, cfg);
    CHECK(tuned.embeddings.data != original);
}

TEST_CASE("predict yields a probability distribution and softmax shift invariance") {
    Rng rng(17);
    Model m = random_model(rng, 5, 6, 4, false);

    std::vector<std::string> tokens{"tok0", "tok2", "tok4"};
    auto [label, probs] = predict(m, tokens);
    double sum = 0.0;
    for (double p : probs) {
        CHECK(p >= 0.0);
        sum += p;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);

    // adding a constant to every logit (via bias) keeps the argmax
    for (double& b : m.bias) b += 3.7;
    CHECK(predict(m, tokens).first == label);

    // zero document vector -> softmax of the bias
    std::vector<std::string> oov{"unseen"};
    auto [_, p0] = predict(m, oov);
    std::vector<double> expect(m.bias);
    double mx = *std::max_element(expect.begin(), expect.end());
    double z = 0.0;
    for (double& e : expect) {
        e = std::exp(e - mx);
        z += e;
    }
    for (size_t i = 0; i < expect.size(); ++i) CHECK(std::abs(p0[i] - expect[i] / z) < 1e-12);
}

TEST_CASE("predict breaks exact ties toward the smallest label id") {
    Model m;
    m.num_classes = 3;
    m.embeddings.dim = 2;
    m.embeddings.add("x");
    m.weights.assign(6, 0.0);
    m.bias.assign(3, 0.0);  // all logits equal
    m.label_names = {"a", "b", "c"};
    std::vector<std::string> tokens{"x"};
    CHECK(predict(m, tokens).first == 0);
}

TEST_CASE("a constant predictor scores 1/C on balanced data") {
    Corpus c = test::make_corpus(
        {{"a", {"p"}}, {"b", {"q"}}, {"c", {"r"}}, {"a", {"p"}}, {"b", {"q"}}, {"c", {"r"}}}, 3);
    Model m;
    m.num_classes = 3;
    m.embeddings.dim = 2;
    m.weights.assign(6, 0.0);
    m.bias = {5.0, 0.0, 0.0};  // always predicts class 0
    m.label_names = c.label_names;
    CHECK(accuracy(m, c) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("accuracy counts correct test predictions") {
    Corpus c = test::make_corpus({{"a", {"x"}}, {"b", {"y"}}, {"a", {"x"}}, {"b", {"y"}}}, 2);
    Vocabulary v = vocab_of({"x", "y"});
    EmbeddingTable table = init_random_embeddings(v, 4, 6);
    TrainConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.epochs = 30;
    Model m = train(c, table, cfg);
    CHECK(accuracy(m, c) == 1.0);

    Corpus no_test = test::make_corpus({{"a", {"x"}}, {"b", {"y"}}});
    CHECK_THROWS_AS(accuracy(m, no_test), ValidationError);
}

TEST_CASE("train validates its inputs") {
    Corpus c = test::make_corpus({{"a", {"x"}}, {"b", {"y"}}});
    Vocabulary v = vocab_of({"x", "y"});
    EmbeddingTable table = init_random_embeddings(v, 4, 6);

    TrainConfig bad;
    bad.epochs = 0;
    CHECK_THROWS_AS(train(c, table, bad), ValidationError);

    Corpus missing_class = test::make_corpus({{"a", {"x"}}, {"b", {"y"}}}, 1);
    // class b only has the test doc
    TrainConfig cfg;
    CHECK_THROWS_AS(train(missing_class, table, cfg), ValidationError);
}

TEST_CASE("analytic gradients match central finite differences") {
    // 20 random instances including meta-augmented tables; every parameter
    // block is perturbed: W, b and unfrozen embedding entries.
    Rng rng(20250101);
    const double eps = 1e-4;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const bool meta = trial % 2 == 1;
        const uint32_t base_dim = 3 + static_cast<uint32_t>(rng.next_below(3));
        const uint32_t dim = meta ? base_dim + 4 : base_dim;
        const uint32_t classes = 2 + static_cast<uint32_t>(rng.next_below(3));
        const uint32_t tokens = 4 + static_cast<uint32_t>(rng.next_below(4));
        Model m = random_model(rng, tokens, dim, classes, meta);
        auto docs = random_docs(rng, tokens, classes, 3 + static_cast<uint32_t>(rng.next_below(4)));

        Gradients g;
        batch_loss(m, docs, &g);

        auto check_block = [&](std::vector<double>& params, const std::vector<double>& grad) {
            for (size_t i = 0; i < params.size(); ++i) {
                const double saved = params[i];
                params[i] = saved + eps;
                const double up = batch_loss(m, docs);
                params[i] = saved - eps;
                const double down = batch_loss(m, docs);
                params[i] = saved;
                const double numeric = (up - down) / (2.0 * eps);
                const double denom = std::max({std::abs(numeric), std::abs(grad[i]), 1e-8});
                worst = std::max(worst, std::abs(numeric - grad[i]) / denom);
            }
        };
        check_block(m.weights, g.weights);
        check_block(m.bias, g.bias);
        check_block(m.embeddings.data, g.embeddings);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("non-finite loss aborts with epoch and step") {
    Corpus c = test::make_corpus({{"a", {"x"}}, {"b", {"y"}}});
    Vocabulary v = vocab_of({"x", "y"});
    EmbeddingTable table = init_random_embeddings(v, 2, 1);
    table.data[0] = 1e308;
    table.data[2] = 1e308;
    TrainConfig cfg;
    cfg.learning_rate = 1e306;
    cfg.epochs = 3;
    CHECK_THROWS_WITH_AS(train(c, table, cfg), doctest::Contains("epoch"), ValidationError);
}

TEST_CASE("model round-trips through the binary format") {
    Corpus c = test::make_corpus({{"a", {"x", "y"}}, {"b", {"z"}}});
    Vocabulary v = vocab_of({"x", "y", "z"});
    EmbeddingTable table = init_random_embeddings(v, 4, 8);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.seed = 77;
    Model m = train(c, table, cfg);

    auto path = (std::filesystem::temp_directory_path() / "model_rt.bin").string();
    save_model(m, path);
    Model r = read_model(path);
    CHECK(r.num_classes == m.num_classes);
    CHECK(r.weights == m.weights);
    CHECK(r.bias == m.bias);
    CHECK(r.embeddings.data == m.embeddings.data);
    CHECK(r.embeddings.tokens == m.embeddings.tokens);
    CHECK(r.label_names == m.label_names);
    CHECK(r.config.epochs == m.config.epochs);
    std::filesystem::remove(path);
}
