#include <doctest.h>

#include <numeric>
#include <set>

#include "relevancy/errors.hpp"
#include "relevancy/select.hpp"
#include "test_support.hpp"

using namespace relevancy;

namespace {

FeatureScoreTable table_with_relevancy(std::vector<double> rel) {
    FeatureScoreTable t;
    for (size_t i = 0; i < rel.size(); ++i) t.terms.push_back("t" + std::to_string(i));
    t.chi2_norm.assign(rel.size(), 0.0);
    t.anova_norm.assign(rel.size(), 0.0);
    t.mi_norm = rel;
    t.relevancy = std::move(rel);
    t.selected.assign(t.terms.size(), 0);
    return t;
}

}  // namespace

TEST_CASE("rank_features sorts descending with ascending-id ties") {
    auto t = table_with_relevancy({0.1, 0.9, 0.5});
    CHECK(rank_features(t) == std::vector<uint32_t>{1, 2, 0});

    auto equal = table_with_relevancy({0.3, 0.3, 0.3, 0.3});
    CHECK(rank_features(equal) == std::vector<uint32_t>{0, 1, 2, 3});
}

TEST_CASE("rank order is invariant to a constant shift") {
    auto t = table_with_relevancy({0.2, 0.8, 0.5, 0.1});
    auto order = rank_features(t);
    for (double& r : t.relevancy) r += 10.0;
    CHECK(rank_features(t) == order);
}

TEST_CASE("partition_ranked distributes the remainder to the first slices") {
    auto p = partition_ranked(10, 3);
    REQUIRE(p.size() == 3);
    CHECK(p[0] == std::pair<size_t, size_t>{0, 4});
    CHECK(p[1] == std::pair<size_t, size_t>{4, 7});
    CHECK(p[2] == std::pair<size_t, size_t>{7, 10});

    auto singletons = partition_ranked(20, 20);
    for (size_t i = 0; i < 20; ++i)
        CHECK(singletons[i] == std::pair<size_t, size_t>{i, i + 1});

    auto whole = partition_ranked(7, 1);
    CHECK(whole[0] == std::pair<size_t, size_t>{0, 7});

    CHECK_THROWS_AS(partition_ranked(3, 4), ValidationError);
    CHECK_THROWS_AS(partition_ranked(3, 0), ValidationError);
}

TEST_CASE("incremental_search keeps the argmax with smaller-prefix ties") {
    auto t = table_with_relevancy({0.9, 0.8, 0.7, 0.6});
    std::vector<double> metrics{0.70, 0.80, 0.80, 0.75};
    size_t calls = 0;
    FeatureSelection sel = incremental_search(t, 4, [&](std::span<const uint32_t>) {
        return metrics[calls++];
    });
    CHECK(calls == 4);
    CHECK(sel.best_prefix == 2);
    CHECK(sel.selected.size() == 2);
    CHECK(sel.trace == metrics);
}

TEST_CASE("monotonically increasing trace selects the full vocabulary") {
    auto t = table_with_relevancy({0.9, 0.8, 0.7, 0.6, 0.5});
    double metric = 0.0;
    FeatureSelection sel =
        incremental_search(t, 5, [&](std::span<const uint32_t>) { return metric += 0.1; });
    CHECK(sel.best_prefix == 5);
    CHECK(sel.selected.size() == 5);
}

TEST_CASE("search prefixes nest and callback sees rank order") {
    auto t = table_with_relevancy({0.1, 0.9, 0.5, 0.7, 0.3, 0.2});
    std::vector<std::vector<uint32_t>> seen;
    incremental_search(t, 3, [&](std::span<const uint32_t> prefix) {
        seen.emplace_back(prefix.begin(), prefix.end());
        return 0.5;
    });
    REQUIRE(seen.size() == 3);
    for (size_t i = 1; i < seen.size(); ++i) {
        REQUIRE(seen[i].size() > seen[i - 1].size());
        // strict prefix nesting
        for (size_t j = 0; j < seen[i - 1].size(); ++j) CHECK(seen[i][j] == seen[i - 1][j]);
    }
    CHECK(seen[0] == std::vector<uint32_t>{1, 3});  // top relevancies 0.9, 0.7
}

TEST_CASE("callback failure reports the offending prefix") {
    auto t = table_with_relevancy({0.9, 0.8, 0.7});
    CHECK_THROWS_WITH_AS(
        incremental_search(t, 3,
                           [&](std::span<const uint32_t> prefix) -> double {
                               if (prefix.size() >= 2) throw std::runtime_error("boom");
                               return 0.5;
                           }),
        doctest::Contains("prefix 2"), ValidationError);
}

TEST_CASE("search is deterministic given a deterministic callback") {
    auto t = table_with_relevancy({0.4, 0.1, 0.8, 0.3, 0.9, 0.2, 0.6, 0.7});
    auto eval = [](std::span<const uint32_t> prefix) {
        double s = 0.0;
        for (uint32_t id : prefix) s += 1.0 / (1.0 + id);
        return s / (1.0 + static_cast<double>(prefix.size()) * 0.2);
    };
    FeatureSelection a = incremental_search(t, 4, eval);
    FeatureSelection b = incremental_search(t, 4, eval);
    CHECK(a.best_prefix == b.best_prefix);
    CHECK(a.trace == b.trace);
    CHECK(a.selected == b.selected);
}

TEST_CASE("apply_selection marks the table flags") {
    auto t = table_with_relevancy({0.9, 0.2, 0.5});
    FeatureSelection sel;
    sel.selected = {0, 2};
    apply_selection(t, sel);
    CHECK(t.selected == std::vector<uint8_t>{1, 0, 1});
}
