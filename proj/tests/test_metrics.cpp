#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "magnet/metrics.hpp"

using namespace magnet;

TEST_CASE("node recovery rate counts recovered truth nodes") {
    CHECK(node_recovery_rate({0, 1, 2}, {0, 1, 2}) == doctest::Approx(1.0));
    CHECK(node_recovery_rate({0, 5, 6}, {0, 1, 2, 3}) == doctest::Approx(0.25));
    CHECK(node_recovery_rate({}, {0, 1}) == doctest::Approx(0.0));
    // duplicates in the kept list do not double count
    CHECK(node_recovery_rate({3, 3, 3}, {3, 4}) == doctest::Approx(0.5));
    // extra non-important nodes do not hurt the rate
    CHECK(node_recovery_rate({0, 1, 9, 8, 7}, {0, 1}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(node_recovery_rate({0}, {}), UndefinedMetric);
}

TEST_CASE("redundant edges on the complete four-node graph") {
    std::vector<std::pair<int, int>> all;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) all.emplace_back(i, j);
    AdjacencyMatrix k4(4, all);
    // important = {0,1}: only edge (0,1) is non-redundant
    auto c = redundant_edge_counts(k4, all, {0, 1});
    CHECK(c.before == 5);
    CHECK(c.after == 5);
    CHECK(c.possible == 5);
    CHECK(am_metric(c.after, c.possible) == doctest::Approx(1.0));
    CHECK(rm_metric(c.before, c.after) == doctest::Approx(0.0));

    auto kept = redundant_edge_counts(k4, {{0, 1}}, {0, 1});
    CHECK(kept.after == 0);
    CHECK(am_metric(kept.after, kept.possible) == doctest::Approx(0.0));
    CHECK(rm_metric(kept.before, kept.after) == doctest::Approx(1.0));
}

TEST_CASE("metric ratios take their closed forms") {
    CHECK(am_metric(35, 390) == doctest::Approx(35.0 / 390.0).epsilon(1e-12));
    CHECK(rm_metric(183, 35) == doctest::Approx(148.0 / 183.0).epsilon(1e-12));
    CHECK(am_metric(0, 10) == 0.0);
    CHECK(rm_metric(7, 7) == 0.0);
    CHECK_THROWS_AS(am_metric(1, 0), UndefinedMetric);
    CHECK_THROWS_AS(rm_metric(0, 0), UndefinedMetric);
}

TEST_CASE("redundant counts agree with brute-force pair enumeration") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 7);  // up to 10 nodes
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (unif(rng) < 0.5) edges.emplace_back(i, j);
        if (edges.empty()) edges.emplace_back(0, 1);
        AdjacencyMatrix a(n, edges);

        std::vector<int> important;
        for (int v = 0; v < n; ++v)
            if (unif(rng) < 0.4) important.push_back(v);

        std::vector<std::pair<int, int>> kept;
        for (auto e : a.edges())
            if (unif(rng) < 0.5) kept.push_back(e);

        auto is_imp = [&](int v) {
            return std::find(important.begin(), important.end(), v) != important.end();
        };
        int before = 0, after = 0, possible = 0;
        for (auto [i, j] : a.edges())
            if (!is_imp(i) || !is_imp(j)) ++before;
        for (auto [i, j] : kept)
            if (!is_imp(i) || !is_imp(j)) ++after;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (!is_imp(i) || !is_imp(j)) ++possible;

        auto c = redundant_edge_counts(a, kept, important);
        CHECK(c.before == before);
        CHECK(c.after == after);
        CHECK(c.possible == possible);
    }
}

TEST_CASE("every edge is redundant when nothing is important") {
    AdjacencyMatrix path(3, {{0, 1}, {1, 2}});
    auto c = redundant_edge_counts(path, {{0, 1}}, {});
    CHECK(c.before == 2);
    CHECK(c.after == 1);
    CHECK(c.possible == 3);
}
