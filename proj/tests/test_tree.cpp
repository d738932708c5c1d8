#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dlcast/errors.hpp"
#include "dlcast/parallel.hpp"
#include "dlcast/rng.hpp"
#include "dlcast/tree.hpp"
#include "reference.hpp"

using namespace dlcast;

namespace {

FeatureMatrix one_column(const std::vector<double>& v) {
    FeatureMatrix X(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) X.set(i, 0, v[i]);
    return X;
}

// Random matrix/targets restricted to dyadic values so every partial sum is
// exact and the production scan, which accumulates in a different order than
// the oracle, produces bit-identical gains.
struct DyadicData {
    FeatureMatrix X;
    std::vector<double> y;
};

DyadicData dyadic_data(std::size_t rows, std::size_t cols, double missing_rate,
                       std::uint64_t seed) {
    SplitMix64 rng(seed);
    FeatureMatrix X(rows, cols);
    std::vector<double> y(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            if (rng.next_uniform() < missing_rate) {
                X.set_missing(i, j);
            } else {
                X.set(i, j, static_cast<double>(rng.next_below(16)) / 8.0);
            }
        }
        y[i] = static_cast<double>(rng.next_below(64)) / 16.0;
    }
    return {std::move(X), std::move(y)};
}

int leaf_of(const RegressionTree& t, const FeatureMatrix& X, std::size_t row) {
    int node = 0;
    while (!t.nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const TreeNode& nd = t.nodes[static_cast<std::size_t>(node)];
        const auto f = static_cast<std::size_t>(nd.feature);
        const bool left = X.is_missing(row, f) ? nd.default_left : X.at(row, f) < nd.threshold;
        node = left ? nd.left : nd.right;
    }
    return node;
}

} // namespace

TEST_CASE("a clean two-group split lands on the midpoint") {
    const FeatureMatrix X = one_column({1.0, 2.0, 3.0, 4.0});
    const std::vector<double> y = {0.0, 0.0, 1.0, 1.0};
    TreeConfig cfg;
    cfg.max_depth = 1;
    const RegressionTree t = fit_tree(X, y, cfg);
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].feature == 0);
    CHECK(t.nodes[0].threshold == 2.5);
    CHECK(t.nodes[0].default_left); // no missing rows: tie goes left
    CHECK(t.nodes[0].cover == 4.0);
    CHECK(t.nodes[1].value == 0.0);
    CHECK(t.nodes[1].cover == 2.0);
    CHECK(t.nodes[2].value == 1.0);
    CHECK(t.nodes[2].cover == 2.0);

    // Matches the hand gain: sums (0|2) over (2|2) rows against base 1.
    const auto ref = reference::best_split(X, y, {0, 1, 2, 3}, 1);
    CHECK(ref.found);
    CHECK(ref.feature == 0);
    CHECK(ref.threshold == 2.5);
    CHECK(ref.gain == 1.0);
}

TEST_CASE("missing rows choose the side that maximizes gain") {
    FeatureMatrix X(4, 1);
    X.set(0, 0, 1.0);
    X.set(1, 0, 2.0);
    X.set_missing(2, 0);
    X.set_missing(3, 0);
    const std::vector<double> y = {0.0, 0.5, 1.0, 1.0};
    TreeConfig cfg;
    cfg.max_depth = 1;
    const RegressionTree t = fit_tree(X, y, cfg);
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].threshold == 1.5);
    CHECK_FALSE(t.nodes[0].default_left); // joining {2.0} beats joining {1.0}
    CHECK(t.nodes[1].value == 0.0);
    CHECK(t.nodes[1].cover == 1.0);
    CHECK(t.nodes[2].value == doctest::Approx(2.5 / 3.0).epsilon(1e-15));
    CHECK(t.nodes[2].cover == 3.0);

    FeatureMatrix probe(1, 1);
    probe.set_missing(0, 0);
    CHECK(predict_tree(t, probe, 0) == t.nodes[2].value);
}

TEST_CASE("fitted trees match the exhaustive reference") {
    struct Scenario {
        std::size_t rows, cols;
        double missing;
        int depth, msl;
        std::uint64_t seed;
    };
    const Scenario scenarios[] = {
        {64, 4, 0.10, 4, 1, 11},
        {48, 3, 0.30, 3, 5, 12},
        {96, 5, 0.00, 5, 2, 13},
        {40, 2, 0.50, 6, 1, 14},
        {8, 1, 0.20, 2, 1, 15},
    };
    for (const auto& sc : scenarios) {
        CAPTURE(sc.seed);
        const DyadicData d = dyadic_data(sc.rows, sc.cols, sc.missing, sc.seed);
        TreeConfig cfg;
        cfg.max_depth = sc.depth;
        cfg.min_samples_leaf = sc.msl;
        const RegressionTree fast = fit_tree(d.X, d.y, cfg);
        const RegressionTree slow = reference::fit_tree(d.X, d.y, cfg);
        CHECK(reference::tree_signature(fast) == reference::tree_signature(slow));
    }
}

TEST_CASE("row order does not change the fitted tree") {
    const DyadicData d = dyadic_data(80, 4, 0.15, 21);
    TreeConfig cfg;
    cfg.max_depth = 4;
    const RegressionTree base = fit_tree(d.X, d.y, cfg);

    SplitMix64 rng(99);
    std::vector<std::size_t> perm(d.X.n_rows());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    for (std::size_t i = perm.size(); i > 1; --i) {
        std::swap(perm[i - 1], perm[rng.next_below(i)]);
    }
    FeatureMatrix Xp(d.X.n_rows(), d.X.n_cols());
    std::vector<double> yp(d.y.size());
    for (std::size_t k = 0; k < perm.size(); ++k) {
        for (std::size_t j = 0; j < d.X.n_cols(); ++j) {
            if (d.X.is_missing(perm[k], j)) {
                Xp.set_missing(k, j);
            } else {
                Xp.set(k, j, d.X.at(perm[k], j));
            }
        }
        yp[k] = d.y[perm[k]];
    }
    const RegressionTree shuffled = fit_tree(Xp, yp, cfg);
    CHECK(reference::tree_signature(base) == reference::tree_signature(shuffled));
}

TEST_CASE("covers are conserved and leaves hold exact partition means") {
    const DyadicData d = dyadic_data(120, 4, 0.2, 31);
    TreeConfig cfg;
    cfg.max_depth = 6;
    const RegressionTree t = fit_tree(d.X, d.y, cfg);

    CHECK(t.nodes[0].cover == 120.0);
    for (const TreeNode& nd : t.nodes) {
        if (!nd.is_leaf()) {
            CHECK(nd.cover == t.nodes[static_cast<std::size_t>(nd.left)].cover +
                                  t.nodes[static_cast<std::size_t>(nd.right)].cover);
        }
    }

    std::vector<double> sum(t.nodes.size(), 0.0);
    std::vector<double> cnt(t.nodes.size(), 0.0);
    for (std::size_t i = 0; i < d.X.n_rows(); ++i) {
        const auto leaf = static_cast<std::size_t>(leaf_of(t, d.X, i));
        sum[leaf] += d.y[i];
        cnt[leaf] += 1.0;
    }
    for (std::size_t k = 0; k < t.nodes.size(); ++k) {
        if (t.nodes[k].is_leaf()) {
            CHECK(cnt[k] == t.nodes[k].cover);
            CHECK(t.nodes[k].value == sum[k] / cnt[k]);
        }
    }
}

TEST_CASE("stopping rules produce leaves") {
    TreeConfig cfg;
    SUBCASE("constant targets") {
        const FeatureMatrix X = one_column({1, 2, 3});
        const RegressionTree t = fit_tree(X, {7.0, 7.0, 7.0}, cfg);
        REQUIRE(t.nodes.size() == 1);
        CHECK(t.nodes[0].value == 7.0);
    }
    SUBCASE("depth zero") {
        cfg.max_depth = 0;
        const FeatureMatrix X = one_column({1, 2, 3, 4});
        const RegressionTree t = fit_tree(X, {0, 0, 1, 1}, cfg);
        REQUIRE(t.nodes.size() == 1);
        CHECK(t.nodes[0].value == 0.5);
    }
    SUBCASE("single row") {
        const FeatureMatrix X = one_column({5});
        CHECK(fit_tree(X, {3.0}, cfg).nodes.size() == 1);
    }
    SUBCASE("min_samples_leaf too demanding") {
        cfg.min_samples_leaf = 3;
        const FeatureMatrix X = one_column({1, 2, 3, 4});
        CHECK(fit_tree(X, {0, 0, 1, 1}, cfg).nodes.size() == 1);
    }
    SUBCASE("constant feature offers no candidate") {
        const FeatureMatrix X = one_column({5, 5, 5, 5});
        const RegressionTree t = fit_tree(X, {0, 1, 0, 1}, cfg);
        REQUIRE(t.nodes.size() == 1);
        CHECK(t.nodes[0].value == 0.5);
    }
}

TEST_CASE("fit and predict guard their preconditions") {
    TreeConfig cfg;
    const FeatureMatrix X = one_column({1, 2});
    CHECK_THROWS_AS(fit_tree(FeatureMatrix(), {}, cfg), TrainError);
    CHECK_THROWS_AS(fit_tree(X, {1.0}, cfg), TrainError);
    CHECK_THROWS_AS(fit_tree(X, {1.0, std::nan("")}, cfg), TrainError);
    cfg.max_depth = -1;
    CHECK_THROWS_AS(fit_tree(X, {1.0, 2.0}, cfg), TrainError);
    cfg.max_depth = 6;
    cfg.min_samples_leaf = 0;
    CHECK_THROWS_AS(fit_tree(X, {1.0, 2.0}, cfg), TrainError);

    const DyadicData d = dyadic_data(30, 3, 0.0, 41);
    const RegressionTree t = fit_tree(d.X, d.y, TreeConfig{});
    FeatureMatrix narrow(2, 1);
    narrow.set(0, 0, 1.0);
    narrow.set(1, 0, 2.0);
    if (max_feature_index(t) >= 1) {
        CHECK_THROWS_AS(predict_tree(t, narrow, 0), DataError);
        std::vector<double> out(2, 0.0);
        CHECK_THROWS_AS(accumulate_tree(t, narrow, 1.0, out), DataError);
    }
}

TEST_CASE("accumulate_tree adds scaled predictions identically in both modes") {
    const DyadicData d = dyadic_data(200, 4, 0.1, 51);
    const RegressionTree t = fit_tree(d.X, d.y, TreeConfig{});

    std::vector<double> serial(d.X.n_rows(), 0.25);
    std::vector<double> parallel(d.X.n_rows(), 0.25);
    accumulate_tree(t, d.X, -0.05, serial, Exec::Serial);
    accumulate_tree(t, d.X, -0.05, parallel, Exec::Parallel);
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i] == parallel[i]);
        CHECK(serial[i] == 0.25 + -0.05 * predict_tree(t, d.X, i));
    }
}

TEST_CASE("parallel_for covers the range exactly once in both modes") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), Exec::Parallel, [&](std::size_t i) { hits[i] += 1; });
    parallel_for(hits.size(), Exec::Serial, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::count(hits.begin(), hits.end(), 2) == 1000);
}

TEST_CASE("split index ranks are a consistent permutation") {
    const DyadicData d = dyadic_data(50, 3, 0.25, 61);
    const SplitIndex idx = build_split_index(d.X, d.y);
    REQUIRE(idx.row_of_rank.size() == 50);
    std::vector<bool> seen(50, false);
    for (std::uint32_t r = 0; r < 50; ++r) {
        const std::uint32_t row = idx.row_of_rank[r];
        CHECK_FALSE(seen[row]);
        seen[row] = true;
        CHECK(idx.rank_of_row[row] == r);
    }
    // Per-feature present lists are (value, rank) ordered with missing rows
    // set aside.
    for (std::size_t j = 0; j < 3; ++j) {
        for (std::size_t k = 0; k + 1 < idx.present[j].size(); ++k) {
            const auto a = idx.present[j][k];
            const auto b = idx.present[j][k + 1];
            const double va = d.X.at(a, j);
            const double vb = d.X.at(b, j);
            CHECK(va <= vb);
            if (va == vb) CHECK(idx.rank_of_row[a] < idx.rank_of_row[b]);
        }
        for (const auto row : idx.missing[j]) CHECK(d.X.is_missing(row, j));
        CHECK(idx.present[j].size() + idx.missing[j].size() == 50);
    }
}
