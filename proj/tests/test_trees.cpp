#include <doctest.h>

#include <cmath>

#include "skewlearn/learners.hpp"
#include "skewlearn/model_io.hpp"
#include "test_util.hpp"
#include "tree_builder.hpp"

using namespace skewlearn;

namespace {

// Leaf occupancy of `rows` routed through the tree.
std::vector<std::size_t> leaf_occupancy(const Tree& tree, const Matrix& x,
                                        const std::vector<std::size_t>& rows) {
    std::vector<std::size_t> occupancy(tree.nodes.size(), 0);
    for (std::size_t r : rows) {
        int idx = 0;
        while (!tree.nodes[static_cast<std::size_t>(idx)].is_leaf()) {
            const TreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
            idx = x.at(r, static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left
                                                                                    : node.right;
        }
        occupancy[static_cast<std::size_t>(idx)]++;
    }
    return occupancy;
}

int tree_depth(const Tree& tree, int idx = 0) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
    if (node.is_leaf()) return 0;
    return 1 + std::max(tree_depth(tree, node.left), tree_depth(tree, node.right));
}

} // namespace

TEST_SUITE("trees") {

TEST_CASE("gini impurity matches the brute-force definition on random histograms") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t c_count = 2 + rng.uniform_index(6);
        std::vector<std::size_t> counts(c_count);
        std::size_t total = 0;
        for (auto& c : counts) {
            c = rng.uniform_index(50);
            total += c;
        }
        if (total == 0) counts[0] = total = 1;
        double sum_sq = 0.0;
        for (auto c : counts) {
            const double p = static_cast<double>(c) / static_cast<double>(total);
            sum_sq += p * p;
        }
        CHECK(std::abs(detail::gini_impurity(counts) - (1.0 - sum_sq)) <= 1e-12);
    }
}

TEST_CASE("xgb leaf weight is -G/(H+lambda)") {
    CHECK(detail::xgb_leaf_weight(2.0, 3.0, 1.0) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(detail::xgb_leaf_weight(0.0, 5.0, 1.0) == 0.0);
    CHECK(detail::xgb_leaf_weight(-4.0, 1.0, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("xgb split gain matches the closed form") {
    const double gl = 1.5, hl = 2.0, gr = -0.5, hr = 1.0, lambda = 1.0, gamma = 0.1;
    const double by_hand = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                                  (gl + gr) * (gl + gr) / (hl + hr + lambda)) -
                           gamma;
    CHECK(detail::xgb_split_gain(gl, hl, gr, hr, lambda, gamma) ==
          doctest::Approx(by_hand).epsilon(1e-15));
}

TEST_CASE("a pure node stops immediately with a one-hot leaf") {
    Matrix x(8, 3);
    Rng rng(11);
    for (double& v : x.data) v = rng.normal();
    const std::vector<int> y(8, 2); // one class only
    const std::vector<std::size_t> rows = {0, 1, 2, 3, 4, 5, 6, 7};
    detail::ClassTreeParams params;
    params.class_count = 3;
    params.max_features = 3;
    std::vector<double> importance(3, 0.0);
    Rng tree_rng(1);
    const Tree tree = detail::build_classification_tree(x, y, rows, params, tree_rng, importance);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].is_leaf());
    CHECK(tree.nodes[0].value == std::vector<double>{0.0, 0.0, 1.0});
    CHECK(importance == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("min_samples_leaf bounds every leaf's occupancy") {
    const std::size_t n = 120;
    Matrix x(n, 4);
    std::vector<int> y(n);
    Rng rng(7);
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 4; ++j) x.at(i, j) = rng.normal();
        y[i] = static_cast<int>(rng.uniform_index(3));
        rows[i] = i;
    }
    detail::ClassTreeParams params;
    params.class_count = 3;
    params.max_features = 4;
    params.min_samples_leaf = 9;
    std::vector<double> importance(4, 0.0);
    Rng tree_rng(2);
    const Tree tree = detail::build_classification_tree(x, y, rows, params, tree_rng, importance);
    const auto occupancy = leaf_occupancy(tree, x, rows);
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (tree.nodes[i].is_leaf()) CHECK(occupancy[i] >= 9);
    }
}

TEST_CASE("max_depth caps the tree height") {
    const std::size_t n = 200;
    Matrix x(n, 3);
    std::vector<int> y(n);
    Rng rng(13);
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 3; ++j) x.at(i, j) = rng.normal();
        y[i] = static_cast<int>(rng.uniform_index(2));
        rows[i] = i;
    }
    detail::ClassTreeParams params;
    params.class_count = 2;
    params.max_depth = 3;
    params.max_features = 3;
    std::vector<double> importance(3, 0.0);
    Rng tree_rng(3);
    const Tree tree = detail::build_classification_tree(x, y, rows, params, tree_rng, importance);
    CHECK(tree_depth(tree) <= 3);
    CHECK(tree.nodes.size() > 1); // noise still admits some split

    // unlimited depth grows to purity on distinct-feature data
    params.max_depth = -1;
    std::vector<double> imp2(3, 0.0);
    Rng tree_rng2(3);
    const Tree deep = detail::build_classification_tree(x, y, rows, params, tree_rng2, imp2);
    const auto occupancy = leaf_occupancy(deep, x, rows);
    for (std::size_t i = 0; i < deep.nodes.size(); ++i) {
        if (!deep.nodes[i].is_leaf()) continue;
        // every leaf is pure: its value vector is one-hot
        double max_p = 0.0;
        for (double v : deep.nodes[i].value) max_p = std::max(max_p, v);
        CHECK(max_p == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("forest leaves hold class-proportion distributions") {
    const Dataset ds = test_util::make_blobs({30, 15}, 4, 1.0, 9);
    LearnerSpec spec;
    spec.family = Family::random_forest;
    spec.params["n_estimators"] = std::int64_t{5};
    spec.seed = 7;
    const TrainedModel model = fit(spec, ds);
    for (const Tree& tree : std::get<ForestModel>(model.state).trees) {
        for (const TreeNode& node : tree.nodes) {
            if (!node.is_leaf()) continue;
            double sum = 0.0;
            for (double v : node.value) {
                CHECK(v >= 0.0);
                sum += v;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("forest importance is one-hot when only one feature can split") {
    // feature 2 separates the classes; all other features are constant.
    Dataset ds;
    ds.columns = {{"c0", ColumnKind::numeric},
                  {"c1", ColumnKind::numeric},
                  {"sig", ColumnKind::numeric},
                  {"c3", ColumnKind::numeric}};
    const std::size_t n = 40;
    ds.values = Matrix(n, 4);
    ds.missing.assign(n * 4, 0);
    ds.tokens.resize(4);
    ds.class_count = 2;
    ds.label_names = {"0", "1"};
    Rng rng(2);
    for (std::size_t i = 0; i < n; ++i) {
        ds.values.at(i, 0) = 1.0;
        ds.values.at(i, 1) = -2.0;
        ds.values.at(i, 2) = i < n / 2 ? rng.uniform(0.0, 1.0) : rng.uniform(2.0, 3.0);
        ds.values.at(i, 3) = 7.5;
        ds.labels.push_back(i < n / 2 ? 0 : 1);
    }
    LearnerSpec spec;
    spec.family = Family::random_forest;
    spec.params["n_estimators"] = std::int64_t{15};
    spec.seed = 3;
    const TrainedModel model = fit(spec, ds);
    const auto importance = feature_importance(model);
    CHECK(importance == std::vector<double>{0.0, 0.0, 1.0, 0.0});
}

TEST_CASE("forests are bit-identical across repeated fits") {
    const Dataset ds = test_util::make_blobs({40, 25, 10}, 5, 1.5, 17);
    LearnerSpec spec;
    spec.family = Family::random_forest;
    spec.params["n_estimators"] = std::int64_t{20};
    spec.params["max_features"] = std::string("log2");
    spec.seed = 11;
    const TrainedModel a = fit(spec, ds);
    const TrainedModel b = fit(spec, ds);
    CHECK(model_to_json(a) == model_to_json(b));
    const auto& fa = std::get<ForestModel>(a.state);
    const auto& fb = std::get<ForestModel>(b.state);
    CHECK(fa.trees == fb.trees);
    spec.seed = 12;
    const TrainedModel c = fit(spec, ds);
    CHECK(std::get<ForestModel>(c.state).trees != fa.trees);
}

} // TEST_SUITE
