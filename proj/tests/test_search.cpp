#include <doctest.h>

#include <cmath>

#include "skewlearn/search.hpp"
#include "test_util.hpp"

using namespace skewlearn;

namespace {

HyperGrid table_rf_grid() {
    HyperGrid grid;
    grid.family = Family::random_forest;
    grid.axes = {
        {"n_estimators", {std::int64_t{10}, std::int64_t{50}, std::int64_t{100}, std::int64_t{200}}},
        {"max_features", {std::string("sqrt"), std::string("log2")}},
        {"max_depth",
         {std::string("none"), std::int64_t{10}, std::int64_t{20}, std::int64_t{30},
          std::int64_t{40}, std::int64_t{50}}},
        {"min_samples_split", {std::int64_t{2}, std::int64_t{5}, std::int64_t{10}}},
        {"min_samples_leaf", {std::int64_t{1}, std::int64_t{2}, std::int64_t{4}}},
    };
    return grid;
}

} // namespace

TEST_SUITE("search") {

TEST_CASE("the published forest grid enumerates 432 candidates") {
    const HyperGrid grid = table_rf_grid();
    grid.validate();
    CHECK(grid.size() == 432);
}

TEST_CASE("enumeration follows Cartesian order with the first axis slowest") {
    HyperGrid grid;
    grid.family = Family::random_forest;
    grid.axes = {{"n_estimators", {std::int64_t{10}, std::int64_t{20}}},
                 {"min_samples_leaf", {std::int64_t{1}, std::int64_t{2}, std::int64_t{4}}}};
    CHECK(grid.size() == 6);
    const auto expect = [](std::int64_t n, std::int64_t l, const ParamMap& got) {
        CHECK(std::get<std::int64_t>(got.at("n_estimators")) == n);
        CHECK(std::get<std::int64_t>(got.at("min_samples_leaf")) == l);
    };
    expect(10, 1, grid.candidate(0));
    expect(10, 2, grid.candidate(1));
    expect(10, 4, grid.candidate(2));
    expect(20, 1, grid.candidate(3));
    expect(20, 2, grid.candidate(4));
    expect(20, 4, grid.candidate(5));
    CHECK_THROWS_AS(grid.candidate(6), ConfigError);
}

TEST_CASE("a single-candidate grid degenerates to plain cross-validation") {
    const Dataset ds = test_util::make_blobs({40, 24, 12}, 4, 2.0, 5);
    const FoldPlan folds = make_folds(ds, 4, 3);
    HyperGrid grid;
    grid.family = Family::logreg;
    grid.axes = {{"max_iterations", {std::int64_t{150}}}};
    ResampleSpec rs;
    rs.strategy = ResampleStrategy::random_over;
    const SearchResult result =
        grid_search(grid, ds, folds, rs, SelectionMetric::weighted_f1, 17);
    REQUIRE(result.candidates.size() == 1);
    CHECK(result.best_index == 0);
    for (int f = 0; f < folds.k; ++f) {
        const double again = evaluate_candidate_fold(grid, 0, ds, folds, f, rs,
                                                     SelectionMetric::weighted_f1, 17);
        CHECK(again == result.candidates[0].fold_scores[static_cast<std::size_t>(f)]);
    }
    double mean = 0.0;
    for (double s : result.candidates[0].fold_scores) mean += s;
    mean /= static_cast<double>(folds.k);
    CHECK(result.candidates[0].mean_score == doctest::Approx(mean).epsilon(1e-15));
}

TEST_CASE("a strictly dominating candidate is selected") {
    // A 1-tree stump forest against a 60-tree forest on structured data: the
    // larger forest dominates on every fold.
    const Dataset ds = test_util::make_blobs({60, 36, 18}, 6, 1.2, 29);
    const FoldPlan folds = make_folds(ds, 3, 11);
    HyperGrid grid;
    grid.family = Family::random_forest;
    grid.axes = {{"n_estimators", {std::int64_t{1}, std::int64_t{60}}},
                 {"max_depth", {std::int64_t{1}, std::string("none")}}};
    ResampleSpec rs;
    rs.strategy = ResampleStrategy::random_over;
    const SearchResult result =
        grid_search(grid, ds, folds, rs, SelectionMetric::weighted_auc, 23);
    // candidate 3 = (60, none); verify per-fold dominance over candidate 0
    const auto& weak = result.candidates[0];
    const auto& strong = result.candidates[3];
    bool dominates = true;
    for (std::size_t f = 0; f < weak.fold_scores.size(); ++f) {
        if (strong.fold_scores[f] <= weak.fold_scores[f]) dominates = false;
    }
    CHECK(dominates);
    CHECK(result.best_index == 3);
    // per-fold recomputation agrees with the recorded audit trail
    for (int f = 0; f < folds.k; ++f) {
        CHECK(evaluate_candidate_fold(grid, 3, ds, folds, f, rs, SelectionMetric::weighted_auc,
                                      23) == strong.fold_scores[static_cast<std::size_t>(f)]);
    }
}

TEST_CASE("re-evaluating the best candidate reproduces its recorded scores exactly") {
    const Dataset ds = test_util::make_blobs({50, 20, 10}, 5, 1.5, 31);
    const FoldPlan folds = make_folds(ds, 5, 7);
    HyperGrid grid;
    grid.family = Family::gbt_xgb_mode;
    grid.axes = {{"n_estimators", {std::int64_t{5}, std::int64_t{15}}},
                 {"learning_rate", {0.1, 0.2}},
                 {"subsample", {0.9}}};
    ResampleSpec rs;
    rs.strategy = ResampleStrategy::smote;
    rs.k_neighbors = 3;
    const SearchResult result =
        grid_search(grid, ds, folds, rs, SelectionMetric::weighted_f1, 41);
    const auto& best = result.candidates[result.best_index];
    for (int f = 0; f < folds.k; ++f) {
        const double again = evaluate_candidate_fold(grid, result.best_index, ds, folds, f, rs,
                                                     SelectionMetric::weighted_f1, 41);
        CHECK(again == best.fold_scores[static_cast<std::size_t>(f)]);
    }
}

TEST_CASE("threaded and sequential searches agree bit for bit") {
    const Dataset ds = test_util::make_blobs({40, 20}, 4, 1.5, 37);
    const FoldPlan folds = make_folds(ds, 3, 5);
    HyperGrid grid;
    grid.family = Family::random_forest;
    grid.axes = {{"n_estimators", {std::int64_t{5}, std::int64_t{10}, std::int64_t{20}}},
                 {"min_samples_leaf", {std::int64_t{1}, std::int64_t{2}}}};
    ResampleSpec rs;
    rs.strategy = ResampleStrategy::random_over;
    const SearchResult seq = grid_search(grid, ds, folds, rs, SelectionMetric::weighted_f1, 3, 1);
    const SearchResult par = grid_search(grid, ds, folds, rs, SelectionMetric::weighted_f1, 3, 4);
    REQUIRE(seq.candidates.size() == par.candidates.size());
    for (std::size_t c = 0; c < seq.candidates.size(); ++c) {
        CHECK(seq.candidates[c].fold_scores == par.candidates[c].fold_scores);
    }
    CHECK(seq.best_index == par.best_index);
}

TEST_CASE("validation folds are never resampled") {
    const Dataset ds = test_util::make_blobs({30, 18, 9}, 3, 1.0, 43);
    const FoldPlan folds = make_folds(ds, 3, 9);
    HyperGrid grid;
    grid.family = Family::logreg;
    grid.axes = {{"max_iterations", {std::int64_t{50}}}};
    ResampleSpec rs;
    rs.strategy = ResampleStrategy::random_over;
    const SearchResult result =
        grid_search(grid, ds, folds, rs, SelectionMetric::weighted_f1, 3);
    CHECK(result.leakage_audit_passed);
}

TEST_CASE("fit failures disqualify the candidate without aborting the sweep") {
    const Dataset ds = test_util::make_blobs({60, 40}, 3, 0.1, 47);
    const FoldPlan folds = make_folds(ds, 3, 13);
    HyperGrid grid;
    grid.family = Family::gbt;
    grid.axes = {{"learning_rate", {1e160, 0.1}}, {"n_estimators", {std::int64_t{30}}}};
    ResampleSpec rs;
    rs.strategy = ResampleStrategy::none;
    const SearchResult result =
        grid_search(grid, ds, folds, rs, SelectionMetric::weighted_f1, 19);
    CHECK(result.candidates[0].failed);
    CHECK(std::isinf(result.candidates[0].mean_score));
    CHECK(!result.candidates[0].failure.empty());
    CHECK(!result.candidates[1].failed);
    CHECK(result.best_index == 1);
}

TEST_CASE("a fold plan missing a class on the training side is rejected") {
    const Dataset ds = test_util::make_blobs({8, 4}, 3, 1.0, 51);
    FoldPlan plan;
    plan.k = 2;
    plan.assignments.assign(ds.n_rows(), 0);
    // put every class-1 row into fold 0 so fold 0's training side lacks it
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        plan.assignments[i] = ds.labels[i] == 1 ? 0 : (i % 2 == 0 ? 0 : 1);
    }
    HyperGrid grid;
    grid.family = Family::logreg;
    ResampleSpec rs;
    rs.strategy = ResampleStrategy::none;
    CHECK_THROWS_AS(
        grid_search(grid, ds, plan, rs, SelectionMetric::weighted_f1, 1), DataError);
}

TEST_CASE("empty grids fall back to the family defaults as one candidate") {
    const Dataset ds = test_util::make_blobs({24, 12}, 3, 2.0, 53);
    const FoldPlan folds = make_folds(ds, 3, 3);
    HyperGrid grid;
    grid.family = Family::svm_rbf;
    ResampleSpec rs;
    rs.strategy = ResampleStrategy::random_over;
    const SearchResult result =
        grid_search(grid, ds, folds, rs, SelectionMetric::weighted_auc, 5);
    CHECK(result.candidates.size() == 1);
    CHECK(result.candidates[0].params.empty());
    CHECK(!result.candidates[0].failed);
}

} // TEST_SUITE
