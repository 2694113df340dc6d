#include <doctest.h>

#include <filesystem>
#include <set>

#include "skewlearn/tabular.hpp"
#include "test_util.hpp"

using namespace skewlearn;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
    const auto dir = fs::temp_directory_path() / "skewlearn_tabular_tests";
    fs::create_directories(dir);
    return dir;
}

std::vector<ColumnMeta> abc_schema() {
    return {{"a", ColumnKind::numeric},
            {"b", ColumnKind::numeric},
            {"label", ColumnKind::ordinal_integer}};
}

} // namespace

TEST_SUITE("tabular") {

TEST_CASE("empty cell maps to exactly one missing value at its position") {
    const auto path = (tmp_dir() / "one_missing.csv").string();
    test_util::write_file(path, "a,b,label\n1,2,0\n3,,1\n5,6,0\n");
    const Dataset ds = load_csv(path, abc_schema(), "label");
    CHECK(ds.n_rows() == 3);
    CHECK(ds.n_cols() == 2);
    CHECK(ds.missing_count() == 1);
    CHECK(ds.is_missing(1, 1));
    CHECK(!ds.is_missing(1, 0));
    CHECK(ds.values.at(1, 0) == 3.0);
}

TEST_CASE("labels 1..5 remap to dense ids 0..4") {
    const auto path = (tmp_dir() / "labels.csv").string();
    std::string csv = "a,b,label\n";
    for (int y = 1; y <= 5; ++y) {
        csv += std::to_string(y) + ",0," + std::to_string(y) + "\n";
        csv += std::to_string(y) + ",1," + std::to_string(y) + "\n";
    }
    test_util::write_file(path, csv);
    const Dataset ds = load_csv(path, abc_schema(), "label");
    CHECK(ds.class_count == 5);
    CHECK(ds.labels[0] == 0);
    CHECK(ds.labels[8] == 4);
    CHECK(ds.label_names == std::vector<std::string>{"1", "2", "3", "4", "5"});
}

TEST_CASE("wrong row arity reports the row number") {
    const auto path = (tmp_dir() / "arity.csv").string();
    test_util::write_file(path, "a,b,label\n1,2,0\n1,2\n3,4,1\n");
    CHECK_THROWS_WITH_AS(load_csv(path, abc_schema(), "label"),
                         doctest::Contains("row 3"), DataError);
}

TEST_CASE("unparseable numeric cell names row and column") {
    const auto path = (tmp_dir() / "badnum.csv").string();
    test_util::write_file(path, "a,b,label\n1,2,0\nx,4,1\n");
    CHECK_THROWS_WITH_AS(load_csv(path, abc_schema(), "label"), doctest::Contains("column 'a'"),
                         DataError);
}

TEST_CASE("non-integer label token is an ingestion error") {
    const auto path = (tmp_dir() / "badlabel.csv").string();
    test_util::write_file(path, "a,b,label\n1,2,zero\n3,4,1\n");
    CHECK_THROWS_AS(load_csv(path, abc_schema(), "label"), DataError);
}

TEST_CASE("csv round trip preserves values, labels and the missingness mask") {
    SynthSpec spec;
    spec.class_counts = {30, 14, 9};
    spec.dims = 6;
    spec.separation = 1.5;
    spec.ordinal_fraction = 0.4;
    spec.missing_rate = 0.15;
    for (std::uint64_t seed : {7ull, 8ull, 9ull}) {
        spec.seed = seed;
        const Dataset original = generate(spec);
        const auto path = (tmp_dir() / ("roundtrip_" + std::to_string(seed) + ".csv")).string();
        save_csv(original, path);
        std::vector<ColumnMeta> schema = original.columns;
        schema.push_back({original.label_column, ColumnKind::ordinal_integer});
        const Dataset loaded = load_csv(path, schema, original.label_column);
        REQUIRE(loaded.n_rows() == original.n_rows());
        CHECK(loaded.missing == original.missing);
        CHECK(loaded.labels == original.labels);
        CHECK(loaded.class_count == original.class_count);
        for (std::size_t i = 0; i < original.n_rows(); ++i) {
            for (std::size_t j = 0; j < original.n_cols(); ++j) {
                if (original.is_missing(i, j)) continue;
                CHECK(loaded.values.at(i, j) == original.values.at(i, j));
            }
        }
    }
}

TEST_CASE("categorical tokens survive the round trip") {
    const auto path = (tmp_dir() / "cat.csv").string();
    test_util::write_file(path, "color,n,label\nred,1,0\n\"blue, dark\",2,1\n,3,0\nred,4,1\n");
    const std::vector<ColumnMeta> schema = {{"color", ColumnKind::categorical},
                                            {"n", ColumnKind::numeric},
                                            {"label", ColumnKind::ordinal_integer}};
    const Dataset ds = load_csv(path, schema, "label");
    CHECK(ds.tokens[0][0] == "red");
    CHECK(ds.tokens[0][1] == "blue, dark");
    CHECK(ds.is_missing(2, 0)); // empty field is the missing token
    const auto path2 = (tmp_dir() / "cat2.csv").string();
    save_csv(ds, path2);
    const Dataset again = load_csv(path2, schema, "label");
    CHECK(again.tokens == ds.tokens);
    CHECK(again.missing == ds.missing);
}

TEST_CASE("stratified holdout follows the per-class rounding rule") {
    const Dataset ds = test_util::make_blobs({100, 50, 10}, 4, 1.0, 3);
    const auto [train, test] = stratified_holdout(ds, 0.2, 11);
    const auto test_counts = test.class_counts();
    CHECK(test_counts[0] == 20);
    CHECK(test_counts[1] == 10);
    CHECK(test_counts[2] == 2);
    const auto train_counts = train.class_counts();
    CHECK(train_counts[0] == 80);
    CHECK(train_counts[1] == 40);
    CHECK(train_counts[2] == 8);
    CHECK(train.n_rows() + test.n_rows() == ds.n_rows());
}

TEST_CASE("holdout keeps at least one row per class on each side") {
    const Dataset ds = test_util::make_blobs({40, 2}, 3, 1.0, 5);
    const auto [train, test] = stratified_holdout(ds, 0.1, 1);
    CHECK(test.class_counts()[1] == 1);
    CHECK(train.class_counts()[1] == 1);
}

TEST_CASE("holdout with a single-row class throws") {
    Dataset ds = test_util::make_blobs({10, 2}, 3, 1.0, 5);
    // shrink class 1 to a single row
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        if (ds.labels[i] == 0 || i == ds.rows_of_class(1)[0]) keep.push_back(i);
    }
    ds = subset_rows(ds, keep);
    CHECK_THROWS_AS(stratified_holdout(ds, 0.2, 1), DataError);
}

TEST_CASE("holdout is deterministic in the seed") {
    const Dataset ds = test_util::make_blobs({60, 40}, 5, 1.0, 17);
    const auto [train_a, test_a] = stratified_holdout(ds, 0.25, 99);
    const auto [train_b, test_b] = stratified_holdout(ds, 0.25, 99);
    CHECK(train_a == train_b);
    CHECK(test_a == test_b);
    const auto [train_c, test_c] = stratified_holdout(ds, 0.25, 100);
    CHECK(train_a != train_c);
}

TEST_CASE("exactly divisible folds give equal per-class counts") {
    const Dataset ds = test_util::make_blobs({10, 10, 10, 10, 10}, 3, 1.0, 2);
    const FoldPlan plan = make_folds(ds, 5, 21);
    for (int f = 0; f < 5; ++f) {
        std::vector<std::size_t> per_class(5, 0);
        for (std::size_t i = 0; i < ds.n_rows(); ++i) {
            if (plan.assignments[i] == f) per_class[static_cast<std::size_t>(ds.labels[i])]++;
        }
        for (std::size_t c = 0; c < 5; ++c) CHECK(per_class[c] == 2);
    }
}

TEST_CASE("a 7-row class splits over 5 folds as a permutation of 2,2,1,1,1") {
    const Dataset ds = test_util::make_blobs({25, 7}, 3, 1.0, 4);
    const FoldPlan plan = make_folds(ds, 5, 8);
    std::vector<int> counts(5, 0);
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        if (ds.labels[i] == 1) counts[static_cast<std::size_t>(plan.assignments[i])]++;
    }
    std::sort(counts.begin(), counts.end());
    CHECK(counts == std::vector<int>{1, 1, 1, 2, 2});
}

TEST_CASE("a class smaller than k cannot be folded") {
    const Dataset ds = test_util::make_blobs({25, 4}, 3, 1.0, 4);
    CHECK_THROWS_AS(make_folds(ds, 5, 8), DataError);
}

TEST_CASE("fold plans partition rows and stay stratified on random datasets") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        Rng rng(seed);
        std::vector<std::size_t> counts;
        const int n_classes = 2 + static_cast<int>(rng.uniform_index(4));
        const int k = 2 + static_cast<int>(rng.uniform_index(4));
        for (int c = 0; c < n_classes; ++c) {
            counts.push_back(static_cast<std::size_t>(k) + rng.uniform_index(40));
        }
        const Dataset ds = test_util::make_blobs(counts, 3, 1.0, seed);
        const FoldPlan plan = make_folds(ds, k, seed * 13 + 1);
        plan.validate(ds.n_rows());
        for (int c = 0; c < n_classes; ++c) {
            std::vector<std::size_t> per_fold(static_cast<std::size_t>(k), 0);
            for (std::size_t i = 0; i < ds.n_rows(); ++i) {
                if (ds.labels[i] == c) per_fold[static_cast<std::size_t>(plan.assignments[i])]++;
            }
            const auto [lo, hi] = std::minmax_element(per_fold.begin(), per_fold.end());
            CHECK(*hi - *lo <= 1);
        }
        // determinism
        const FoldPlan again = make_folds(ds, k, seed * 13 + 1);
        CHECK(again.assignments == plan.assignments);
    }
}

} // TEST_SUITE
