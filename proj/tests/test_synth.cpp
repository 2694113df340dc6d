#include <doctest.h>

#include <cmath>

#include "skewlearn/learners.hpp"
#include "skewlearn/metrics.hpp"
#include "skewlearn/preprocess.hpp"
#include "skewlearn/synth.hpp"
#include "skewlearn/tabular.hpp"
#include "test_util.hpp"

using namespace skewlearn;

namespace {

// Weighted OvR AUC of one fitted model on a fresh holdout of the same spec.
double holdout_auc(const SynthSpec& spec, const LearnerSpec& learner, std::uint64_t split_seed) {
    const Dataset ds = generate(spec);
    const auto [train, test] = stratified_holdout(ds, 0.25, split_seed);
    const ScalerModel scaler = fit_scaler(train);
    const EncoderModel encoder = fit_encoder(train);
    const Dataset train_p = apply(encoder, scaler, train);
    const Dataset test_p = apply(encoder, scaler, test);
    const TrainedModel model = fit(learner, train_p);
    return roc_auc(test_p.labels, score_all(model, test_p)).weighted_auc;
}

} // namespace

TEST_SUITE("synth") {

TEST_CASE("class counts are exact and match the requested shape") {
    SynthSpec spec;
    spec.class_counts = {939, 657, 554, 304, 71};
    spec.dims = 25;
    spec.separation = 2.0;
    spec.seed = 5;
    const Dataset ds = generate(spec);
    CHECK(ds.n_rows() == 2525);
    CHECK(ds.n_cols() == 25);
    CHECK(ds.class_counts() == std::vector<std::size_t>{939, 657, 554, 304, 71});
    CHECK(ds.class_count == 5);
}

TEST_CASE("missing_rate 0 yields a complete dataset") {
    const Dataset ds = test_util::make_blobs({50, 20}, 6, 1.0, 9);
    CHECK(ds.missing_count() == 0);
    CHECK(ds.is_complete_numeric());
}

TEST_CASE("missing cell count stays within binomial fluctuation of the rate") {
    SynthSpec spec;
    spec.class_counts = {400, 200};
    spec.dims = 10;
    spec.missing_rate = 0.1;
    spec.seed = 31;
    const Dataset ds = generate(spec);
    const double cells = static_cast<double>(ds.n_rows() * ds.n_cols());
    const double expected = spec.missing_rate * cells;
    const double sigma = std::sqrt(cells * spec.missing_rate * (1.0 - spec.missing_rate));
    CHECK(std::abs(static_cast<double>(ds.missing_count()) - expected) <= 4.0 * sigma);
}

TEST_CASE("ordinal columns land on the 1..5 scale") {
    SynthSpec spec;
    spec.class_counts = {60, 30};
    spec.dims = 8;
    spec.ordinal_fraction = 0.5;
    spec.separation = 2.0;
    spec.seed = 12;
    const Dataset ds = generate(spec);
    int n_ordinal = 0;
    for (std::size_t j = 0; j < ds.n_cols(); ++j) {
        if (ds.columns[j].kind != ColumnKind::ordinal_integer) continue;
        ++n_ordinal;
        for (std::size_t i = 0; i < ds.n_rows(); ++i) {
            const double v = ds.values.at(i, j);
            CHECK(v == std::floor(v));
            CHECK(v >= 1.0);
            CHECK(v <= 5.0);
        }
    }
    CHECK(n_ordinal == 4);
}

TEST_CASE("zero separation carries no learnable signal") {
    SynthSpec spec;
    spec.class_counts = {150, 80};
    spec.dims = 6;
    spec.separation = 0.0;
    spec.seed = 77;
    LearnerSpec learner;
    learner.family = Family::logreg;
    learner.params["max_iterations"] = std::int64_t{200};
    learner.seed = 1;
    const double auc = holdout_auc(spec, learner, 3);
    CHECK(std::abs(auc - 0.5) <= 0.05);
}

TEST_CASE("learnability is monotone in separation for a fixed forest config") {
    LearnerSpec learner;
    learner.family = Family::random_forest;
    learner.params["n_estimators"] = std::int64_t{60};
    learner.seed = 4;
    const double seps[] = {0.0, 1.0, 2.0, 4.0};
    std::vector<double> mean_auc;
    for (double sep : seps) {
        double total = 0.0;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            SynthSpec spec;
            spec.class_counts = {120, 60, 30};
            spec.dims = 8;
            spec.separation = sep;
            spec.seed = 1000 + seed;
            total += holdout_auc(spec, learner, seed);
        }
        mean_auc.push_back(total / 5.0);
    }
    CHECK(mean_auc[0] <= mean_auc[1]);
    CHECK(mean_auc[1] <= mean_auc[2]);
    CHECK(mean_auc[2] <= mean_auc[3]);
}

TEST_CASE("generation is deterministic in the seed") {
    SynthSpec spec;
    spec.class_counts = {40, 25};
    spec.dims = 5;
    spec.missing_rate = 0.05;
    spec.seed = 123;
    CHECK(generate(spec) == generate(spec));
    spec.seed = 124;
    const Dataset other = generate(spec);
    CHECK(other.values.data != generate({.class_counts = {40, 25},
                                         .dims = 5,
                                         .separation = 1.0,
                                         .ordinal_fraction = 0.0,
                                         .missing_rate = 0.05,
                                         .seed = 123})
                                  .values.data);
}

TEST_CASE("invalid specs are rejected") {
    SynthSpec spec;
    spec.class_counts = {10};
    CHECK_THROWS_AS(generate(spec), ConfigError);
    spec.class_counts = {10, 5};
    spec.missing_rate = 1.0;
    CHECK_THROWS_AS(generate(spec), ConfigError);
    spec.missing_rate = 0.0;
    spec.ordinal_fraction = 1.5;
    CHECK_THROWS_AS(generate(spec), ConfigError);
}

} // TEST_SUITE
