#include <cmath>

#include "skewlearn/learners.hpp"
#include "tree_builder.hpp"

namespace skewlearn {
namespace detail {

namespace {

std::size_t feature_count_for(MaxFeaturesRule rule, std::size_t d) {
    switch (rule) {
    case MaxFeaturesRule::sqrt_rule:
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));
    case MaxFeaturesRule::log2_rule:
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::log2(static_cast<double>(d))));
    case MaxFeaturesRule::all:
        return d;
    }
    return d;
}

} // namespace

TrainedModel fit_forest(const LearnerSpec& spec, const Dataset& train) {
    const ForestConfig cfg = resolve_forest(spec.params);
    const std::size_t n = train.n_rows();
    const std::size_t d = train.n_cols();

    ClassTreeParams params;
    params.max_depth = cfg.max_depth;
    params.min_samples_split = cfg.min_samples_split;
    params.min_samples_leaf = cfg.min_samples_leaf;
    params.max_features = feature_count_for(cfg.max_features, d);
    params.class_count = train.class_count;

    ForestModel model;
    model.importance.assign(d, 0.0);
    model.trees.reserve(static_cast<std::size_t>(cfg.n_estimators));
    std::vector<std::size_t> bootstrap(n);
    for (int t = 0; t < cfg.n_estimators; ++t) {
        Rng rng(derive_seed(spec.seed, {seed_tag::tree, static_cast<std::uint64_t>(t)}));
        for (std::size_t i = 0; i < n; ++i) bootstrap[i] = rng.uniform_index(n);
        model.trees.push_back(
            build_classification_tree(train.values, train.labels, bootstrap, params, rng,
                                      model.importance));
    }
    double total = 0.0;
    for (double v : model.importance) total += v;
    if (total > 0.0) {
        for (double& v : model.importance) v /= total;
    }

    TrainedModel out;
    out.family = Family::random_forest;
    out.feature_count = static_cast<int>(d);
    out.class_count = train.class_count;
    out.state = std::move(model);
    return out;
}

} // namespace detail
} // namespace skewlearn
