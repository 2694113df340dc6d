#include <algorithm>
#include <cmath>

#include "skewlearn/learners.hpp"
#include "tree_builder.hpp"

namespace skewlearn {
namespace detail {

namespace {

std::size_t gbt_feature_count(MaxFeaturesRule rule, std::size_t d) {
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

double softmax_loss(const Matrix& raw, const std::vector<int>& labels) {
    double loss = 0.0;
    const std::size_t c_count = raw.cols;
    for (std::size_t i = 0; i < raw.rows; ++i) {
        const auto z = raw.row(i);
        double max_z = z[0];
        for (double v : z) max_z = std::max(max_z, v);
        double sum = 0.0;
        for (std::size_t c = 0; c < c_count; ++c) sum += std::exp(z[c] - max_z);
        loss += -(z[static_cast<std::size_t>(labels[i])] - max_z - std::log(sum));
    }
    return loss;
}

} // namespace

TrainedModel fit_gbt(const LearnerSpec& spec, const Dataset& train, bool xgb_mode) {
    GbtConfig gcfg;
    XgbConfig xcfg;
    int n_rounds;
    double learning_rate, subsample;
    if (xgb_mode) {
        xcfg = resolve_xgb(spec.params);
        n_rounds = xcfg.n_estimators;
        learning_rate = xcfg.learning_rate;
        subsample = xcfg.subsample;
    } else {
        gcfg = resolve_gbt(spec.params);
        n_rounds = gcfg.n_estimators;
        learning_rate = gcfg.learning_rate;
        subsample = gcfg.subsample;
    }

    const std::size_t n = train.n_rows();
    const std::size_t d = train.n_cols();
    const std::size_t c_count = static_cast<std::size_t>(train.class_count);

    GbtModel model;
    model.learning_rate = learning_rate;
    model.xgb_mode = xgb_mode;
    model.importance.assign(d, 0.0);
    model.rounds.reserve(static_cast<std::size_t>(n_rounds));

    Matrix raw(n, c_count, 0.0); // additive scores, softmax-normalized on demand
    Matrix probs(n, c_count, 0.0);
    std::vector<double> residual(n), hessian(n);
    std::vector<std::size_t> all_rows(n);
    for (std::size_t i = 0; i < n; ++i) all_rows[i] = i;

    model.train_loss.push_back(softmax_loss(raw, train.labels));

    for (int round = 0; round < n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            auto p = probs.row(i);
            std::copy(raw.row(i).begin(), raw.row(i).end(), p.begin());
            softmax_inplace(p);
        }

        Rng rng(derive_seed(spec.seed, {seed_tag::round_, static_cast<std::uint64_t>(round)}));
        std::vector<std::size_t> rows;
        if (subsample < 1.0) {
            const std::size_t keep = std::max<std::size_t>(
                1, static_cast<std::size_t>(subsample * static_cast<double>(n)));
            rows = rng.sample_without_replacement(n, keep);
            std::sort(rows.begin(), rows.end());
        } else {
            rows = all_rows;
        }

        std::vector<Tree> class_trees;
        class_trees.reserve(c_count);
        for (std::size_t c = 0; c < c_count; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = probs.at(i, c);
                residual[i] = (train.labels[i] == static_cast<int>(c) ? 1.0 : 0.0) - p;
                hessian[i] = p * (1.0 - p);
            }
            Tree tree;
            if (xgb_mode) {
                // grad is the loss gradient, i.e. the negated residual.
                std::vector<double> grad(n);
                for (std::size_t i = 0; i < n; ++i) grad[i] = -residual[i];
                std::vector<std::size_t> features;
                if (xcfg.colsample_bytree < 1.0) {
                    const std::size_t keep = std::max<std::size_t>(
                        1, static_cast<std::size_t>(xcfg.colsample_bytree *
                                                    static_cast<double>(d)));
                    features = rng.sample_without_replacement(d, keep);
                    std::sort(features.begin(), features.end());
                } else {
                    features.resize(d);
                    for (std::size_t j = 0; j < d; ++j) features[j] = j;
                }
                XgbTreeParams params;
                params.max_depth = xcfg.max_depth;
                params.min_child_weight = xcfg.min_child_weight;
                params.gamma_penalty = xcfg.gamma;
                params.reg_lambda = xcfg.reg_lambda;
                tree = build_xgb_tree(train.values, grad, hessian, rows, features, params,
                                      model.importance);
            } else {
                ResidualTreeParams params;
                params.max_depth = gcfg.max_depth;
                params.min_samples_split = gcfg.min_samples_split;
                params.min_samples_leaf = gcfg.min_samples_leaf;
                params.max_features = gbt_feature_count(gcfg.max_features, d);
                tree = build_residual_tree(train.values, residual, hessian, rows, params, rng,
                                           model.importance);
            }
            for (std::size_t i = 0; i < n; ++i) {
                raw.at(i, c) += learning_rate * tree.predict_scalar(train.values.row(i));
            }
            class_trees.push_back(std::move(tree));
        }
        model.rounds.push_back(std::move(class_trees));

        const double loss = softmax_loss(raw, train.labels);
        if (!std::isfinite(loss)) throw TrainError("gbt: training loss diverged");
        model.train_loss.push_back(loss);
    }

    double total = 0.0;
    for (double v : model.importance) total += v;
    if (total > 0.0) {
        for (double& v : model.importance) v /= total;
    }

    TrainedModel out;
    out.family = xgb_mode ? Family::gbt_xgb_mode : Family::gbt;
    out.feature_count = static_cast<int>(d);
    out.class_count = train.class_count;
    out.state = std::move(model);
    return out;
}

} // namespace detail
} // namespace skewlearn
