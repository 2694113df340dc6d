#pragma once

// Internal greedy tree construction shared by the forest and boosting
// learners. Split candidates are midpoints between consecutive distinct
// sorted feature values; ties in gain resolve to the lower feature index,
// then the lower threshold.

#include <vector>

#include "skewlearn/learners.hpp"
#include "skewlearn/tree.hpp"

namespace skewlearn::detail {

struct ClassTreeParams {
    int max_depth = -1; // -1 = unlimited
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    std::size_t max_features = 0; // candidate features per node; 0 = all
    int class_count = 2;
};

/// Gini-impurity CART tree over the given (possibly repeated) row indices.
/// Leaves hold class proportions. `importance` (length d) accumulates
/// node-weighted impurity decreases.
Tree build_classification_tree(const Matrix& x, const std::vector<int>& y,
                               const std::vector<std::size_t>& rows, const ClassTreeParams& params,
                               Rng& rng, std::vector<double>& importance);

struct ResidualTreeParams {
    int max_depth = 3;
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    std::size_t max_features = 0;
};

/// Squared-error regression tree on boosting residuals; leaf value is the
/// Newton step sum(residual) / (sum(hessian) + eps).
Tree build_residual_tree(const Matrix& x, const std::vector<double>& residual,
                         const std::vector<double>& hessian, const std::vector<std::size_t>& rows,
                         const ResidualTreeParams& params, Rng& rng,
                         std::vector<double>& importance);

struct XgbTreeParams {
    int max_depth = 3;
    double min_child_weight = 1.0;
    double gamma_penalty = 0.0;
    double reg_lambda = 1.0;
};

/// Second-order tree: split gain
/// 0.5 * [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - (G_L+G_R)^2/(H_L+H_R+lambda)] - gamma,
/// leaf weight -G/(H+lambda), children constrained to hessian sums of at
/// least min_child_weight. `features` is the per-tree column sample.
Tree build_xgb_tree(const Matrix& x, const std::vector<double>& grad,
                    const std::vector<double>& hess, const std::vector<std::size_t>& rows,
                    const std::vector<std::size_t>& features, const XgbTreeParams& params,
                    std::vector<double>& importance);

} // namespace skewlearn::detail
