#pragma once

#include <cstdint>
#include <vector>

#include "skewlearn/tabular.hpp"

namespace skewlearn {

enum class ImputeRounding {
    ceiling, // smallest integer >= value (default)
    nearest,
};

/// Ridge regression of one column on the remaining participating columns.
struct ColumnRegression {
    std::size_t column = 0;        // target column (dataset index)
    std::vector<double> coef;      // over participating columns except target
    double intercept = 0.0;
};

/// Chained-equations imputer: missing cells start at the column mean, then
/// each incomplete column is repeatedly re-predicted by a ridge regression on
/// all other numeric/ordinal columns until the largest per-cell change (in
/// units of the column's observed standard deviation) drops below tol.
/// Categorical columns do not participate; encode or drop them first.
struct ImputerModel {
    std::vector<ColumnMeta> schema;
    std::vector<std::size_t> participating; // numeric/ordinal column indices
    std::vector<double> fill_means;         // parallel to participating
    std::vector<double> scale;              // observed std per participating column (0 -> 1)
    std::vector<ColumnRegression> regressions; // one per fit-incomplete column, visit order
    std::vector<std::size_t> visit_order;      // column indices, descending missing count
    int max_iters = 10;
    double tol = 1e-3;
    double ridge_lambda = 1e-3;
    int iteration_count = 0;
    bool converged = false;
    ImputeRounding rounding = ImputeRounding::ceiling;
};

/// seed is accepted for interface stability; the ridge-based fit itself is
/// deterministic and draws nothing from it.
ImputerModel fit_imputer(const Dataset& train, int max_iters = 10, double tol = 1e-3,
                         double ridge_lambda = 1e-3, std::uint64_t seed = 0,
                         ImputeRounding rounding = ImputeRounding::ceiling);

/// Fills every missing numeric/ordinal cell; ordinal-integer cells are
/// rounded per the model's rounding mode. Observed cells are untouched.
Dataset transform(const ImputerModel& model, const Dataset& ds);

namespace detail {
/// Solves (A^T A + lambda * D) beta = A^T y where A is `rows` of width
/// `width` plus an implicit trailing intercept column of ones; D is the
/// identity with a zero in the intercept slot. Returns width+1 coefficients,
/// intercept last.
std::vector<double> solve_ridge(const std::vector<std::vector<double>>& rows,
                                const std::vector<double>& y, double lambda);
} // namespace detail

} // namespace skewlearn
