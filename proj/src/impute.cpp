#include "skewlearn/impute.hpp"

#include <algorithm>
#include <cmath>

namespace skewlearn {

namespace detail {

std::vector<double> solve_ridge(const std::vector<std::vector<double>>& rows,
                                const std::vector<double>& y, double lambda) {
    const std::size_t p = rows.empty() ? 0 : rows[0].size();
    const std::size_t m = p + 1; // trailing intercept
    std::vector<double> g(m * m, 0.0);
    std::vector<double> rhs(m, 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& a = rows[r];
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = i; j < p; ++j) g[i * m + j] += a[i] * a[j];
            g[i * m + p] += a[i];
            rhs[i] += a[i] * y[r];
        }
        g[p * m + p] += 1.0;
        rhs[p] += y[r];
    }
    for (std::size_t i = 0; i < p; ++i) g[i * m + i] += lambda;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < i; ++j) g[i * m + j] = g[j * m + i];
    }

    // Cholesky LL^T; the lambda > 0 ridge keeps the system positive definite.
    std::vector<double> l(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = g[i * m + j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i * m + k] * l[j * m + k];
            if (i == j) {
                if (s <= 0.0 || !std::isfinite(s)) {
                    throw DataError("imputer: ridge system is not positive definite");
                }
                l[i * m + i] = std::sqrt(s);
            } else {
                l[i * m + j] = s / l[j * m + j];
            }
        }
    }
    std::vector<double> z(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double s = rhs[i];
        for (std::size_t k = 0; k < i; ++k) s -= l[i * m + k] * z[k];
        z[i] = s / l[i * m + i];
    }
    std::vector<double> beta(m, 0.0);
    for (std::size_t ii = m; ii > 0; --ii) {
        const std::size_t i = ii - 1;
        double s = z[i];
        for (std::size_t k = i + 1; k < m; ++k) s -= l[k * m + i] * beta[k];
        beta[i] = s / l[i * m + i];
    }
    return beta;
}

} // namespace detail

namespace {

struct WorkSpace {
    std::vector<std::size_t> participating;
    std::vector<std::size_t> pos_of;      // dataset column -> participating slot
    Matrix filled;                        // n x p working copy, mean-initialized
    std::vector<std::vector<std::size_t>> missing_rows; // per participating slot
};

WorkSpace build_workspace(const Dataset& ds, const std::vector<std::size_t>& participating,
                          const std::vector<double>& fill_means) {
    WorkSpace w;
    w.participating = participating;
    w.pos_of.assign(ds.n_cols(), static_cast<std::size_t>(-1));
    for (std::size_t s = 0; s < participating.size(); ++s) w.pos_of[participating[s]] = s;
    const std::size_t n = ds.n_rows();
    const std::size_t p = participating.size();
    w.filled = Matrix(n, p);
    w.missing_rows.resize(p);
    for (std::size_t s = 0; s < p; ++s) {
        const std::size_t j = participating[s];
        for (std::size_t i = 0; i < n; ++i) {
            if (ds.is_missing(i, j)) {
                w.filled.at(i, s) = fill_means[s];
                w.missing_rows[s].push_back(i);
            } else {
                w.filled.at(i, s) = ds.values.at(i, j);
            }
        }
    }
    return w;
}

double predict(const ColumnRegression& reg, const Matrix& filled, std::size_t row,
               std::size_t target_slot) {
    double v = reg.intercept;
    std::size_t k = 0;
    for (std::size_t s = 0; s < filled.cols; ++s) {
        if (s == target_slot) continue;
        v += reg.coef[k++] * filled.at(row, s);
    }
    return v;
}

} // namespace

ImputerModel fit_imputer(const Dataset& train, int max_iters, double tol, double ridge_lambda,
                         std::uint64_t /*seed*/, ImputeRounding rounding) {
    if (max_iters < 1) throw ConfigError("imputer: max_iters must be positive");
    if (!(tol >= 0.0)) throw ConfigError("imputer: tol must be non-negative");
    if (!(ridge_lambda > 0.0)) throw ConfigError("imputer: ridge_lambda must be positive");

    ImputerModel model;
    model.schema = train.columns;
    model.max_iters = max_iters;
    model.tol = tol;
    model.ridge_lambda = ridge_lambda;
    model.rounding = rounding;

    for (std::size_t j = 0; j < train.n_cols(); ++j) {
        if (train.columns[j].kind != ColumnKind::categorical) model.participating.push_back(j);
    }
    const std::size_t n = train.n_rows();
    std::vector<std::size_t> missing_counts(model.participating.size(), 0);
    for (std::size_t s = 0; s < model.participating.size(); ++s) {
        const std::size_t j = model.participating[s];
        double sum = 0.0, sumsq = 0.0;
        std::size_t obs = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (train.is_missing(i, j)) {
                missing_counts[s]++;
            } else {
                sum += train.values.at(i, j);
                sumsq += train.values.at(i, j) * train.values.at(i, j);
                ++obs;
            }
        }
        if (obs == 0) {
            throw DataError("imputer: column '" + train.columns[j].name + "' is entirely missing");
        }
        const double mean = sum / static_cast<double>(obs);
        double var = sumsq / static_cast<double>(obs) - mean * mean;
        if (var < 0.0) var = 0.0;
        model.fill_means.push_back(mean);
        const double sd = std::sqrt(var);
        model.scale.push_back(sd > 0.0 ? sd : 1.0);
    }

    std::vector<std::size_t> slots_with_missing;
    for (std::size_t s = 0; s < model.participating.size(); ++s) {
        if (missing_counts[s] > 0) slots_with_missing.push_back(s);
    }
    std::sort(slots_with_missing.begin(), slots_with_missing.end(),
              [&](std::size_t a, std::size_t b) {
                  if (missing_counts[a] != missing_counts[b]) {
                      return missing_counts[a] > missing_counts[b];
                  }
                  return model.participating[a] < model.participating[b];
              });
    for (std::size_t s : slots_with_missing) model.visit_order.push_back(model.participating[s]);

    if (slots_with_missing.empty()) {
        model.converged = true;
        model.iteration_count = 0;
        return model;
    }

    WorkSpace w = build_workspace(train, model.participating, model.fill_means);
    const std::size_t p = model.participating.size();
    model.regressions.assign(slots_with_missing.size(), {});

    for (int round = 1; round <= max_iters; ++round) {
        double max_delta = 0.0;
        for (std::size_t k = 0; k < slots_with_missing.size(); ++k) {
            const std::size_t s = slots_with_missing[k];
            const std::size_t j = model.participating[s];
            std::vector<std::vector<double>> rows;
            std::vector<double> y;
            rows.reserve(n - w.missing_rows[s].size());
            for (std::size_t i = 0; i < n; ++i) {
                if (train.is_missing(i, j)) continue;
                std::vector<double> a;
                a.reserve(p - 1);
                for (std::size_t t = 0; t < p; ++t) {
                    if (t != s) a.push_back(w.filled.at(i, t));
                }
                rows.push_back(std::move(a));
                y.push_back(w.filled.at(i, s));
            }
            auto beta = detail::solve_ridge(rows, y, ridge_lambda);
            ColumnRegression reg;
            reg.column = j;
            reg.intercept = beta.back();
            beta.pop_back();
            reg.coef = std::move(beta);
            for (double c : reg.coef) {
                if (!std::isfinite(c)) {
                    throw DataError("imputer: non-finite coefficient for column '" +
                                    train.columns[j].name + "'");
                }
            }
            model.regressions[k] = reg;

            for (std::size_t i : w.missing_rows[s]) {
                const double v = predict(reg, w.filled, i, s);
                if (!std::isfinite(v)) {
                    throw DataError("imputer: non-finite imputation for column '" +
                                    train.columns[j].name + "'");
                }
                max_delta = std::max(max_delta, std::abs(v - w.filled.at(i, s)) / model.scale[s]);
                w.filled.at(i, s) = v;
            }
        }
        model.iteration_count = round;
        if (max_delta <= tol) {
            model.converged = true;
            break;
        }
    }
    return model;
}

Dataset transform(const ImputerModel& model, const Dataset& ds) {
    if (ds.columns != model.schema) {
        throw DataError("imputer: dataset schema does not match the fit schema");
    }
    Dataset out = ds;
    if (model.participating.empty()) return out;

    WorkSpace w = build_workspace(ds, model.participating, model.fill_means);
    bool any_missing = false;
    for (const auto& rows : w.missing_rows) {
        if (!rows.empty()) { any_missing = true; break; }
    }
    if (any_missing && !model.regressions.empty()) {
        std::vector<std::size_t> reg_slot(model.regressions.size());
        for (std::size_t k = 0; k < model.regressions.size(); ++k) {
            reg_slot[k] = w.pos_of[model.regressions[k].column];
        }
        for (int round = 1; round <= model.max_iters; ++round) {
            double max_delta = 0.0;
            for (std::size_t k = 0; k < model.regressions.size(); ++k) {
                const std::size_t s = reg_slot[k];
                for (std::size_t i : w.missing_rows[s]) {
                    const double v = predict(model.regressions[k], w.filled, i, s);
                    if (!std::isfinite(v)) {
                        throw DataError("imputer: non-finite imputation during transform");
                    }
                    max_delta = std::max(max_delta,
                                         std::abs(v - w.filled.at(i, s)) / model.scale[s]);
                    w.filled.at(i, s) = v;
                }
            }
            if (max_delta <= model.tol) break;
        }
    }

    for (std::size_t s = 0; s < model.participating.size(); ++s) {
        const std::size_t j = model.participating[s];
        const bool ordinal = model.schema[j].kind == ColumnKind::ordinal_integer;
        for (std::size_t i : w.missing_rows[s]) {
            double v = w.filled.at(i, s);
            if (ordinal) {
                v = model.rounding == ImputeRounding::ceiling ? std::ceil(v)
                                                              : static_cast<double>(std::llround(v));
            }
            out.values.at(i, j) = v;
            out.set_missing(i, j, false);
        }
    }
    return out;
}

} // namespace skewlearn
