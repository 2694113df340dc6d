#include <algorithm>
#include <cmath>
#include <limits>

#include "skewlearn/learners.hpp"

namespace skewlearn {
namespace detail {

double logreg_loss_grad(const Matrix& weights, const std::vector<double>& intercepts,
                        const Dataset& data, double c_reg, Matrix* grad_w,
                        std::vector<double>* grad_b) {
    const std::size_t n = data.n_rows();
    const std::size_t d = data.n_cols();
    const std::size_t c_count = weights.rows;
    if (grad_w) *grad_w = Matrix(c_count, d, 0.0);
    if (grad_b) grad_b->assign(c_count, 0.0);

    double loss = 0.0;
    std::vector<double> z(c_count);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.values.row(i);
        double max_z = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < c_count; ++c) {
            double v = intercepts[c];
            const auto w = weights.row(c);
            for (std::size_t j = 0; j < d; ++j) v += w[j] * x[j];
            z[c] = v;
            max_z = std::max(max_z, v);
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < c_count; ++c) {
            z[c] = std::exp(z[c] - max_z);
            sum += z[c];
        }
        const std::size_t yi = static_cast<std::size_t>(data.labels[i]);
        loss += -std::log(z[yi] / sum);
        if (grad_w) {
            for (std::size_t c = 0; c < c_count; ++c) {
                const double p = z[c] / sum;
                const double g = p - (c == yi ? 1.0 : 0.0);
                auto gw = grad_w->row(c);
                for (std::size_t j = 0; j < d; ++j) gw[j] += g * x[j];
                (*grad_b)[c] += g;
            }
        }
    }
    // L2 penalty 1/(2c) * ||W||^2 on the weights only.
    double sq = 0.0;
    for (double w : weights.data) sq += w * w;
    loss += sq / (2.0 * c_reg);
    if (grad_w) {
        for (std::size_t k = 0; k < weights.data.size(); ++k) {
            grad_w->data[k] += weights.data[k] / c_reg;
        }
    }
    return loss;
}

TrainedModel fit_logreg(const LearnerSpec& spec, const Dataset& train) {
    const LogregConfig cfg = resolve_logreg(spec.params);
    const std::size_t d = train.n_cols();
    const std::size_t c_count = static_cast<std::size_t>(train.class_count);

    LogregModel model;
    model.weights = Matrix(c_count, d, 0.0);
    model.intercepts.assign(c_count, 0.0);

    Matrix grad_w;
    std::vector<double> grad_b;
    double loss = logreg_loss_grad(model.weights, model.intercepts, train, cfg.c, &grad_w, &grad_b);
    double step = 1.0 / static_cast<double>(train.n_rows());

    constexpr double kGradTol = 1e-6;
    constexpr double kArmijo = 1e-4;
    int iter = 0;
    for (; iter < cfg.max_iterations; ++iter) {
        double grad_norm = 0.0;
        double grad_sq = 0.0;
        for (double g : grad_w.data) {
            grad_norm = std::max(grad_norm, std::abs(g));
            grad_sq += g * g;
        }
        for (double g : grad_b) {
            grad_norm = std::max(grad_norm, std::abs(g));
            grad_sq += g * g;
        }
        model.final_grad_norm = grad_norm;
        if (grad_norm <= kGradTol) break;

        // Backtracking line search along the steepest descent direction.
        Matrix w_new;
        std::vector<double> b_new;
        double t = step * 2.0;
        bool accepted = false;
        for (int back = 0; back < 60; ++back) {
            w_new = model.weights;
            b_new = model.intercepts;
            for (std::size_t k = 0; k < w_new.data.size(); ++k) {
                w_new.data[k] -= t * grad_w.data[k];
            }
            for (std::size_t c = 0; c < c_count; ++c) b_new[c] -= t * grad_b[c];
            const double trial = logreg_loss_grad(w_new, b_new, train, cfg.c, nullptr, nullptr);
            if (std::isfinite(trial) && trial <= loss - kArmijo * t * grad_sq) {
                accepted = true;
                loss = trial;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break; // no further progress at machine precision
        step = t;
        model.weights = std::move(w_new);
        model.intercepts = std::move(b_new);
        loss = logreg_loss_grad(model.weights, model.intercepts, train, cfg.c, &grad_w, &grad_b);
        if (!std::isfinite(loss)) throw TrainError("logreg: loss diverged");
    }
    model.iterations = iter;

    TrainedModel out;
    out.family = Family::logreg;
    out.feature_count = static_cast<int>(d);
    out.class_count = static_cast<int>(c_count);
    out.state = std::move(model);
    return out;
}

} // namespace detail
} // namespace skewlearn
