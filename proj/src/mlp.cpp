#include <algorithm>
#include <cmath>

#include "skewlearn/learners.hpp"

namespace skewlearn {
namespace detail {

double mlp_loss_grad(const MlpNet& net, const Dataset& data,
                     const std::vector<std::size_t>& rows, MlpNet* grad) {
    const std::size_t d = net.w1.cols;
    const std::size_t hidden = net.w1.rows;
    const std::size_t c_count = net.w2.rows;
    const double inv_m = 1.0 / static_cast<double>(rows.size());

    if (grad) {
        grad->w1 = Matrix(hidden, d, 0.0);
        grad->b1.assign(hidden, 0.0);
        grad->w2 = Matrix(c_count, hidden, 0.0);
        grad->b2.assign(c_count, 0.0);
    }

    double loss = 0.0;
    std::vector<double> z1(hidden), a1(hidden), p(c_count), dz1(hidden);
    for (std::size_t r : rows) {
        const auto x = data.values.row(r);
        for (std::size_t h = 0; h < hidden; ++h) {
            double z = net.b1[h];
            const auto w = net.w1.row(h);
            for (std::size_t j = 0; j < d; ++j) z += w[j] * x[j];
            z1[h] = z;
            a1[h] = z > 0.0 ? z : 0.0;
        }
        for (std::size_t c = 0; c < c_count; ++c) {
            double z = net.b2[c];
            const auto w = net.w2.row(c);
            for (std::size_t h = 0; h < hidden; ++h) z += w[h] * a1[h];
            p[c] = z;
        }
        softmax_inplace(p);
        const std::size_t y = static_cast<std::size_t>(data.labels[r]);
        loss += -std::log(std::max(p[y], 1e-300)) * inv_m;
        if (!grad) continue;

        std::fill(dz1.begin(), dz1.end(), 0.0);
        for (std::size_t c = 0; c < c_count; ++c) {
            const double dz2 = (p[c] - (c == y ? 1.0 : 0.0)) * inv_m;
            auto gw2 = grad->w2.row(c);
            const auto w2 = net.w2.row(c);
            for (std::size_t h = 0; h < hidden; ++h) {
                gw2[h] += dz2 * a1[h];
                dz1[h] += dz2 * w2[h];
            }
            grad->b2[c] += dz2;
        }
        for (std::size_t h = 0; h < hidden; ++h) {
            if (z1[h] <= 0.0) continue;
            auto gw1 = grad->w1.row(h);
            for (std::size_t j = 0; j < d; ++j) gw1[j] += dz1[h] * x[j];
            grad->b1[h] += dz1[h];
        }
    }
    return loss;
}

namespace {

void glorot_init(Matrix& w, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
    for (double& v : w.data) v = rng.uniform(-limit, limit);
}

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
};

void adam_step(std::vector<double>& params, const std::vector<double>& grad, AdamState& state,
               double lr, double bias1, double bias2) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    for (std::size_t k = 0; k < params.size(); ++k) {
        state.m[k] = kBeta1 * state.m[k] + (1.0 - kBeta1) * grad[k];
        state.v[k] = kBeta2 * state.v[k] + (1.0 - kBeta2) * grad[k] * grad[k];
        const double m_hat = state.m[k] / bias1;
        const double v_hat = state.v[k] / bias2;
        params[k] -= lr * m_hat / (std::sqrt(v_hat) + kEps);
    }
}

MlpNet train_member(const MlpConfig& cfg, const Dataset& train,
                    const std::vector<std::size_t>& rows, Rng& rng) {
    const std::size_t d = train.n_cols();
    const std::size_t hidden = static_cast<std::size_t>(cfg.hidden_units);
    const std::size_t c_count = static_cast<std::size_t>(train.class_count);

    MlpNet net;
    net.w1 = Matrix(hidden, d);
    net.b1.assign(hidden, 0.0);
    net.w2 = Matrix(c_count, hidden);
    net.b2.assign(c_count, 0.0);
    glorot_init(net.w1, rng);
    glorot_init(net.w2, rng);

    AdamState s_w1{std::vector<double>(net.w1.data.size(), 0.0),
                   std::vector<double>(net.w1.data.size(), 0.0)};
    AdamState s_b1{std::vector<double>(hidden, 0.0), std::vector<double>(hidden, 0.0)};
    AdamState s_w2{std::vector<double>(net.w2.data.size(), 0.0),
                   std::vector<double>(net.w2.data.size(), 0.0)};
    AdamState s_b2{std::vector<double>(c_count, 0.0), std::vector<double>(c_count, 0.0)};

    MlpNet grad;
    constexpr double kGradTol = 1e-6;
    for (int t = 1; t <= cfg.max_iteration; ++t) {
        const double loss = mlp_loss_grad(net, train, rows, &grad);
        if (!std::isfinite(loss)) throw TrainError("mlp_bagging: loss diverged");
        double grad_norm = 0.0;
        for (double g : grad.w1.data) grad_norm = std::max(grad_norm, std::abs(g));
        for (double g : grad.b1) grad_norm = std::max(grad_norm, std::abs(g));
        for (double g : grad.w2.data) grad_norm = std::max(grad_norm, std::abs(g));
        for (double g : grad.b2) grad_norm = std::max(grad_norm, std::abs(g));
        if (grad_norm <= kGradTol) break;

        const double bias1 = 1.0 - std::pow(0.9, t);
        const double bias2 = 1.0 - std::pow(0.999, t);
        adam_step(net.w1.data, grad.w1.data, s_w1, cfg.initial_learning_rate, bias1, bias2);
        adam_step(net.b1, grad.b1, s_b1, cfg.initial_learning_rate, bias1, bias2);
        adam_step(net.w2.data, grad.w2.data, s_w2, cfg.initial_learning_rate, bias1, bias2);
        adam_step(net.b2, grad.b2, s_b2, cfg.initial_learning_rate, bias1, bias2);
    }
    return net;
}

} // namespace

TrainedModel fit_mlp_bagging(const LearnerSpec& spec, const Dataset& train) {
    const MlpConfig cfg = resolve_mlp(spec.params);
    const std::size_t n = train.n_rows();

    MlpBaggingModel model;
    model.hidden_units = cfg.hidden_units;
    model.members.reserve(static_cast<std::size_t>(cfg.n_estimators));
    for (int b = 0; b < cfg.n_estimators; ++b) {
        Rng rng(derive_seed(spec.seed, {seed_tag::member, static_cast<std::uint64_t>(b)}));
        std::vector<std::size_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = rng.uniform_index(n);
        model.members.push_back(train_member(cfg, train, rows, rng));
    }

    TrainedModel out;
    out.family = Family::mlp_bagging;
    out.feature_count = static_cast<int>(train.n_cols());
    out.class_count = train.class_count;
    out.state = std::move(model);
    return out;
}

} // namespace detail
} // namespace skewlearn
