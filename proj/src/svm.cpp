#include <algorithm>
#include <cmath>

#include "skewlearn/learners.hpp"

namespace skewlearn {
namespace detail {

namespace {

// Full kernel matrix when it fits comfortably in memory (shared across the
// one-vs-rest machines); otherwise rows are recomputed on demand.
class KernelProvider {
public:
    KernelProvider(const Matrix& x, double gamma)
        : x_(x), gamma_(gamma), n_(x.rows), cached_(n_ * n_ <= kMaxCachedEntries) {
        if (cached_) {
            full_.resize(n_ * n_);
            for (std::size_t i = 0; i < n_; ++i) {
                full_[i * n_ + i] = 1.0;
                for (std::size_t j = i + 1; j < n_; ++j) {
                    const double k = rbf_kernel(x_.row(i), x_.row(j), gamma_);
                    full_[i * n_ + j] = k;
                    full_[j * n_ + i] = k;
                }
            }
        }
    }

    std::span<const double> row(std::size_t i, std::vector<double>& scratch) const {
        if (cached_) return {full_.data() + i * n_, n_};
        scratch.resize(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            scratch[j] = rbf_kernel(x_.row(i), x_.row(j), gamma_);
        }
        return scratch;
    }

    std::size_t size() const { return n_; }

private:
    static constexpr std::size_t kMaxCachedEntries = 40'000'000; // 320 MB of doubles

    const Matrix& x_;
    double gamma_;
    std::size_t n_;
    bool cached_;
    std::vector<double> full_;
};

struct SmoState {
    const KernelProvider& kernel;
    const std::vector<double>& y;
    double c;
    double tol;
    std::vector<double> alpha;
    std::vector<double> u; // sum_j alpha_j y_j K(i, j), bias excluded
    double b = 0.0;
    std::size_t updates = 0;
    std::size_t probe = 0; // rotating start for the fallback scans
    std::vector<double> scratch1, scratch2;

    explicit SmoState(const KernelProvider& k, const std::vector<double>& labels, double c_,
                      double tol_)
        : kernel(k), y(labels), c(c_), tol(tol_), alpha(k.size(), 0.0), u(k.size(), 0.0) {}

    double error(std::size_t i) const { return u[i] + b - y[i]; }

    bool non_bound(std::size_t i) const { return alpha[i] > 0.0 && alpha[i] < c; }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) return false;
        const double alph1 = alpha[i1], alph2 = alpha[i2];
        const double y1 = y[i1], y2 = y[i2];
        const double e1 = error(i1), e2 = error(i2);
        const double s = y1 * y2;
        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, alph2 - alph1);
            hi = std::min(c, c + alph2 - alph1);
        } else {
            lo = std::max(0.0, alph1 + alph2 - c);
            hi = std::min(c, alph1 + alph2);
        }
        if (lo >= hi) return false;

        const auto row1 = kernel.row(i1, scratch1);
        const double k11 = row1[i1], k12 = row1[i2];
        const auto row2 = kernel.row(i2, scratch2);
        const double k22 = row2[i2];
        const double eta = k11 + k22 - 2.0 * k12;

        double a2;
        constexpr double kEps = 1e-8;
        if (eta > 1e-12) {
            a2 = std::clamp(alph2 + y2 * (e1 - e2) / eta, lo, hi);
        } else {
            // Objective at the segment endpoints (duplicated rows give eta=0).
            const double f1 = y1 * (e1 - b) - alph1 * k11 - s * alph2 * k12;
            const double f2 = y2 * (e2 - b) - s * alph1 * k12 - alph2 * k22;
            const double l1 = alph1 + s * (alph2 - lo);
            const double h1 = alph1 + s * (alph2 - hi);
            const double psi_l = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 +
                                 s * lo * l1 * k12;
            const double psi_h = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 +
                                 s * hi * h1 * k12;
            if (psi_l < psi_h - kEps) a2 = lo;
            else if (psi_l > psi_h + kEps) a2 = hi;
            else return false;
        }
        if (std::abs(a2 - alph2) < kEps * (a2 + alph2 + kEps)) return false;
        const double a1 = alph1 + s * (alph2 - a2);

        const double d1 = y1 * (a1 - alph1);
        const double d2 = y2 * (a2 - alph2);
        const double b1 = b - e1 - d1 * k11 - d2 * k12;
        const double b2 = b - e2 - d1 * k12 - d2 * k22;
        if (a1 > 0.0 && a1 < c) b = b1;
        else if (a2 > 0.0 && a2 < c) b = b2;
        else b = 0.5 * (b1 + b2);

        for (std::size_t k = 0; k < u.size(); ++k) {
            u[k] += d1 * row1[k] + d2 * row2[k];
        }
        alpha[i1] = a1;
        alpha[i2] = a2;
        ++updates;
        return true;
    }

    bool examine(std::size_t i2) {
        const double e2 = error(i2);
        const double r2 = e2 * y[i2];
        const bool violates = (r2 < -tol && alpha[i2] < c) || (r2 > tol && alpha[i2] > 0.0);
        if (!violates) return false;

        const std::size_t n = alpha.size();
        // Second-choice heuristic: the non-bound point with the largest |E1-E2|.
        std::size_t best = n;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!non_bound(i)) continue;
            const double gap = std::abs(error(i) - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best < n && take_step(best, i2)) return true;
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t i1 = (probe + k) % n;
            if (non_bound(i1) && take_step(i1, i2)) {
                probe = i1 + 1;
                return true;
            }
        }
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t i1 = (probe + k) % n;
            if (take_step(i1, i2)) {
                probe = i1 + 1;
                return true;
            }
        }
        return false;
    }
};

SvmSolution solve_with_kernel(const KernelProvider& kernel, const std::vector<double>& y, double c,
                              double tol) {
    SmoState state(kernel, y, c, tol);
    const std::size_t n = y.size();
    constexpr std::size_t kMaxUpdates = 2'000'000;
    bool examine_all = true;
    std::size_t changed = 0;
    while (changed > 0 || examine_all) {
        changed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!examine_all && !state.non_bound(i)) continue;
            if (state.examine(i)) ++changed;
            if (state.updates > kMaxUpdates) {
                throw TrainError("svm_rbf: SMO did not converge");
            }
        }
        if (examine_all) examine_all = false;
        else if (changed == 0) examine_all = true;
    }
    SvmSolution out;
    out.alpha = std::move(state.alpha);
    out.bias = state.b;
    out.updates = state.updates;
    return out;
}

} // namespace

SvmSolution solve_svm_binary(const Matrix& x, const std::vector<double>& y, double c, double gamma,
                             double kkt_tol) {
    if (x.rows != y.size()) throw DataError("svm: label length mismatch");
    KernelProvider kernel(x, gamma);
    return solve_with_kernel(kernel, y, c, kkt_tol);
}

TrainedModel fit_svm(const LearnerSpec& spec, const Dataset& train) {
    const SvmConfig cfg = resolve_svm(spec.params);
    const std::size_t n = train.n_rows();
    const std::size_t d = train.n_cols();

    KernelProvider kernel(train.values, cfg.gamma);
    SvmOvrModel model;
    model.gamma = cfg.gamma;
    std::vector<double> y(n);
    for (int c = 0; c < train.class_count; ++c) {
        for (std::size_t i = 0; i < n; ++i) y[i] = train.labels[i] == c ? 1.0 : -1.0;
        const SvmSolution sol = solve_with_kernel(kernel, y, cfg.c, cfg.kkt_tol);

        SvmBinaryModel bin;
        bin.bias = sol.bias;
        std::vector<std::size_t> sv_rows;
        for (std::size_t i = 0; i < n; ++i) {
            if (sol.alpha[i] > 1e-12) sv_rows.push_back(i);
        }
        bin.support_vectors = Matrix(sv_rows.size(), d);
        bin.coef.resize(sv_rows.size());
        for (std::size_t s = 0; s < sv_rows.size(); ++s) {
            const std::size_t i = sv_rows[s];
            std::copy(train.values.row(i).begin(), train.values.row(i).end(),
                      bin.support_vectors.row(s).begin());
            bin.coef[s] = sol.alpha[i] * y[i];
        }
        model.machines.push_back(std::move(bin));
    }

    TrainedModel out;
    out.family = Family::svm_rbf;
    out.feature_count = static_cast<int>(d);
    out.class_count = train.class_count;
    out.state = std::move(model);
    return out;
}

} // namespace detail
} // namespace skewlearn
