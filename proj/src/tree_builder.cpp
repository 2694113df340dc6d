#include "tree_builder.hpp"

#include <algorithm>
#include <cmath>

namespace skewlearn::detail {

double gini_impurity(std::span<const std::size_t> counts) {
    std::size_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) return 0.0;
    double sum_sq = 0.0;
    for (auto c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

namespace {

constexpr double kMinGain = 1e-12;

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
};

void consider(SplitChoice& best, std::size_t feature, double threshold, double gain) {
    if (gain <= kMinGain) return;
    if (!best.found || gain > best.gain ||
        (gain == best.gain &&
         (feature < best.feature || (feature == best.feature && threshold < best.threshold)))) {
        best.found = true;
        best.feature = feature;
        best.threshold = threshold;
        best.gain = gain;
    }
}

// Midpoint that is guaranteed to route a left and b right under x <= t.
double split_point(double a, double b) {
    const double t = a + (b - a) / 2.0;
    return t < b ? t : a;
}

std::vector<std::size_t> sample_features(std::size_t d, std::size_t k, Rng& rng) {
    if (k == 0 || k >= d) {
        std::vector<std::size_t> all(d);
        for (std::size_t j = 0; j < d; ++j) all[j] = j;
        return all;
    }
    auto picked = rng.sample_without_replacement(d, k);
    std::sort(picked.begin(), picked.end());
    return picked;
}

// ---- classification --------------------------------------------------------

struct ClassBuilder {
    const Matrix& x;
    const std::vector<int>& y;
    const ClassTreeParams& params;
    Rng& rng;
    std::vector<double>& importance;
    double root_size = 0.0;
    Tree tree;
    std::vector<std::pair<double, int>> scratch; // (value, label)

    int build(std::vector<std::size_t>& rows, int depth) {
        const std::size_t m = rows.size();
        std::vector<std::size_t> counts(static_cast<std::size_t>(params.class_count), 0);
        for (auto r : rows) counts[static_cast<std::size_t>(y[r])]++;
        const double node_gini = gini_impurity(counts);

        const bool deep_enough = params.max_depth >= 0 && depth >= params.max_depth;
        SplitChoice best;
        if (node_gini > 0.0 && !deep_enough &&
            m >= static_cast<std::size_t>(params.min_samples_split)) {
            best = find_split(rows, counts, node_gini);
        }
        if (!best.found) {
            TreeNode leaf;
            leaf.value.resize(static_cast<std::size_t>(params.class_count));
            for (std::size_t c = 0; c < counts.size(); ++c) {
                leaf.value[c] = static_cast<double>(counts[c]) / static_cast<double>(m);
            }
            tree.nodes.push_back(std::move(leaf));
            return static_cast<int>(tree.nodes.size() - 1);
        }

        importance[best.feature] += (static_cast<double>(m) / root_size) * best.gain;
        std::vector<std::size_t> left_rows, right_rows;
        left_rows.reserve(m);
        right_rows.reserve(m);
        for (auto r : rows) {
            (x.at(r, best.feature) <= best.threshold ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        TreeNode node;
        node.feature = static_cast<int>(best.feature);
        node.threshold = best.threshold;
        tree.nodes.push_back(std::move(node));
        const int self = static_cast<int>(tree.nodes.size() - 1);
        const int left = build(left_rows, depth + 1);
        const int right = build(right_rows, depth + 1);
        tree.nodes[static_cast<std::size_t>(self)].left = left;
        tree.nodes[static_cast<std::size_t>(self)].right = right;
        return self;
    }

    SplitChoice find_split(const std::vector<std::size_t>& rows,
                           const std::vector<std::size_t>& counts, double node_gini) {
        SplitChoice best;
        const std::size_t m = rows.size();
        const std::size_t msl = static_cast<std::size_t>(params.min_samples_leaf);
        const auto features = sample_features(x.cols, params.max_features, rng);
        std::vector<std::size_t> left(counts.size());
        for (std::size_t j : features) {
            scratch.clear();
            for (auto r : rows) scratch.emplace_back(x.at(r, j), y[r]);
            std::sort(scratch.begin(), scratch.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (scratch.front().first == scratch.back().first) continue;
            std::fill(left.begin(), left.end(), 0);
            std::size_t n_left = 0;
            for (std::size_t i = 0; i + 1 < m; ++i) {
                left[static_cast<std::size_t>(scratch[i].second)]++;
                ++n_left;
                if (scratch[i].first == scratch[i + 1].first) continue;
                const std::size_t n_right = m - n_left;
                if (n_left < msl || n_right < msl) continue;
                double sum_sq_l = 0.0, sum_sq_r = 0.0;
                for (std::size_t c = 0; c < left.size(); ++c) {
                    const double pl = static_cast<double>(left[c]) / static_cast<double>(n_left);
                    const double pr = static_cast<double>(counts[c] - left[c]) /
                                      static_cast<double>(n_right);
                    sum_sq_l += pl * pl;
                    sum_sq_r += pr * pr;
                }
                const double weighted =
                    (static_cast<double>(n_left) * (1.0 - sum_sq_l) +
                     static_cast<double>(n_right) * (1.0 - sum_sq_r)) /
                    static_cast<double>(m);
                consider(best, j, split_point(scratch[i].first, scratch[i + 1].first),
                         node_gini - weighted);
            }
        }
        return best;
    }
};

// ---- residual regression ---------------------------------------------------

struct ResidualBuilder {
    const Matrix& x;
    const std::vector<double>& residual;
    const std::vector<double>& hessian;
    const ResidualTreeParams& params;
    Rng& rng;
    std::vector<double>& importance;
    Tree tree;
    std::vector<std::pair<double, std::size_t>> scratch; // (value, row)

    int build(std::vector<std::size_t>& rows, int depth) {
        const std::size_t m = rows.size();
        double sum_r = 0.0;
        for (auto r : rows) sum_r += residual[r];

        const bool deep_enough = params.max_depth >= 0 && depth >= params.max_depth;
        SplitChoice best;
        if (!deep_enough && m >= static_cast<std::size_t>(params.min_samples_split)) {
            best = find_split(rows, sum_r);
        }
        if (!best.found) {
            double sum_h = 0.0;
            for (auto r : rows) sum_h += hessian[r];
            TreeNode leaf;
            leaf.value = {sum_r / (sum_h + 1e-16)};
            tree.nodes.push_back(std::move(leaf));
            return static_cast<int>(tree.nodes.size() - 1);
        }

        importance[best.feature] += best.gain;
        std::vector<std::size_t> left_rows, right_rows;
        for (auto r : rows) {
            (x.at(r, best.feature) <= best.threshold ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        TreeNode node;
        node.feature = static_cast<int>(best.feature);
        node.threshold = best.threshold;
        tree.nodes.push_back(std::move(node));
        const int self = static_cast<int>(tree.nodes.size() - 1);
        const int left = build(left_rows, depth + 1);
        const int right = build(right_rows, depth + 1);
        tree.nodes[static_cast<std::size_t>(self)].left = left;
        tree.nodes[static_cast<std::size_t>(self)].right = right;
        return self;
    }

    SplitChoice find_split(const std::vector<std::size_t>& rows, double sum_r) {
        SplitChoice best;
        const std::size_t m = rows.size();
        const std::size_t msl = static_cast<std::size_t>(params.min_samples_leaf);
        const auto features = sample_features(x.cols, params.max_features, rng);
        const double parent_score = sum_r * sum_r / static_cast<double>(m);
        for (std::size_t j : features) {
            scratch.clear();
            for (auto r : rows) scratch.emplace_back(x.at(r, j), r);
            std::sort(scratch.begin(), scratch.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (scratch.front().first == scratch.back().first) continue;
            double g_left = 0.0;
            std::size_t n_left = 0;
            for (std::size_t i = 0; i + 1 < m; ++i) {
                g_left += residual[scratch[i].second];
                ++n_left;
                if (scratch[i].first == scratch[i + 1].first) continue;
                const std::size_t n_right = m - n_left;
                if (n_left < msl || n_right < msl) continue;
                const double g_right = sum_r - g_left;
                const double score = g_left * g_left / static_cast<double>(n_left) +
                                     g_right * g_right / static_cast<double>(n_right);
                consider(best, j, split_point(scratch[i].first, scratch[i + 1].first),
                         score - parent_score);
            }
        }
        return best;
    }
};

// ---- second-order ----------------------------------------------------------

struct XgbBuilder {
    const Matrix& x;
    const std::vector<double>& grad;
    const std::vector<double>& hess;
    const std::vector<std::size_t>& features;
    const XgbTreeParams& params;
    std::vector<double>& importance;
    Tree tree;
    std::vector<std::pair<double, std::size_t>> scratch;

    int build(std::vector<std::size_t>& rows, int depth) {
        double g_sum = 0.0, h_sum = 0.0;
        for (auto r : rows) {
            g_sum += grad[r];
            h_sum += hess[r];
        }
        const bool deep_enough = params.max_depth >= 0 && depth >= params.max_depth;
        SplitChoice best;
        if (!deep_enough && rows.size() >= 2) best = find_split(rows, g_sum, h_sum);
        if (!best.found) {
            TreeNode leaf;
            leaf.value = {xgb_leaf_weight(g_sum, h_sum, params.reg_lambda)};
            tree.nodes.push_back(std::move(leaf));
            return static_cast<int>(tree.nodes.size() - 1);
        }

        importance[best.feature] += best.gain;
        std::vector<std::size_t> left_rows, right_rows;
        for (auto r : rows) {
            (x.at(r, best.feature) <= best.threshold ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        TreeNode node;
        node.feature = static_cast<int>(best.feature);
        node.threshold = best.threshold;
        tree.nodes.push_back(std::move(node));
        const int self = static_cast<int>(tree.nodes.size() - 1);
        const int left = build(left_rows, depth + 1);
        const int right = build(right_rows, depth + 1);
        tree.nodes[static_cast<std::size_t>(self)].left = left;
        tree.nodes[static_cast<std::size_t>(self)].right = right;
        return self;
    }

    SplitChoice find_split(const std::vector<std::size_t>& rows, double g_sum, double h_sum) {
        SplitChoice best;
        const std::size_t m = rows.size();
        for (std::size_t j : features) {
            scratch.clear();
            for (auto r : rows) scratch.emplace_back(x.at(r, j), r);
            std::sort(scratch.begin(), scratch.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (scratch.front().first == scratch.back().first) continue;
            double g_left = 0.0, h_left = 0.0;
            for (std::size_t i = 0; i + 1 < m; ++i) {
                g_left += grad[scratch[i].second];
                h_left += hess[scratch[i].second];
                if (scratch[i].first == scratch[i + 1].first) continue;
                const double h_right = h_sum - h_left;
                if (h_left < params.min_child_weight || h_right < params.min_child_weight) {
                    continue;
                }
                const double gain = xgb_split_gain(g_left, h_left, g_sum - g_left, h_right,
                                                   params.reg_lambda, params.gamma_penalty);
                consider(best, j, split_point(scratch[i].first, scratch[i + 1].first), gain);
            }
        }
        return best;
    }
};

} // namespace

double xgb_leaf_weight(double grad_sum, double hess_sum, double reg_lambda) {
    return -grad_sum / (hess_sum + reg_lambda);
}

double xgb_split_gain(double gl, double hl, double gr, double hr, double reg_lambda,
                      double gamma_penalty) {
    const double g = gl + gr;
    const double h = hl + hr;
    return 0.5 * (gl * gl / (hl + reg_lambda) + gr * gr / (hr + reg_lambda) -
                  g * g / (h + reg_lambda)) -
           gamma_penalty;
}

Tree build_classification_tree(const Matrix& x, const std::vector<int>& y,
                               const std::vector<std::size_t>& rows, const ClassTreeParams& params,
                               Rng& rng, std::vector<double>& importance) {
    ClassBuilder builder{x, y, params, rng, importance, 0.0, {}, {}};
    builder.root_size = static_cast<double>(rows.size());
    std::vector<std::size_t> work = rows;
    builder.build(work, 0);
    return std::move(builder.tree);
}

Tree build_residual_tree(const Matrix& x, const std::vector<double>& residual,
                         const std::vector<double>& hessian, const std::vector<std::size_t>& rows,
                         const ResidualTreeParams& params, Rng& rng,
                         std::vector<double>& importance) {
    ResidualBuilder builder{x, residual, hessian, params, rng, importance, {}, {}};
    std::vector<std::size_t> work = rows;
    builder.build(work, 0);
    return std::move(builder.tree);
}

Tree build_xgb_tree(const Matrix& x, const std::vector<double>& grad,
                    const std::vector<double>& hess, const std::vector<std::size_t>& rows,
                    const std::vector<std::size_t>& features, const XgbTreeParams& params,
                    std::vector<double>& importance) {
    XgbBuilder builder{x, grad, hess, features, params, importance, {}, {}};
    std::vector<std::size_t> work = rows;
    builder.build(work, 0);
    return std::move(builder.tree);
}

} // namespace skewlearn::detail
