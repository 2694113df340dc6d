#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "skewlearn/common.hpp"

namespace skewlearn {

/// Flattened decision tree node. Internal nodes route x[feature] <= threshold
/// to `left`; leaves (feature == -1) carry `value` — a class-proportion
/// histogram for classification trees, a single additive score for boosting
/// regression trees.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> value;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct Tree {
    std::vector<TreeNode> nodes; // root at index 0

    const std::vector<double>& leaf_value(std::span<const double> x) const {
        int idx = 0;
        while (!nodes[static_cast<std::size_t>(idx)].is_leaf()) {
            const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
            idx = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(idx)].value;
    }

    double predict_scalar(std::span<const double> x) const { return leaf_value(x)[0]; }

    bool operator==(const Tree&) const = default;
};

} // namespace skewlearn
