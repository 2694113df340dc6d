#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skewlearn/tabular.hpp"

namespace skewlearn {

enum class ResampleStrategy {
    none,
    random_over,
    smote,
};

std::string to_string(ResampleStrategy s);
ResampleStrategy resample_strategy_from_string(const std::string& s);

/// Every minority class is grown to the majority class count
/// (target = match_majority, the only supported target).
struct ResampleSpec {
    ResampleStrategy strategy = ResampleStrategy::random_over;
    int k_neighbors = 5; // SMOTE only; must be < each synthesized class size
    std::uint64_t seed = 0;
};

struct RowProvenance {
    enum class Kind { original, duplicate, synthetic };
    Kind kind = Kind::original;
    std::size_t source_i = 0; // duplicate: copied row; synthetic: base row
    std::size_t source_j = 0; // synthetic: neighbor row
    double delta = 0.0;       // synthetic: interpolation coefficient in [0,1)
};

/// Balanced training set plus a per-row audit trail. Original rows come
/// first in input order; generated rows follow, grouped by class id.
struct ResampledSet {
    Dataset dataset;
    std::vector<RowProvenance> provenance;
};

/// Dispatch on spec.strategy; `none` returns the input with all-original
/// provenance.
ResampledSet resample(const Dataset& train, const ResampleSpec& spec);

/// Pads each minority class by sampling its own rows uniformly with
/// replacement until every class matches the majority count.
ResampledSet random_oversample(const Dataset& train, const ResampleSpec& spec);

/// Synthetic rows are x_i + delta * (x_j - x_i) with x_j drawn uniformly from
/// the k nearest same-class neighbors of x_i under Euclidean distance
/// (ties broken by lower row index) and delta ~ Uniform[0,1). Requires a
/// complete numeric matrix.
ResampledSet smote(const Dataset& train, const ResampleSpec& spec);

} // namespace skewlearn
