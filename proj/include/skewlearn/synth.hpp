#pragma once

#include <cstdint>
#include <vector>

#include "skewlearn/tabular.hpp"

namespace skewlearn {

/// Synthetic imbalanced-dataset generator: Gaussian class clusters with
/// controllable separation, optional ordinal discretization to a 1-5 scale,
/// and MCAR missingness (i.i.d. Bernoulli per cell, so the realized missing
/// count fluctuates binomially around rate * cells).
struct SynthSpec {
    std::vector<std::size_t> class_counts;
    std::size_t dims = 10;
    double separation = 1.0;       // distance between adjacent class means
    double ordinal_fraction = 0.0; // leading fraction of columns made ordinal
    double missing_rate = 0.0;
    std::uint64_t seed = 0;
    std::string name = "synth";

    void validate() const;
};

Dataset generate(const SynthSpec& spec);

} // namespace skewlearn
