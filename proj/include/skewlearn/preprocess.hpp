#pragma once

#include <map>
#include <string>
#include <vector>

#include "skewlearn/tabular.hpp"

namespace skewlearn {

enum class UnknownTokenPolicy {
    error,
    reserve_code, // unseen tokens map to code V (vocabulary size)
};

/// Per-categorical-column token -> dense code map, codes assigned 0..V-1 in
/// lexicographic token order. A missing categorical cell is treated as the
/// empty token and participates in the vocabulary like any other value.
struct EncoderModel {
    std::vector<std::size_t> columns;                   // categorical column indices
    std::vector<std::map<std::string, int>> codes;      // parallel to columns
    UnknownTokenPolicy policy = UnknownTokenPolicy::error;
};

/// Per-numeric/ordinal-column mean and population standard deviation,
/// computed on the training split. Zero-variance columns are flagged
/// constant and transform as x - mean.
struct ScalerModel {
    std::vector<std::size_t> columns;
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<bool> constant;
};

EncoderModel fit_encoder(const Dataset& train,
                         UnknownTokenPolicy policy = UnknownTokenPolicy::error);

/// Requires the numeric/ordinal cells to be complete (post-imputation).
ScalerModel fit_scaler(const Dataset& train);

/// Replaces categorical tokens by codes and standardizes numeric/ordinal
/// columns; the result is a complete numeric matrix ready for resampling and
/// learners. Codes themselves are left unscaled.
Dataset apply(const EncoderModel& encoder, const ScalerModel& scaler, const Dataset& ds);

} // namespace skewlearn
