#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "skewlearn/learners.hpp"
#include "skewlearn/resample.hpp"
#include "skewlearn/tabular.hpp"

namespace skewlearn {

enum class SelectionMetric {
    weighted_f1,
    weighted_auc,
};

std::string to_string(SelectionMetric m);
SelectionMetric selection_metric_from_string(const std::string& s);

/// Cartesian parameter grid; the first declared axis varies slowest.
struct HyperGrid {
    Family family = Family::random_forest;
    std::vector<std::pair<std::string, std::vector<ParamValue>>> axes;

    std::size_t size() const;
    ParamMap candidate(std::size_t index) const;
    void validate() const;
};

struct CandidateResult {
    ParamMap params;
    std::vector<double> fold_scores; // -inf where the fit failed
    double mean_score = 0.0;         // -inf when disqualified
    bool failed = false;
    std::string failure;
};

struct SearchResult {
    std::vector<CandidateResult> candidates; // grid enumeration order
    std::size_t best_index = 0;
    SelectionMetric metric = SelectionMetric::weighted_f1;
    bool leakage_audit_passed = true;
};

/// Exhaustive CV over the grid: per candidate and fold the training side is
/// resampled, the model fit, and the untouched validation fold scored; the
/// mean across folds ranks candidates (ties to the earlier candidate).
/// Individual fit failures disqualify the candidate instead of aborting.
/// Unit seeds derive from (seed, candidate, fold), so results do not depend
/// on the thread schedule.
SearchResult grid_search(const HyperGrid& grid, const Dataset& train, const FoldPlan& folds,
                         const ResampleSpec& resample_spec, SelectionMetric metric,
                         std::uint64_t seed, int threads = 1);

/// Recomputes one (candidate, fold) validation score exactly as grid_search
/// recorded it; used for audit/reproduction.
double evaluate_candidate_fold(const HyperGrid& grid, std::size_t candidate_index,
                               const Dataset& train, const FoldPlan& folds, int fold,
                               const ResampleSpec& resample_spec, SelectionMetric metric,
                               std::uint64_t seed);

/// The LearnerSpec grid_search would fit for this candidate/fold pair.
LearnerSpec candidate_spec(const HyperGrid& grid, std::size_t candidate_index, std::uint64_t seed,
                           int fold);

} // namespace skewlearn
