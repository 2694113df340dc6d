#include "skewlearn/search.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "skewlearn/metrics.hpp"

namespace skewlearn {

std::string to_string(SelectionMetric m) {
    return m == SelectionMetric::weighted_f1 ? "weighted_f1" : "weighted_auc";
}

SelectionMetric selection_metric_from_string(const std::string& s) {
    if (s == "weighted_f1") return SelectionMetric::weighted_f1;
    if (s == "weighted_auc") return SelectionMetric::weighted_auc;
    throw ConfigError("unknown selection metric '" + s + "'");
}

std::size_t HyperGrid::size() const {
    std::size_t n = 1;
    for (const auto& [key, values] : axes) n *= values.size();
    return n;
}

void HyperGrid::validate() const {
    for (const auto& [key, values] : axes) {
        if (values.empty()) {
            throw ConfigError("grid axis '" + key + "' has no candidate values");
        }
    }
    // Unknown keys and per-value range errors surface before any fitting;
    // there are no cross-key constraints, so per-axis probes suffice.
    const ParamMap base = axes.empty() ? ParamMap{} : candidate(0);
    validate_params(family, base);
    for (const auto& [key, values] : axes) {
        for (const auto& v : values) {
            ParamMap probe = base;
            probe[key] = v;
            validate_params(family, probe);
        }
    }
}

ParamMap HyperGrid::candidate(std::size_t index) const {
    if (index >= size()) throw ConfigError("grid candidate index out of range");
    ParamMap params;
    std::size_t stride = size();
    for (const auto& [key, values] : axes) {
        stride /= values.size();
        params[key] = values[(index / stride) % values.size()];
    }
    return params;
}

LearnerSpec candidate_spec(const HyperGrid& grid, std::size_t candidate_index, std::uint64_t seed,
                           int fold) {
    LearnerSpec spec;
    spec.family = grid.family;
    spec.params = grid.candidate(candidate_index);
    spec.seed = derive_seed(seed, {seed_tag::search_fit, candidate_index,
                                   static_cast<std::uint64_t>(fold)});
    return spec;
}

namespace {

double score_model(const TrainedModel& model, const Dataset& val, SelectionMetric metric) {
    if (metric == SelectionMetric::weighted_f1) {
        const auto preds = predict_all(model, val);
        return prf(confusion(val.labels, preds, model.class_count)).weighted_f1;
    }
    const auto result = roc_auc(val.labels, score_all(model, val));
    if (!result.any_defined) throw DataError("grid search: AUC undefined on validation fold");
    return result.weighted_auc;
}

struct FoldData {
    Dataset train_part;
    Dataset val_part;
};

std::vector<FoldData> split_folds(const Dataset& train, const FoldPlan& folds) {
    folds.validate(train.n_rows());
    std::vector<FoldData> out;
    out.reserve(static_cast<std::size_t>(folds.k));
    for (int f = 0; f < folds.k; ++f) {
        std::vector<std::size_t> train_rows, val_rows;
        for (std::size_t i = 0; i < train.n_rows(); ++i) {
            (folds.assignments[i] == f ? val_rows : train_rows).push_back(i);
        }
        FoldData fd;
        fd.train_part = subset_rows(train, train_rows);
        fd.val_part = subset_rows(train, val_rows);
        std::vector<std::size_t> seen(static_cast<std::size_t>(train.class_count), 0);
        for (int y : fd.train_part.labels) seen[static_cast<std::size_t>(y)]++;
        for (std::size_t c = 0; c < seen.size(); ++c) {
            if (seen[c] == 0) {
                throw DataError("grid search: class " + std::to_string(c) +
                                " is absent from the training side of fold " + std::to_string(f));
            }
        }
        out.push_back(std::move(fd));
    }
    return out;
}

double run_unit(const HyperGrid& grid, std::size_t candidate_index, const FoldData& fd, int fold,
                const ResampleSpec& resample_spec, SelectionMetric metric, std::uint64_t seed,
                std::string* failure) {
    try {
        ResampleSpec rs = resample_spec;
        rs.seed = derive_seed(seed, {seed_tag::search_resample, candidate_index,
                                     static_cast<std::uint64_t>(fold)});
        const ResampledSet resampled = resample(fd.train_part, rs);
        // Leakage guard: generated rows may reference training-fold rows only.
        for (const auto& prov : resampled.provenance) {
            if (prov.kind != RowProvenance::Kind::original &&
                (prov.source_i >= fd.train_part.n_rows() ||
                 prov.source_j >= fd.train_part.n_rows())) {
                throw DataError("grid search: resampling referenced a row outside the "
                                "training fold");
            }
        }
        const LearnerSpec spec = candidate_spec(grid, candidate_index, seed, fold);
        const TrainedModel model = fit(spec, resampled.dataset);
        return score_model(model, fd.val_part, metric);
    } catch (const Error& e) {
        if (failure && failure->empty()) *failure = e.what();
        return -std::numeric_limits<double>::infinity();
    }
}

} // namespace

double evaluate_candidate_fold(const HyperGrid& grid, std::size_t candidate_index,
                               const Dataset& train, const FoldPlan& folds, int fold,
                               const ResampleSpec& resample_spec, SelectionMetric metric,
                               std::uint64_t seed) {
    const auto fold_data = split_folds(train, folds);
    return run_unit(grid, candidate_index, fold_data[static_cast<std::size_t>(fold)], fold,
                    resample_spec, metric, seed, nullptr);
}

SearchResult grid_search(const HyperGrid& grid, const Dataset& train, const FoldPlan& folds,
                         const ResampleSpec& resample_spec, SelectionMetric metric,
                         std::uint64_t seed, int threads) {
    grid.validate();
    const auto fold_data = split_folds(train, folds);
    const std::size_t n_candidates = grid.size();
    const std::size_t k = static_cast<std::size_t>(folds.k);

    SearchResult result;
    result.metric = metric;
    result.candidates.resize(n_candidates);
    for (std::size_t c = 0; c < n_candidates; ++c) {
        result.candidates[c].params = grid.candidate(c);
        result.candidates[c].fold_scores.assign(k, 0.0);
    }

    // A unit is one (candidate, fold) evaluation; slots are preallocated so
    // parallel execution is schedule-independent.
    const std::size_t n_units = n_candidates * k;
    std::vector<std::string> failures(n_candidates);
    std::atomic<std::size_t> next_unit{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t unit = next_unit.fetch_add(1);
            if (unit >= n_units) break;
            const std::size_t cand = unit / k;
            const int fold = static_cast<int>(unit % k);
            result.candidates[cand].fold_scores[static_cast<std::size_t>(fold)] =
                run_unit(grid, cand, fold_data[static_cast<std::size_t>(fold)], fold,
                         resample_spec, metric, seed, &failures[cand]);
        }
    };
    const int n_threads = std::max(1, threads);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (std::size_t c = 0; c < n_candidates; ++c) {
        CandidateResult& cr = result.candidates[c];
        double sum = 0.0;
        bool failed = false;
        for (double s : cr.fold_scores) {
            if (std::isinf(s)) failed = true;
            sum += s;
        }
        cr.failed = failed;
        cr.failure = failures[c];
        cr.mean_score = failed ? -std::numeric_limits<double>::infinity()
                               : sum / static_cast<double>(k);
    }

    std::size_t best = 0;
    for (std::size_t c = 1; c < n_candidates; ++c) {
        if (result.candidates[c].mean_score > result.candidates[best].mean_score) best = c;
    }
    if (std::isinf(result.candidates[best].mean_score)) {
        throw TrainError("grid search: every candidate failed to fit");
    }
    result.best_index = best;

    // Audit: validation folds were never resampled. The datasets are
    // immutable, so equality against a fresh subset certifies it.
    for (int f = 0; f < folds.k; ++f) {
        std::vector<std::size_t> val_rows;
        for (std::size_t i = 0; i < train.n_rows(); ++i) {
            if (folds.assignments[i] == f) val_rows.push_back(i);
        }
        if (!(fold_data[static_cast<std::size_t>(f)].val_part == subset_rows(train, val_rows))) {
            result.leakage_audit_passed = false;
        }
    }
    return result;
}

} // namespace skewlearn
