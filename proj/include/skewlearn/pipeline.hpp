#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "skewlearn/impute.hpp"
#include "skewlearn/metrics.hpp"
#include "skewlearn/preprocess.hpp"
#include "skewlearn/resample.hpp"
#include "skewlearn/search.hpp"
#include "skewlearn/synth.hpp"
#include "skewlearn/tabular.hpp"

namespace skewlearn {

struct ImputeSettings {
    int max_iters = 10;
    double tol = 1e-3;
    double ridge_lambda = 1e-3;
    ImputeRounding rounding = ImputeRounding::ceiling;
};

/// Either a CSV file (path + full column schema + label column) or a
/// synthetic generator spec.
struct DatasetSource {
    std::string name = "dataset";
    bool synthetic = false;
    SynthSpec synth;
    std::string csv_path;
    std::vector<ColumnMeta> schema; // CSV columns in file order, label included
    std::string label_column;
    CsvOptions csv_options;
};

struct FamilyPlan {
    Family family = Family::random_forest;
    HyperGrid grid; // may be empty: the family's fixed defaults
};

struct PipelineConfig {
    DatasetSource dataset;
    double holdout_fraction = 0.2;
    ImputeSettings impute;
    ResampleStrategy strategy = ResampleStrategy::random_over;
    int smote_k = 5;
    int cv_folds = 5;
    SelectionMetric metric = SelectionMetric::weighted_f1;
    std::vector<FamilyPlan> learners;
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Parses and validates the config; unknown keys anywhere are rejected.
PipelineConfig parse_pipeline_config(const nlohmann::json& j);
PipelineConfig load_pipeline_config(const std::string& path);
nlohmann::ordered_json pipeline_config_to_json(const PipelineConfig& config);

struct FamilyOutcome {
    Family family = Family::random_forest;
    SearchResult search;
    ParamMap best_params;
    TrainedModel model;
    EvaluationReport report;
    std::vector<std::size_t> class_counts_train_resampled;
    std::uint64_t search_seed = 0;
    std::uint64_t refit_resample_seed = 0;
    std::uint64_t refit_fit_seed = 0;
};

struct PipelineResult {
    PipelineConfig config;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::vector<std::size_t> class_counts_train;
    std::vector<std::size_t> class_counts_test;
    std::vector<FamilyOutcome> outcomes;
    bool leakage_audit_passed = true;
    Dataset test_processed; // retained for audits and follow-up scoring
    Dataset train_processed;
};

/// ingest -> impute -> encode/scale -> folds -> per family: grid search,
/// refit on the oversampled full training split, evaluate on the untouched
/// test split. Stage failures re-throw with a "stage <name>:" prefix.
PipelineResult run_pipeline(const PipelineConfig& config);

nlohmann::ordered_json report_to_json(const PipelineResult& result, const FamilyOutcome& outcome);
nlohmann::ordered_json comparison_to_json(const PipelineResult& result);

/// Writes report_<family>.json per family, comparison.json, plots/ and
/// manifest.json under out_dir; returns the manifest.
nlohmann::ordered_json write_pipeline_artifacts(const PipelineResult& result,
                                                const std::string& out_dir);

/// Convenience wrapper: run, write artifacts; on failure a manifest with
/// status "failed" is still written before the error propagates.
nlohmann::ordered_json run_pipeline_to_dir(const PipelineConfig& config,
                                           const std::string& out_dir);

/// Emits per-class ROC point CSVs, the confusion matrix CSV, the feature
/// importance CSV and self-contained SVG renderings for one report.
std::vector<std::string> emit_plots(const nlohmann::json& report, const std::string& out_dir,
                                    const std::string& prefix);

/// Schema sidecar ({"columns": [...], "label_column": ..., "missing_tokens":
/// [...]}) used by the stage-level CLI commands.
std::vector<ColumnMeta> schema_from_json(const nlohmann::json& j, std::string& label_column,
                                         CsvOptions& options);
nlohmann::ordered_json schema_to_json(const std::vector<ColumnMeta>& schema,
                                      const std::string& label_column, const CsvOptions& options);

} // namespace skewlearn
