#include "skewlearn/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "skewlearn/model_io.hpp"

namespace skewlearn {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& context) {
    if (!j.is_object()) throw ConfigError(context + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown key '" + key + "' in " + context);
        }
    }
}

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError("stage " + name + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError("stage " + name + ": " + e.what());
    } catch (const TrainError& e) {
        throw TrainError("stage " + name + ": " + e.what());
    }
}

std::vector<ParamValue> param_values_from_json(const json& values, const std::string& key) {
    if (!values.is_array()) {
        throw ConfigError("grid values for '" + key + "' must be an array");
    }
    std::vector<ParamValue> out;
    for (const auto& v : values) {
        if (v.is_number_integer() || v.is_number_unsigned()) out.push_back(v.get<std::int64_t>());
        else if (v.is_number_float()) out.push_back(v.get<double>());
        else if (v.is_string()) out.push_back(v.get<std::string>());
        else if (v.is_null()) out.push_back(std::string("none"));
        else throw ConfigError("grid values for '" + key + "' must be numbers or strings");
    }
    return out;
}

} // namespace

std::vector<ColumnMeta> schema_from_json(const json& j, std::string& label_column,
                                         CsvOptions& options) {
    check_keys(j, {"columns", "label_column", "missing_tokens"}, "schema");
    if (!j.contains("columns") || !j.contains("label_column")) {
        throw ConfigError("schema needs 'columns' and 'label_column'");
    }
    std::vector<ColumnMeta> schema;
    for (const auto& col : j.at("columns")) {
        check_keys(col, {"name", "kind"}, "schema column");
        ColumnMeta meta;
        meta.name = col.at("name").get<std::string>();
        meta.kind = column_kind_from_string(col.value("kind", "numeric"));
        schema.push_back(std::move(meta));
    }
    label_column = j.at("label_column").get<std::string>();
    if (j.contains("missing_tokens")) {
        options.missing_tokens = j.at("missing_tokens").get<std::vector<std::string>>();
    }
    return schema;
}

ordered_json schema_to_json(const std::vector<ColumnMeta>& schema, const std::string& label_column,
                            const CsvOptions& options) {
    ordered_json j;
    ordered_json cols = ordered_json::array();
    for (const auto& col : schema) {
        cols.push_back({{"name", col.name}, {"kind", to_string(col.kind)}});
    }
    j["columns"] = std::move(cols);
    j["label_column"] = label_column;
    j["missing_tokens"] = options.missing_tokens;
    return j;
}

PipelineConfig parse_pipeline_config(const json& j) {
    check_keys(j,
               {"dataset", "holdout", "impute", "resample", "cv", "selection_metric", "learners",
                "seed", "threads"},
               "pipeline config");
    PipelineConfig cfg;
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) {
        cfg.threads = j.at("threads").get<int>();
        if (cfg.threads < 1) throw ConfigError("threads must be at least 1");
    }

    if (!j.contains("dataset")) throw ConfigError("pipeline config needs a 'dataset' section");
    const json& ds = j.at("dataset");
    check_keys(ds, {"name", "synth", "csv"}, "dataset");
    cfg.dataset.name = ds.value("name", std::string("dataset"));
    if (ds.contains("synth") == ds.contains("csv")) {
        throw ConfigError("dataset needs exactly one of 'synth' or 'csv'");
    }
    if (ds.contains("synth")) {
        const json& sy = ds.at("synth");
        check_keys(sy,
                   {"class_counts", "dims", "separation", "ordinal_fraction", "missing_rate",
                    "seed"},
                   "dataset.synth");
        cfg.dataset.synthetic = true;
        SynthSpec& spec = cfg.dataset.synth;
        if (!sy.contains("class_counts")) throw ConfigError("dataset.synth needs class_counts");
        spec.class_counts = sy.at("class_counts").get<std::vector<std::size_t>>();
        spec.dims = sy.value("dims", spec.dims);
        spec.separation = sy.value("separation", spec.separation);
        spec.ordinal_fraction = sy.value("ordinal_fraction", spec.ordinal_fraction);
        spec.missing_rate = sy.value("missing_rate", spec.missing_rate);
        spec.seed = sy.contains("seed") ? sy.at("seed").get<std::uint64_t>() : cfg.seed;
        spec.name = cfg.dataset.name;
        spec.validate();
    } else {
        const json& cv = ds.at("csv");
        check_keys(cv, {"path", "schema", "label_column", "missing_tokens"}, "dataset.csv");
        if (!cv.contains("path") || !cv.contains("schema") || !cv.contains("label_column")) {
            throw ConfigError("dataset.csv needs 'path', 'schema' and 'label_column'");
        }
        cfg.dataset.csv_path = cv.at("path").get<std::string>();
        for (const auto& col : cv.at("schema")) {
            check_keys(col, {"name", "kind"}, "dataset.csv schema column");
            ColumnMeta meta;
            meta.name = col.at("name").get<std::string>();
            meta.kind = column_kind_from_string(col.value("kind", "numeric"));
            cfg.dataset.schema.push_back(std::move(meta));
        }
        cfg.dataset.label_column = cv.at("label_column").get<std::string>();
        if (cv.contains("missing_tokens")) {
            cfg.dataset.csv_options.missing_tokens =
                cv.at("missing_tokens").get<std::vector<std::string>>();
        }
    }

    if (j.contains("holdout")) {
        const json& h = j.at("holdout");
        check_keys(h, {"test_fraction"}, "holdout");
        cfg.holdout_fraction = h.value("test_fraction", cfg.holdout_fraction);
        if (!(cfg.holdout_fraction > 0.0 && cfg.holdout_fraction < 1.0)) {
            throw ConfigError("holdout.test_fraction must lie in (0, 1)");
        }
    }
    if (j.contains("impute")) {
        const json& im = j.at("impute");
        check_keys(im, {"max_iters", "tol", "ridge_lambda", "rounding"}, "impute");
        cfg.impute.max_iters = im.value("max_iters", cfg.impute.max_iters);
        cfg.impute.tol = im.value("tol", cfg.impute.tol);
        cfg.impute.ridge_lambda = im.value("ridge_lambda", cfg.impute.ridge_lambda);
        const std::string rounding = im.value("rounding", std::string("ceiling"));
        if (rounding == "ceiling") cfg.impute.rounding = ImputeRounding::ceiling;
        else if (rounding == "nearest") cfg.impute.rounding = ImputeRounding::nearest;
        else throw ConfigError("impute.rounding must be 'ceiling' or 'nearest'");
    }
    if (j.contains("resample")) {
        const json& rs = j.at("resample");
        check_keys(rs, {"strategy", "k_neighbors"}, "resample");
        cfg.strategy = resample_strategy_from_string(rs.value("strategy", std::string("random_over")));
        cfg.smote_k = rs.value("k_neighbors", cfg.smote_k);
        if (cfg.smote_k < 1) throw ConfigError("resample.k_neighbors must be at least 1");
    }
    if (j.contains("cv")) {
        const json& cv = j.at("cv");
        check_keys(cv, {"folds"}, "cv");
        cfg.cv_folds = cv.value("folds", cfg.cv_folds);
        if (cfg.cv_folds < 2) throw ConfigError("cv.folds must be at least 2");
    }
    if (j.contains("selection_metric")) {
        cfg.metric = selection_metric_from_string(j.at("selection_metric").get<std::string>());
    }

    if (!j.contains("learners") || !j.at("learners").is_array() || j.at("learners").empty()) {
        throw ConfigError("pipeline config needs a non-empty 'learners' array");
    }
    for (const auto& entry : j.at("learners")) {
        check_keys(entry, {"family", "grid"}, "learner entry");
        if (!entry.contains("family")) throw ConfigError("learner entry needs a 'family'");
        FamilyPlan plan;
        plan.family = family_from_string(entry.at("family").get<std::string>());
        plan.grid.family = plan.family;
        if (entry.contains("grid")) {
            for (const auto& [key, values] : entry.at("grid").items()) {
                plan.grid.axes.emplace_back(key, param_values_from_json(values, key));
            }
        }
        plan.grid.validate();
        cfg.learners.push_back(std::move(plan));
    }
    return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
    return parse_pipeline_config(j);
}

ordered_json pipeline_config_to_json(const PipelineConfig& cfg) {
    ordered_json j;
    ordered_json ds;
    ds["name"] = cfg.dataset.name;
    if (cfg.dataset.synthetic) {
        const SynthSpec& s = cfg.dataset.synth;
        ds["synth"] = {{"class_counts", s.class_counts},     {"dims", s.dims},
                       {"separation", s.separation},         {"ordinal_fraction", s.ordinal_fraction},
                       {"missing_rate", s.missing_rate},     {"seed", s.seed}};
    } else {
        ordered_json cols = ordered_json::array();
        for (const auto& col : cfg.dataset.schema) {
            cols.push_back({{"name", col.name}, {"kind", to_string(col.kind)}});
        }
        ds["csv"] = {{"path", cfg.dataset.csv_path},
                     {"schema", std::move(cols)},
                     {"label_column", cfg.dataset.label_column},
                     {"missing_tokens", cfg.dataset.csv_options.missing_tokens}};
    }
    j["dataset"] = std::move(ds);
    j["holdout"] = {{"test_fraction", cfg.holdout_fraction}};
    j["impute"] = {{"max_iters", cfg.impute.max_iters},
                   {"tol", cfg.impute.tol},
                   {"ridge_lambda", cfg.impute.ridge_lambda},
                   {"rounding",
                    cfg.impute.rounding == ImputeRounding::ceiling ? "ceiling" : "nearest"}};
    j["resample"] = {{"strategy", to_string(cfg.strategy)}, {"k_neighbors", cfg.smote_k}};
    j["cv"] = {{"folds", cfg.cv_folds}};
    j["selection_metric"] = to_string(cfg.metric);
    ordered_json learners = ordered_json::array();
    for (const auto& plan : cfg.learners) {
        ordered_json grid = ordered_json::object();
        for (const auto& [key, values] : plan.grid.axes) {
            ordered_json arr = ordered_json::array();
            for (const auto& v : values) {
                if (const auto* i = std::get_if<std::int64_t>(&v)) arr.push_back(*i);
                else if (const auto* d = std::get_if<double>(&v)) arr.push_back(*d);
                else arr.push_back(std::get<std::string>(v));
            }
            grid[key] = std::move(arr);
        }
        learners.push_back({{"family", to_string(plan.family)}, {"grid", std::move(grid)}});
    }
    j["learners"] = std::move(learners);
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    return j;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    PipelineResult result;
    result.config = config;

    const Dataset raw = stage("load", [&] {
        if (config.dataset.synthetic) return generate(config.dataset.synth);
        Dataset ds = load_csv(config.dataset.csv_path, config.dataset.schema,
                              config.dataset.label_column, config.dataset.csv_options);
        ds.name = config.dataset.name;
        return ds;
    });

    auto [train_raw, test_raw] = stage("holdout", [&] {
        return stratified_holdout(raw, config.holdout_fraction, config.seed);
    });

    const auto [train_imputed, test_imputed] = stage("impute", [&] {
        const ImputerModel imputer =
            fit_imputer(train_raw, config.impute.max_iters, config.impute.tol,
                        config.impute.ridge_lambda, config.seed, config.impute.rounding);
        return std::make_pair(transform(imputer, train_raw), transform(imputer, test_raw));
    });

    std::tie(result.train_processed, result.test_processed) = stage("preprocess", [&] {
        const EncoderModel encoder = fit_encoder(train_imputed);
        const ScalerModel scaler = fit_scaler(train_imputed);
        return std::make_pair(apply(encoder, scaler, train_imputed),
                              apply(encoder, scaler, test_imputed));
    });

    result.n_train = result.train_processed.n_rows();
    result.n_test = result.test_processed.n_rows();
    result.class_counts_train = result.train_processed.class_counts();
    result.class_counts_test = result.test_processed.class_counts();

    const FoldPlan folds = stage("folds", [&] {
        return make_folds(result.train_processed, config.cv_folds, config.seed);
    });

    for (std::size_t idx = 0; idx < config.learners.size(); ++idx) {
        const FamilyPlan& plan = config.learners[idx];
        const std::string stage_name = "train[" + to_string(plan.family) + "]";
        FamilyOutcome outcome = stage(stage_name, [&] {
            FamilyOutcome oc;
            oc.family = plan.family;
            oc.search_seed = derive_seed(config.seed, {seed_tag::family_search, idx});
            oc.refit_resample_seed = derive_seed(config.seed, {seed_tag::refit_resample, idx});
            oc.refit_fit_seed = derive_seed(config.seed, {seed_tag::refit_fit, idx});

            ResampleSpec rs;
            rs.strategy = config.strategy;
            rs.k_neighbors = config.smote_k;
            oc.search = grid_search(plan.grid, result.train_processed, folds, rs, config.metric,
                                    oc.search_seed, config.threads);
            oc.best_params = oc.search.candidates[oc.search.best_index].params;

            rs.seed = oc.refit_resample_seed;
            const ResampledSet resampled = resample(result.train_processed, rs);
            oc.class_counts_train_resampled = resampled.dataset.class_counts();

            LearnerSpec spec;
            spec.family = plan.family;
            spec.params = oc.best_params;
            spec.seed = oc.refit_fit_seed;
            auto [model, seconds] = timed_fit(spec, resampled.dataset);
            oc.model = std::move(model);
            oc.report = evaluate_model(oc.model, result.test_processed);
            oc.report.train_time_seconds = seconds;
            return oc;
        });
        result.leakage_audit_passed =
            result.leakage_audit_passed && outcome.search.leakage_audit_passed;
        result.outcomes.push_back(std::move(outcome));
    }
    return result;
}

namespace {

ordered_json dataset_block(const PipelineResult& result, const FamilyOutcome& outcome) {
    ordered_json ds;
    ds["name"] = result.config.dataset.name;
    ds["n_train"] = result.n_train;
    ds["n_test"] = result.n_test;
    ds["class_counts_train"] = result.class_counts_train;
    ds["class_counts_train_resampled"] = outcome.class_counts_train_resampled;
    ds["class_counts_test"] = result.class_counts_test;
    return ds;
}

ordered_json prf_block(const PrfSummary& prf, const RocResult& roc, bool weighted) {
    ordered_json out;
    double p = 0, r = 0, f = 0;
    if (weighted) {
        p = prf.weighted_precision;
        r = prf.weighted_recall;
        f = prf.weighted_f1;
    } else {
        p = prf.macro_precision;
        r = prf.macro_recall;
        f = prf.macro_f1;
    }
    out["precision"] = p;
    out["recall"] = r;
    out["f1"] = f;
    if (roc.any_defined) {
        out["auc"] = weighted ? roc.weighted_auc : roc.macro_auc;
    } else {
        out["auc"] = nullptr;
    }
    return out;
}

} // namespace

ordered_json report_to_json(const PipelineResult& result, const FamilyOutcome& outcome) {
    ordered_json j;
    j["dataset"] = dataset_block(result, outcome);
    j["family"] = to_string(outcome.family);
    j["best_params"] = params_to_json(outcome.best_params);

    ordered_json cv;
    cv["folds"] = result.config.cv_folds;
    cv["metric"] = to_string(outcome.search.metric);
    cv["best_index"] = outcome.search.best_index;
    ordered_json candidates = ordered_json::array();
    for (const auto& cand : outcome.search.candidates) {
        ordered_json c;
        c["params"] = params_to_json(cand.params);
        ordered_json scores = ordered_json::array();
        for (double s : cand.fold_scores) {
            if (std::isinf(s)) scores.push_back(nullptr);
            else scores.push_back(s);
        }
        c["fold_scores"] = std::move(scores);
        c["mean_score"] = cand.failed ? ordered_json(nullptr) : ordered_json(cand.mean_score);
        c["failed"] = cand.failed;
        if (cand.failed) c["failure"] = cand.failure;
        candidates.push_back(std::move(c));
    }
    cv["candidates"] = std::move(candidates);
    j["cv"] = std::move(cv);

    const EvaluationReport& rep = outcome.report;
    ordered_json test;
    ordered_json confusion_rows = ordered_json::array();
    for (int t = 0; t < rep.confusion.class_count; ++t) {
        ordered_json row = ordered_json::array();
        for (int p = 0; p < rep.confusion.class_count; ++p) row.push_back(rep.confusion.at(t, p));
        confusion_rows.push_back(std::move(row));
    }
    test["confusion"] = std::move(confusion_rows);
    ordered_json per_class = ordered_json::array();
    for (std::size_t c = 0; c < rep.prf.per_class.size(); ++c) {
        const ClassPrf& pc = rep.prf.per_class[c];
        const RocCurve& curve = rep.roc.curves[c];
        ordered_json e;
        e["precision"] = pc.precision;
        e["recall"] = pc.recall;
        e["f1"] = pc.f1;
        e["support"] = pc.support;
        e["auc"] = curve.defined ? ordered_json(curve.auc) : ordered_json(nullptr);
        ordered_json flags = ordered_json::array();
        if (!pc.precision_defined) flags.push_back("precision_undefined");
        if (!pc.recall_defined) flags.push_back("recall_undefined");
        if (!pc.f1_defined) flags.push_back("f1_undefined");
        if (!curve.defined) flags.push_back("auc_undefined");
        e["flags"] = std::move(flags);
        per_class.push_back(std::move(e));
    }
    test["per_class"] = std::move(per_class);
    test["accuracy"] = rep.prf.accuracy;
    test["macro"] = prf_block(rep.prf, rep.roc, false);
    test["weighted"] = prf_block(rep.prf, rep.roc, true);
    ordered_json curves = ordered_json::array();
    for (const RocCurve& curve : rep.roc.curves) {
        ordered_json e;
        e["class"] = curve.class_id;
        e["defined"] = curve.defined;
        ordered_json points = ordered_json::array();
        for (std::size_t i = 0; i < curve.fpr.size(); ++i) {
            points.push_back(ordered_json::array(
                {curve.fpr[i], curve.tpr[i],
                 std::isinf(curve.thresholds[i]) ? ordered_json(nullptr)
                                                 : ordered_json(curve.thresholds[i])}));
        }
        e["points"] = std::move(points);
        curves.push_back(std::move(e));
    }
    test["roc_curves"] = std::move(curves);
    j["test"] = std::move(test);

    j["train_time_seconds"] = rep.train_time_seconds;
    if (rep.has_importances) {
        j["feature_importances"] = rep.feature_importances;
    } else {
        j["feature_importances"] = nullptr;
    }
    ordered_json names = ordered_json::array();
    for (const auto& col : result.train_processed.columns) names.push_back(col.name);
    j["feature_names"] = std::move(names);
    ordered_json seeds;
    seeds["master"] = result.config.seed;
    seeds["search"] = outcome.search_seed;
    seeds["refit_resample"] = outcome.refit_resample_seed;
    seeds["refit_fit"] = outcome.refit_fit_seed;
    j["seeds"] = std::move(seeds);
    return j;
}

ordered_json comparison_to_json(const PipelineResult& result) {
    struct Row {
        std::string family;
        double auc;
        bool auc_defined;
        double f1;
        double precision;
        double recall;
        double accuracy;
        double seconds;
    };
    std::vector<Row> rows;
    for (const auto& oc : result.outcomes) {
        rows.push_back({to_string(oc.family), oc.report.roc.weighted_auc,
                        oc.report.roc.any_defined, oc.report.prf.weighted_f1,
                        oc.report.prf.weighted_precision, oc.report.prf.weighted_recall,
                        oc.report.prf.accuracy, oc.report.train_time_seconds});
    }
    std::vector<std::size_t> by_auc(rows.size()), by_f1(rows.size());
    std::iota(by_auc.begin(), by_auc.end(), std::size_t{0});
    std::iota(by_f1.begin(), by_f1.end(), std::size_t{0});
    std::stable_sort(by_auc.begin(), by_auc.end(),
                     [&](std::size_t a, std::size_t b) { return rows[a].auc > rows[b].auc; });
    std::stable_sort(by_f1.begin(), by_f1.end(),
                     [&](std::size_t a, std::size_t b) { return rows[a].f1 > rows[b].f1; });
    std::vector<std::size_t> rank_auc(rows.size()), rank_f1(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rank_auc[by_auc[i]] = i + 1;
        rank_f1[by_f1[i]] = i + 1;
    }

    ordered_json j;
    j["dataset"] = result.config.dataset.name;
    j["ranked_by"] = "weighted_auc";
    ordered_json out_rows = ordered_json::array();
    for (std::size_t i : by_auc) {
        const Row& r = rows[i];
        ordered_json e;
        e["family"] = r.family;
        e["weighted_auc"] = r.auc_defined ? ordered_json(r.auc) : ordered_json(nullptr);
        e["weighted_f1"] = r.f1;
        e["weighted_precision"] = r.precision;
        e["weighted_recall"] = r.recall;
        e["accuracy"] = r.accuracy;
        e["train_time_seconds"] = r.seconds;
        e["rank_auc"] = rank_auc[i];
        e["rank_f1"] = rank_f1[i];
        out_rows.push_back(std::move(e));
    }
    j["rows"] = std::move(out_rows);
    return j;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw DataError("write to '" + path.string() + "' failed");
}

void write_json(const fs::path& path, const ordered_json& j) {
    write_text(path, j.dump(2) + "\n");
}

} // namespace

ordered_json write_pipeline_artifacts(const PipelineResult& result, const std::string& out_dir) {
    fs::create_directories(out_dir);
    fs::create_directories(fs::path(out_dir) / "plots");
    std::vector<std::string> artifacts;
    ordered_json timings = ordered_json::object();
    for (const auto& outcome : result.outcomes) {
        const std::string family = to_string(outcome.family);
        const ordered_json report = report_to_json(result, outcome);
        const std::string report_name = "report_" + family + ".json";
        write_json(fs::path(out_dir) / report_name, report);
        artifacts.push_back(report_name);
        save_model(outcome.model, (fs::path(out_dir) / ("model_" + family + ".json")).string());
        artifacts.push_back("model_" + family + ".json");
        const auto plot_files =
            emit_plots(report, (fs::path(out_dir) / "plots").string(), family);
        for (const auto& f : plot_files) artifacts.push_back("plots/" + f);
        timings[family] = outcome.report.train_time_seconds;
    }
    write_json(fs::path(out_dir) / "comparison.json", comparison_to_json(result));
    artifacts.push_back("comparison.json");

    ordered_json manifest;
    manifest["format"] = "skewlearn-manifest-v1";
    manifest["status"] = "complete";
    manifest["dataset"] = result.config.dataset.name;
    manifest["config"] = pipeline_config_to_json(result.config);
    ordered_json seeds;
    seeds["master"] = result.config.seed;
    ordered_json per_family = ordered_json::object();
    for (const auto& outcome : result.outcomes) {
        per_family[to_string(outcome.family)] = {{"search", outcome.search_seed},
                                                 {"refit_resample", outcome.refit_resample_seed},
                                                 {"refit_fit", outcome.refit_fit_seed}};
    }
    seeds["per_family"] = std::move(per_family);
    manifest["seeds"] = std::move(seeds);
    manifest["leakage_audit"] = result.leakage_audit_passed ? "passed" : "failed";
    manifest["train_time_seconds"] = std::move(timings);
    manifest["artifacts"] = artifacts;
    write_json(fs::path(out_dir) / "manifest.json", manifest);
    return manifest;
}

ordered_json run_pipeline_to_dir(const PipelineConfig& config, const std::string& out_dir) {
    try {
        const PipelineResult result = run_pipeline(config);
        return write_pipeline_artifacts(result, out_dir);
    } catch (const Error& e) {
        // Record the failure; artifacts already on disk (if any) are stale.
        fs::create_directories(out_dir);
        ordered_json manifest;
        manifest["format"] = "skewlearn-manifest-v1";
        manifest["status"] = "failed";
        manifest["error"] = e.what();
        manifest["config"] = pipeline_config_to_json(config);
        manifest["artifacts"] = ordered_json::array();
        write_json(fs::path(out_dir) / "manifest.json", manifest);
        throw;
    }
}

} // namespace skewlearn
