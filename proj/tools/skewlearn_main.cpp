// skewlearn: configuration-driven pipelines for multi-class imbalanced
// classification on tabular data, plus standalone stage subcommands.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 training failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "skewlearn/model_io.hpp"
#include "skewlearn/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> strategy;
};

int resolve_threads(const CommonOpts& opts, int config_threads) {
    if (opts.threads) return *opts.threads;
    if (const char* env = std::getenv("SKEWLEARN_THREADS")) {
        try {
            const int t = std::stoi(env);
            if (t >= 1) return t;
        } catch (...) {
            throw skewlearn::ConfigError("SKEWLEARN_THREADS is not a positive integer");
        }
    }
    return config_threads;
}

skewlearn::PipelineConfig load_config_with_overrides(const CommonOpts& opts) {
    if (opts.config_path.empty()) throw skewlearn::ConfigError("--config is required");
    skewlearn::PipelineConfig cfg = skewlearn::load_pipeline_config(opts.config_path);
    if (opts.seed) {
        cfg.seed = *opts.seed;
        if (cfg.dataset.synthetic) cfg.dataset.synth.seed = *opts.seed;
    }
    if (opts.strategy) cfg.strategy = skewlearn::resample_strategy_from_string(*opts.strategy);
    cfg.threads = resolve_threads(opts, cfg.threads);
    return cfg;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw skewlearn::ConfigError("cannot open '" + path + "'");
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw skewlearn::ConfigError("'" + path + "': " + e.what());
    }
}

skewlearn::Dataset load_stage_input(const std::string& csv_path, const std::string& schema_path) {
    std::string label_column;
    skewlearn::CsvOptions options;
    const auto schema = skewlearn::schema_from_json(read_json_file(schema_path), label_column,
                                                    options);
    return skewlearn::load_csv(csv_path, schema, label_column, options);
}

void write_stage_output(const skewlearn::Dataset& ds, const std::string& csv_path) {
    skewlearn::save_csv(ds, csv_path);
    std::cout << "wrote " << csv_path << " (" << ds.n_rows() << " rows, " << ds.missing_count()
              << " missing cells)\n";
}

// ---- subcommand bodies -----------------------------------------------------

int cmd_synth(const CommonOpts& opts) {
    const skewlearn::PipelineConfig cfg = load_config_with_overrides(opts);
    if (!cfg.dataset.synthetic) {
        throw skewlearn::ConfigError("synth: the config's dataset section must be synthetic");
    }
    fs::create_directories(opts.out_dir);
    const skewlearn::Dataset ds = skewlearn::generate(cfg.dataset.synth);
    const std::string base = (fs::path(opts.out_dir) / cfg.dataset.name).string();
    skewlearn::save_csv(ds, base + ".csv");

    std::vector<skewlearn::ColumnMeta> schema = ds.columns;
    schema.push_back({ds.label_column, skewlearn::ColumnKind::ordinal_integer});
    std::ofstream schema_out(base + ".schema.json", std::ios::binary);
    schema_out << skewlearn::schema_to_json(schema, ds.label_column, {}).dump(2) << '\n';
    std::cout << "wrote " << base << ".csv and " << base << ".schema.json\n";
    return 0;
}

int cmd_impute(const std::string& in_csv, const std::string& schema_path,
               const std::string& out_csv, int max_iters, double tol, double ridge_lambda,
               const std::string& rounding, std::uint64_t seed) {
    const skewlearn::Dataset ds = load_stage_input(in_csv, schema_path);
    skewlearn::ImputeRounding r;
    if (rounding == "ceiling") r = skewlearn::ImputeRounding::ceiling;
    else if (rounding == "nearest") r = skewlearn::ImputeRounding::nearest;
    else throw skewlearn::ConfigError("--rounding must be 'ceiling' or 'nearest'");
    const auto model = skewlearn::fit_imputer(ds, max_iters, tol, ridge_lambda, seed, r);
    write_stage_output(skewlearn::transform(model, ds), out_csv);
    std::cout << (model.converged ? "converged" : "stopped at max_iters") << " after "
              << model.iteration_count << " iteration(s)\n";
    return 0;
}

int cmd_preprocess(const std::string& in_csv, const std::string& schema_path,
                   const std::string& out_csv, const std::string& unknown_policy) {
    const skewlearn::Dataset ds = load_stage_input(in_csv, schema_path);
    skewlearn::UnknownTokenPolicy policy;
    if (unknown_policy == "error") policy = skewlearn::UnknownTokenPolicy::error;
    else if (unknown_policy == "reserve_code") policy = skewlearn::UnknownTokenPolicy::reserve_code;
    else throw skewlearn::ConfigError("--unknown-policy must be 'error' or 'reserve_code'");
    const auto encoder = skewlearn::fit_encoder(ds, policy);
    const auto scaler = skewlearn::fit_scaler(ds);
    write_stage_output(skewlearn::apply(encoder, scaler, ds), out_csv);
    return 0;
}

int cmd_resample(const std::string& in_csv, const std::string& schema_path,
                 const std::string& out_csv, const std::string& strategy, int k_neighbors,
                 std::uint64_t seed) {
    const skewlearn::Dataset ds = load_stage_input(in_csv, schema_path);
    skewlearn::ResampleSpec spec;
    spec.strategy = skewlearn::resample_strategy_from_string(strategy);
    spec.k_neighbors = k_neighbors;
    spec.seed = seed;
    const auto resampled = skewlearn::resample(ds, spec);
    write_stage_output(resampled.dataset, out_csv);

    const std::string prov_path = out_csv + ".provenance.csv";
    std::ofstream prov(prov_path, std::ios::binary);
    prov << "row,kind,source_i,source_j,delta\n";
    for (std::size_t i = 0; i < resampled.provenance.size(); ++i) {
        const auto& p = resampled.provenance[i];
        prov << i << ',';
        switch (p.kind) {
        case skewlearn::RowProvenance::Kind::original: prov << "original,,,"; break;
        case skewlearn::RowProvenance::Kind::duplicate:
            prov << "duplicate," << p.source_i << ",,";
            break;
        case skewlearn::RowProvenance::Kind::synthetic:
            prov << "synthetic," << p.source_i << ',' << p.source_j << ','
                 << skewlearn::format_double(p.delta);
            break;
        }
        prov << '\n';
    }
    std::cout << "wrote " << prov_path << '\n';
    return 0;
}

int cmd_train(const CommonOpts& opts) {
    const skewlearn::PipelineConfig cfg = load_config_with_overrides(opts);
    fs::create_directories(opts.out_dir);
    // Grid search + refit on the full (resampled) input; no holdout here.
    skewlearn::Dataset train;
    if (cfg.dataset.synthetic) {
        train = skewlearn::generate(cfg.dataset.synth);
    } else {
        train = skewlearn::load_csv(cfg.dataset.csv_path, cfg.dataset.schema,
                                    cfg.dataset.label_column, cfg.dataset.csv_options);
    }
    if (!train.is_complete_numeric()) {
        throw skewlearn::DataError("train: input must be complete and numeric "
                                   "(run impute/preprocess first)");
    }
    const auto folds = skewlearn::make_folds(train, cfg.cv_folds, cfg.seed);
    for (std::size_t idx = 0; idx < cfg.learners.size(); ++idx) {
        const auto& plan = cfg.learners[idx];
        skewlearn::ResampleSpec rs;
        rs.strategy = cfg.strategy;
        rs.k_neighbors = cfg.smote_k;
        const auto search_seed =
            skewlearn::derive_seed(cfg.seed, {skewlearn::seed_tag::family_search, idx});
        const auto result = skewlearn::grid_search(plan.grid, train, folds, rs, cfg.metric,
                                                   search_seed, cfg.threads);
        rs.seed = skewlearn::derive_seed(cfg.seed, {skewlearn::seed_tag::refit_resample, idx});
        const auto resampled = skewlearn::resample(train, rs);
        skewlearn::LearnerSpec spec;
        spec.family = plan.family;
        spec.params = result.candidates[result.best_index].params;
        spec.seed = skewlearn::derive_seed(cfg.seed, {skewlearn::seed_tag::refit_fit, idx});
        const auto [model, seconds] = skewlearn::timed_fit(spec, resampled.dataset);

        const std::string family = skewlearn::to_string(plan.family);
        const std::string model_path =
            (fs::path(opts.out_dir) / ("model_" + family + ".json")).string();
        skewlearn::save_model(model, model_path);
        ordered_json summary;
        summary["family"] = family;
        summary["best_params"] = skewlearn::params_to_json(spec.params);
        summary["cv_metric"] = skewlearn::to_string(cfg.metric);
        summary["cv_mean_score"] = result.candidates[result.best_index].mean_score;
        summary["candidates_evaluated"] = result.candidates.size();
        summary["train_time_seconds"] = seconds;
        summary["model_file"] = "model_" + family + ".json";
        const std::string summary_path =
            (fs::path(opts.out_dir) / ("search_" + family + ".json")).string();
        std::ofstream out(summary_path, std::ios::binary);
        out << summary.dump(2) << '\n';
        std::cout << "wrote " << model_path << " and " << summary_path << '\n';
    }
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& in_csv,
                 const std::string& schema_path, const std::string& report_path) {
    const auto model = skewlearn::load_model(model_path);
    const auto test = load_stage_input(in_csv, schema_path);
    if (!test.is_complete_numeric()) {
        throw skewlearn::DataError("evaluate: input must be complete and numeric");
    }
    if (static_cast<int>(test.n_cols()) != model.feature_count) {
        throw skewlearn::DataError("evaluate: dataset has " + std::to_string(test.n_cols()) +
                                   " features, model expects " +
                                   std::to_string(model.feature_count));
    }
    const auto report = skewlearn::evaluate_model(model, test);

    ordered_json j;
    j["family"] = skewlearn::to_string(model.family);
    j["n_rows"] = test.n_rows();
    ordered_json confusion_rows = ordered_json::array();
    for (int t = 0; t < report.confusion.class_count; ++t) {
        ordered_json row = ordered_json::array();
        for (int p = 0; p < report.confusion.class_count; ++p) {
            row.push_back(report.confusion.at(t, p));
        }
        confusion_rows.push_back(std::move(row));
    }
    j["confusion"] = std::move(confusion_rows);
    j["accuracy"] = report.prf.accuracy;
    j["weighted"] = {{"precision", report.prf.weighted_precision},
                     {"recall", report.prf.weighted_recall},
                     {"f1", report.prf.weighted_f1},
                     {"auc", report.roc.any_defined ? ordered_json(report.roc.weighted_auc)
                                                    : ordered_json(nullptr)}};
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw skewlearn::DataError("cannot write '" + report_path + "'");
    out << j.dump(2) << '\n';
    std::cout << "wrote " << report_path << '\n';
    return 0;
}

int cmd_pipeline(const CommonOpts& opts) {
    const skewlearn::PipelineConfig cfg = load_config_with_overrides(opts);
    const ordered_json manifest = skewlearn::run_pipeline_to_dir(cfg, opts.out_dir);
    std::cout << "pipeline complete; " << manifest.at("artifacts").size()
              << " artifacts under " << opts.out_dir << '\n';
    return 0;
}

int cmd_plots(const std::string& report_path, const std::string& out_dir) {
    const json report = read_json_file(report_path);
    const std::string prefix = report.value("family", std::string("model"));
    const auto files = skewlearn::emit_plots(report, out_dir, prefix);
    std::cout << "wrote " << files.size() << " plot files under " << out_dir << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-class imbalanced classification pipelines for tabular data"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string in_csv, out_csv, schema_path, model_path, report_path;
    int max_iters = 10, k_neighbors = 5;
    double tol = 1e-3, ridge_lambda = 1e-3;
    std::string rounding = "ceiling", unknown_policy = "error", strategy = "random_over";
    std::uint64_t stage_seed = 0;
    std::string plots_out = "plots";

    auto add_common = [&](CLI::App* cmd, bool with_strategy) {
        cmd->add_option("--config", opts.config_path, "pipeline config JSON")->required();
        cmd->add_option("--out", opts.out_dir, "output directory");
        cmd->add_option("--seed", opts.seed, "override the config seed");
        cmd->add_option("--threads", opts.threads,
                        "worker threads (fallback: SKEWLEARN_THREADS, then config)");
        if (with_strategy) {
            cmd->add_option("--strategy", opts.strategy, "override the resample strategy")
                ->check(CLI::IsMember({"none", "random_over", "smote"}));
        }
    };

    auto* synth = app.add_subcommand("synth", "generate a synthetic imbalanced dataset");
    add_common(synth, false);

    auto* impute = app.add_subcommand("impute", "fill missing cells by iterative imputation");
    impute->add_option("--in", in_csv, "input CSV")->required();
    impute->add_option("--schema", schema_path, "schema JSON")->required();
    impute->add_option("--out", out_csv, "output CSV")->required();
    impute->add_option("--max-iters", max_iters);
    impute->add_option("--tol", tol);
    impute->add_option("--ridge-lambda", ridge_lambda);
    impute->add_option("--rounding", rounding)->check(CLI::IsMember({"ceiling", "nearest"}));
    impute->add_option("--seed", stage_seed);

    auto* preprocess = app.add_subcommand("preprocess", "label-encode and standardize");
    preprocess->add_option("--in", in_csv)->required();
    preprocess->add_option("--schema", schema_path)->required();
    preprocess->add_option("--out", out_csv)->required();
    preprocess->add_option("--unknown-policy", unknown_policy)
        ->check(CLI::IsMember({"error", "reserve_code"}));

    auto* resample = app.add_subcommand("resample", "rebalance classes by oversampling");
    resample->add_option("--in", in_csv)->required();
    resample->add_option("--schema", schema_path)->required();
    resample->add_option("--out", out_csv)->required();
    resample->add_option("--strategy", strategy)
        ->check(CLI::IsMember({"none", "random_over", "smote"}));
    resample->add_option("--k-neighbors", k_neighbors);
    resample->add_option("--seed", stage_seed);

    auto* train = app.add_subcommand("train", "grid-search and fit on a prepared dataset");
    add_common(train, true);

    auto* evaluate = app.add_subcommand("evaluate", "score a saved model on a prepared CSV");
    evaluate->add_option("--model", model_path)->required();
    evaluate->add_option("--in", in_csv)->required();
    evaluate->add_option("--schema", schema_path)->required();
    evaluate->add_option("--out", report_path, "report JSON path")->required();

    auto* pipeline = app.add_subcommand("pipeline", "run the full end-to-end pipeline");
    add_common(pipeline, true);

    auto* plots = app.add_subcommand("plots", "emit ROC/confusion/importance plot files");
    plots->add_option("--report", report_path, "report_<family>.json from a pipeline run")
        ->required();
    plots->add_option("--out", plots_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(opts);
        if (impute->parsed()) {
            return cmd_impute(in_csv, schema_path, out_csv, max_iters, tol, ridge_lambda, rounding,
                              stage_seed);
        }
        if (preprocess->parsed()) return cmd_preprocess(in_csv, schema_path, out_csv, unknown_policy);
        if (resample->parsed()) {
            return cmd_resample(in_csv, schema_path, out_csv, strategy, k_neighbors, stage_seed);
        }
        if (train->parsed()) return cmd_train(opts);
        if (evaluate->parsed()) return cmd_evaluate(model_path, in_csv, schema_path, report_path);
        if (pipeline->parsed()) return cmd_pipeline(opts);
        if (plots->parsed()) return cmd_plots(report_path, plots_out);
    } catch (const skewlearn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const skewlearn::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const skewlearn::TrainError& e) {
        std::cerr << "training failure: " << e.what() << '\n';
        return 4;
    } catch (const skewlearn::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
