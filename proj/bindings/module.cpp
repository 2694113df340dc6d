// Python bindings for the skewlearn core: dataset handling, the pipeline
// stages, the six learner families and the evaluation metrics.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <variant>

#include "skewlearn/impute.hpp"
#include "skewlearn/metrics.hpp"
#include "skewlearn/model_io.hpp"
#include "skewlearn/pipeline.hpp"
#include "skewlearn/preprocess.hpp"
#include "skewlearn/resample.hpp"
#include "skewlearn/search.hpp"
#include "skewlearn/synth.hpp"

namespace py = pybind11;
using namespace skewlearn;

namespace {

ParamMap params_from_dict(const py::dict& d) {
    ParamMap out;
    for (const auto& item : d) {
        const std::string key = py::cast<std::string>(item.first);
        const py::handle v = item.second;
        if (py::isinstance<py::bool_>(v)) {
            throw ConfigError("parameter '" + key + "' must be a number or string");
        }
        if (py::isinstance<py::int_>(v)) {
            out[key] = py::cast<std::int64_t>(v);
        } else if (py::isinstance<py::float_>(v)) {
            out[key] = py::cast<double>(v);
        } else if (py::isinstance<py::str>(v)) {
            out[key] = py::cast<std::string>(v);
        } else {
            throw ConfigError("parameter '" + key + "' must be a number or string");
        }
    }
    return out;
}

py::dict params_to_dict(const ParamMap& params) {
    py::dict out;
    for (const auto& [key, value] : params) {
        if (const auto* i = std::get_if<std::int64_t>(&value)) out[key.c_str()] = *i;
        else if (const auto* d = std::get_if<double>(&value)) out[key.c_str()] = *d;
        else out[key.c_str()] = std::get<std::string>(value);
    }
    return out;
}

std::vector<ColumnMeta> schema_from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<ColumnMeta> schema;
    for (const auto& [name, kind] : pairs) {
        schema.push_back({name, column_kind_from_string(kind)});
    }
    return schema;
}

py::list scores_to_list(const Matrix& scores) {
    py::list out;
    for (std::size_t i = 0; i < scores.rows; ++i) {
        py::list row;
        for (std::size_t c = 0; c < scores.cols; ++c) row.append(scores.at(i, c));
        out.append(row);
    }
    return out;
}

py::dict report_to_dict(const EvaluationReport& report, int class_count) {
    py::dict out;
    py::list confusion_rows;
    for (int t = 0; t < class_count; ++t) {
        py::list row;
        for (int p = 0; p < class_count; ++p) row.append(report.confusion.at(t, p));
        confusion_rows.append(row);
    }
    out["confusion"] = confusion_rows;
    out["accuracy"] = report.prf.accuracy;
    py::list per_class;
    for (std::size_t c = 0; c < report.prf.per_class.size(); ++c) {
        const auto& pc = report.prf.per_class[c];
        py::dict e;
        e["precision"] = pc.precision;
        e["recall"] = pc.recall;
        e["f1"] = pc.f1;
        e["support"] = pc.support;
        if (report.roc.curves[c].defined) e["auc"] = report.roc.curves[c].auc;
        else e["auc"] = py::none();
        per_class.append(e);
    }
    out["per_class"] = per_class;
    py::dict weighted;
    weighted["precision"] = report.prf.weighted_precision;
    weighted["recall"] = report.prf.weighted_recall;
    weighted["f1"] = report.prf.weighted_f1;
    if (report.roc.any_defined) weighted["auc"] = report.roc.weighted_auc;
    else weighted["auc"] = py::none();
    out["weighted"] = weighted;
    if (report.has_importances) out["feature_importances"] = report.feature_importances;
    else out["feature_importances"] = py::none();
    out["train_time_seconds"] = report.train_time_seconds;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multi-class imbalanced classification toolkit (C++ core)";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<TrainError>(m, "TrainError", PyExc_RuntimeError);

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("n_rows", &Dataset::n_rows)
        .def_property_readonly("n_cols", &Dataset::n_cols)
        .def_readonly("class_count", &Dataset::class_count)
        .def_readonly("labels", &Dataset::labels)
        .def_readonly("label_names", &Dataset::label_names)
        .def_property_readonly("column_names",
                               [](const Dataset& ds) {
                                   std::vector<std::string> names;
                                   for (const auto& col : ds.columns) names.push_back(col.name);
                                   return names;
                               })
        .def_property_readonly("column_kinds",
                               [](const Dataset& ds) {
                                   std::vector<std::string> kinds;
                                   for (const auto& col : ds.columns) {
                                       kinds.push_back(to_string(col.kind));
                                   }
                                   return kinds;
                               })
        .def("class_counts", &Dataset::class_counts)
        .def("missing_count", &Dataset::missing_count)
        .def("is_complete_numeric", &Dataset::is_complete_numeric)
        .def("row",
             [](const Dataset& ds, std::size_t i) {
                 if (i >= ds.n_rows()) throw py::index_error();
                 py::list out;
                 for (std::size_t j = 0; j < ds.n_cols(); ++j) {
                     if (ds.is_missing(i, j)) out.append(py::none());
                     else out.append(ds.values.at(i, j));
                 }
                 return out;
             })
        .def("__repr__", [](const Dataset& ds) {
            return "<skewlearn.Dataset rows=" + std::to_string(ds.n_rows()) +
                   " cols=" + std::to_string(ds.n_cols()) +
                   " classes=" + std::to_string(ds.class_count) + ">";
        });

    m.def(
        "generate",
        [](const std::vector<std::size_t>& class_counts, std::size_t dims, double separation,
           double ordinal_fraction, double missing_rate, std::uint64_t seed) {
            SynthSpec spec;
            spec.class_counts = class_counts;
            spec.dims = dims;
            spec.separation = separation;
            spec.ordinal_fraction = ordinal_fraction;
            spec.missing_rate = missing_rate;
            spec.seed = seed;
            return generate(spec);
        },
        py::arg("class_counts"), py::arg("dims") = 10, py::arg("separation") = 1.0,
        py::arg("ordinal_fraction") = 0.0, py::arg("missing_rate") = 0.0, py::arg("seed") = 0,
        "Synthetic imbalanced Gaussian-cluster dataset");

    m.def(
        "load_csv",
        [](const std::string& path, const std::vector<std::pair<std::string, std::string>>& schema,
           const std::string& label_column, const std::vector<std::string>& missing_tokens) {
            CsvOptions options;
            options.missing_tokens = missing_tokens;
            return load_csv(path, schema_from_pairs(schema), label_column, options);
        },
        py::arg("path"), py::arg("schema"), py::arg("label_column"),
        py::arg("missing_tokens") = std::vector<std::string>{"", "NA"});

    m.def("save_csv", &save_csv, py::arg("dataset"), py::arg("path"));

    m.def(
        "stratified_holdout",
        [](const Dataset& ds, double test_fraction, std::uint64_t seed) {
            return stratified_holdout(ds, test_fraction, seed);
        },
        py::arg("dataset"), py::arg("test_fraction"), py::arg("seed") = 0);

    m.def(
        "make_folds",
        [](const Dataset& ds, int k, std::uint64_t seed) {
            return make_folds(ds, k, seed).assignments;
        },
        py::arg("dataset"), py::arg("k"), py::arg("seed") = 0,
        "Stratified fold ids, one per row");

    py::class_<ImputerModel>(m, "Imputer")
        .def_readonly("iteration_count", &ImputerModel::iteration_count)
        .def_readonly("converged", &ImputerModel::converged)
        .def("transform", [](const ImputerModel& model, const Dataset& ds) {
            return transform(model, ds);
        });

    m.def(
        "fit_imputer",
        [](const Dataset& train, int max_iters, double tol, double ridge_lambda,
           std::uint64_t seed, const std::string& rounding) {
            const ImputeRounding r = rounding == "nearest" ? ImputeRounding::nearest
                                                           : ImputeRounding::ceiling;
            if (rounding != "nearest" && rounding != "ceiling") {
                throw ConfigError("rounding must be 'ceiling' or 'nearest'");
            }
            return fit_imputer(train, max_iters, tol, ridge_lambda, seed, r);
        },
        py::arg("train"), py::arg("max_iters") = 10, py::arg("tol") = 1e-3,
        py::arg("ridge_lambda") = 1e-3, py::arg("seed") = 0, py::arg("rounding") = "ceiling");

    struct PyPreprocess {
        EncoderModel encoder;
        ScalerModel scaler;
    };
    py::class_<PyPreprocess>(m, "Preprocess")
        .def("apply", [](const PyPreprocess& p, const Dataset& ds) {
            return apply(p.encoder, p.scaler, ds);
        });
    m.def(
        "fit_preprocess",
        [](const Dataset& train, const std::string& unknown_policy) {
            const UnknownTokenPolicy policy = unknown_policy == "reserve_code"
                                                  ? UnknownTokenPolicy::reserve_code
                                                  : UnknownTokenPolicy::error;
            if (unknown_policy != "reserve_code" && unknown_policy != "error") {
                throw ConfigError("unknown_policy must be 'error' or 'reserve_code'");
            }
            return PyPreprocess{fit_encoder(train, policy), fit_scaler(train)};
        },
        py::arg("train"), py::arg("unknown_policy") = "error",
        "Label encoder + standard scaler fitted on the training split");

    m.def(
        "resample",
        [](const Dataset& train, const std::string& strategy, int k_neighbors,
           std::uint64_t seed) {
            ResampleSpec spec;
            spec.strategy = resample_strategy_from_string(strategy);
            spec.k_neighbors = k_neighbors;
            spec.seed = seed;
            const ResampledSet out = resample(train, spec);
            py::list provenance;
            for (const auto& p : out.provenance) {
                py::dict e;
                switch (p.kind) {
                case RowProvenance::Kind::original: e["kind"] = "original"; break;
                case RowProvenance::Kind::duplicate:
                    e["kind"] = "duplicate";
                    e["source"] = p.source_i;
                    break;
                case RowProvenance::Kind::synthetic:
                    e["kind"] = "synthetic";
                    e["source_i"] = p.source_i;
                    e["source_j"] = p.source_j;
                    e["delta"] = p.delta;
                    break;
                }
                provenance.append(e);
            }
            return py::make_tuple(out.dataset, provenance);
        },
        py::arg("train"), py::arg("strategy") = "random_over", py::arg("k_neighbors") = 5,
        py::arg("seed") = 0, "Returns (balanced dataset, per-row provenance)");

    py::class_<TrainedModel>(m, "Model")
        .def_property_readonly("family",
                               [](const TrainedModel& model) { return to_string(model.family); })
        .def_readonly("feature_count", &TrainedModel::feature_count)
        .def_readonly("class_count", &TrainedModel::class_count)
        .def("score",
             [](const TrainedModel& model, const Dataset& ds) {
                 return scores_to_list(score_all(model, ds));
             })
        .def("predict",
             [](const TrainedModel& model, const Dataset& ds) { return predict_all(model, ds); })
        .def("feature_importance",
             [](const TrainedModel& model) { return feature_importance(model); })
        .def("evaluate",
             [](const TrainedModel& model, const Dataset& test) {
                 return report_to_dict(evaluate_model(model, test), model.class_count);
             })
        .def("save", [](const TrainedModel& model, const std::string& path) {
            save_model(model, path);
        });

    m.def("load_model", &load_model, py::arg("path"));

    m.def(
        "fit",
        [](const std::string& family, const py::dict& params, const Dataset& train,
           std::uint64_t seed) {
            LearnerSpec spec;
            spec.family = family_from_string(family);
            spec.params = params_from_dict(params);
            spec.seed = seed;
            return fit(spec, train);
        },
        py::arg("family"), py::arg("params"), py::arg("train"), py::arg("seed") = 0);

    m.def(
        "timed_fit",
        [](const std::string& family, const py::dict& params, const Dataset& train,
           std::uint64_t seed) {
            LearnerSpec spec;
            spec.family = family_from_string(family);
            spec.params = params_from_dict(params);
            spec.seed = seed;
            auto [model, seconds] = timed_fit(spec, train);
            return py::make_tuple(std::move(model), seconds);
        },
        py::arg("family"), py::arg("params"), py::arg("train"), py::arg("seed") = 0);

    m.def(
        "confusion",
        [](const std::vector<int>& truth, const std::vector<int>& predicted, int class_count) {
            const ConfusionMatrix cm = confusion(truth, predicted, class_count);
            py::list rows;
            for (int t = 0; t < class_count; ++t) {
                py::list row;
                for (int p = 0; p < class_count; ++p) row.append(cm.at(t, p));
                rows.append(row);
            }
            return rows;
        },
        py::arg("truth"), py::arg("predicted"), py::arg("class_count"));

    m.def(
        "prf",
        [](const std::vector<int>& truth, const std::vector<int>& predicted, int class_count) {
            const PrfSummary s = prf(confusion(truth, predicted, class_count));
            py::dict out;
            py::list per_class;
            for (const auto& pc : s.per_class) {
                py::dict e;
                e["precision"] = pc.precision;
                e["recall"] = pc.recall;
                e["f1"] = pc.f1;
                e["support"] = pc.support;
                per_class.append(e);
            }
            out["per_class"] = per_class;
            out["accuracy"] = s.accuracy;
            out["macro_f1"] = s.macro_f1;
            out["weighted_precision"] = s.weighted_precision;
            out["weighted_recall"] = s.weighted_recall;
            out["weighted_f1"] = s.weighted_f1;
            return out;
        },
        py::arg("truth"), py::arg("predicted"), py::arg("class_count"));

    m.def(
        "roc_auc",
        [](const std::vector<int>& truth, const std::vector<std::vector<double>>& scores) {
            if (scores.empty()) throw DataError("roc_auc: empty score matrix");
            Matrix m_scores(scores.size(), scores[0].size());
            for (std::size_t i = 0; i < scores.size(); ++i) {
                if (scores[i].size() != m_scores.cols) {
                    throw DataError("roc_auc: ragged score matrix");
                }
                for (std::size_t c = 0; c < m_scores.cols; ++c) {
                    m_scores.at(i, c) = scores[i][c];
                }
            }
            const RocResult r = roc_auc(truth, m_scores);
            py::dict out;
            py::list curves;
            for (const auto& curve : r.curves) {
                py::dict e;
                e["class"] = curve.class_id;
                e["defined"] = curve.defined;
                e["auc"] = curve.defined ? py::object(py::float_(curve.auc)) : py::none();
                e["fpr"] = curve.fpr;
                e["tpr"] = curve.tpr;
                curves.append(e);
            }
            out["curves"] = curves;
            out["weighted_auc"] = r.any_defined ? py::object(py::float_(r.weighted_auc))
                                                : py::none();
            out["macro_auc"] = r.any_defined ? py::object(py::float_(r.macro_auc)) : py::none();
            return out;
        },
        py::arg("truth"), py::arg("scores"));

    m.def(
        "grid_search",
        [](const std::string& family,
           const std::vector<std::pair<std::string, std::vector<std::variant<std::int64_t, double,
                                                                              std::string>>>>& axes,
           const Dataset& train, int folds, const std::string& strategy, int k_neighbors,
           const std::string& metric, std::uint64_t seed, int threads) {
            HyperGrid grid;
            grid.family = family_from_string(family);
            for (const auto& [key, values] : axes) {
                std::vector<ParamValue> converted;
                for (const auto& v : values) {
                    if (std::holds_alternative<std::int64_t>(v)) {
                        converted.emplace_back(std::get<std::int64_t>(v));
                    } else if (std::holds_alternative<double>(v)) {
                        converted.emplace_back(std::get<double>(v));
                    } else {
                        converted.emplace_back(std::get<std::string>(v));
                    }
                }
                grid.axes.emplace_back(key, std::move(converted));
            }
            const FoldPlan plan = make_folds(train, folds, seed);
            ResampleSpec rs;
            rs.strategy = resample_strategy_from_string(strategy);
            rs.k_neighbors = k_neighbors;
            const SearchResult result = grid_search(
                grid, train, plan, rs, selection_metric_from_string(metric), seed, threads);
            py::dict out;
            out["best_index"] = result.best_index;
            out["best_params"] = params_to_dict(result.candidates[result.best_index].params);
            out["leakage_audit_passed"] = result.leakage_audit_passed;
            py::list candidates;
            for (const auto& cand : result.candidates) {
                py::dict e;
                e["params"] = params_to_dict(cand.params);
                e["fold_scores"] = cand.fold_scores;
                e["mean_score"] = cand.mean_score;
                e["failed"] = cand.failed;
                candidates.append(e);
            }
            out["candidates"] = candidates;
            return out;
        },
        py::arg("family"), py::arg("axes"), py::arg("train"), py::arg("folds") = 5,
        py::arg("strategy") = "random_over", py::arg("k_neighbors") = 5,
        py::arg("metric") = "weighted_f1", py::arg("seed") = 0, py::arg("threads") = 1);

    m.def(
        "run_pipeline",
        [](const std::string& config_path, const std::string& out_dir,
           std::optional<std::uint64_t> seed, std::optional<std::string> strategy,
           std::optional<int> threads) {
            PipelineConfig config = load_pipeline_config(config_path);
            if (seed) {
                config.seed = *seed;
                if (config.dataset.synthetic) config.dataset.synth.seed = *seed;
            }
            if (strategy) config.strategy = resample_strategy_from_string(*strategy);
            if (threads) config.threads = *threads;
            const auto manifest = run_pipeline_to_dir(config, out_dir);
            py::module_ json = py::module_::import("json");
            return json.attr("loads")(manifest.dump());
        },
        py::arg("config_path"), py::arg("out_dir"), py::arg("seed") = py::none(),
        py::arg("strategy") = py::none(), py::arg("threads") = py::none(),
        "Run the end-to-end pipeline; returns the manifest as a dict");
}
