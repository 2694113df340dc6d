#include "skewlearn/learners.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace skewlearn {

std::string to_string(Family f) {
    switch (f) {
    case Family::logreg: return "logreg";
    case Family::random_forest: return "random_forest";
    case Family::gbt: return "gbt";
    case Family::gbt_xgb_mode: return "gbt_xgb_mode";
    case Family::mlp_bagging: return "mlp_bagging";
    case Family::svm_rbf: return "svm_rbf";
    }
    return "random_forest";
}

Family family_from_string(const std::string& s) {
    if (s == "logreg") return Family::logreg;
    if (s == "random_forest") return Family::random_forest;
    if (s == "gbt") return Family::gbt;
    if (s == "gbt_xgb_mode") return Family::gbt_xgb_mode;
    if (s == "mlp_bagging") return Family::mlp_bagging;
    if (s == "svm_rbf") return Family::svm_rbf;
    throw ConfigError("unknown learner family '" + s + "'");
}

std::string to_string(const ParamValue& v) {
    if (std::holds_alternative<std::int64_t>(v)) return std::to_string(std::get<std::int64_t>(v));
    if (std::holds_alternative<double>(v)) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%g", std::get<double>(v));
        return buf;
    }
    return std::get<std::string>(v);
}

namespace {

void require_keys(Family family, const ParamMap& params, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : params) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown parameter '" + key + "' for family " + to_string(family));
        }
    }
}

std::int64_t get_int(const ParamMap& params, const std::string& key, std::int64_t fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    if (const auto* i = std::get_if<std::int64_t>(&it->second)) return *i;
    if (const auto* d = std::get_if<double>(&it->second)) {
        if (*d == std::floor(*d)) return static_cast<std::int64_t>(*d);
    }
    throw ConfigError("parameter '" + key + "' must be an integer");
}

double get_real(const ParamMap& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    if (const auto* d = std::get_if<double>(&it->second)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*i);
    throw ConfigError("parameter '" + key + "' must be numeric");
}

std::string get_str(const ParamMap& params, const std::string& key, const std::string& fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
    throw ConfigError("parameter '" + key + "' must be a string");
}

int positive_int(const ParamMap& params, const std::string& key, std::int64_t fallback) {
    const std::int64_t v = get_int(params, key, fallback);
    if (v < 1) throw ConfigError("parameter '" + key + "' must be at least 1");
    return static_cast<int>(v);
}

// max_depth accepts a positive integer or the string "none".
int depth_param(const ParamMap& params, int fallback) {
    auto it = params.find("max_depth");
    if (it == params.end()) return fallback;
    if (const auto* s = std::get_if<std::string>(&it->second)) {
        if (*s == "none" || *s == "None") return -1;
        throw ConfigError("max_depth must be a positive integer or \"none\"");
    }
    const std::int64_t v = get_int(params, "max_depth", fallback);
    if (v == -1) return -1;
    if (v < 1) throw ConfigError("max_depth must be a positive integer or \"none\"");
    return static_cast<int>(v);
}

MaxFeaturesRule features_rule(const std::string& s, bool allow_all) {
    if (s == "sqrt") return MaxFeaturesRule::sqrt_rule;
    if (s == "log2") return MaxFeaturesRule::log2_rule;
    if (allow_all && (s == "none" || s == "None" || s == "all")) return MaxFeaturesRule::all;
    throw ConfigError("max_features must be one of sqrt, log2" +
                      std::string(allow_all ? ", none" : ""));
}

} // namespace

LogregConfig resolve_logreg(const ParamMap& params) {
    require_keys(Family::logreg, params, {"c", "max_iterations", "solver"});
    LogregConfig cfg;
    cfg.c = get_real(params, "c", cfg.c);
    if (!(cfg.c > 0.0)) throw ConfigError("parameter 'c' must be positive");
    cfg.max_iterations = positive_int(params, "max_iterations", cfg.max_iterations);
    cfg.solver = get_str(params, "solver", cfg.solver);
    static const std::set<std::string> solvers = {"newton-cg", "lbfgs", "sag", "saga"};
    if (!solvers.count(cfg.solver)) {
        throw ConfigError("unknown logreg solver '" + cfg.solver + "'");
    }
    return cfg;
}

ForestConfig resolve_forest(const ParamMap& params) {
    require_keys(Family::random_forest, params,
                 {"n_estimators", "max_features", "max_depth", "min_samples_split",
                  "min_samples_leaf"});
    ForestConfig cfg;
    cfg.n_estimators = positive_int(params, "n_estimators", cfg.n_estimators);
    cfg.max_features = features_rule(get_str(params, "max_features", "sqrt"), false);
    cfg.max_depth = depth_param(params, cfg.max_depth);
    cfg.min_samples_split = positive_int(params, "min_samples_split", cfg.min_samples_split);
    if (cfg.min_samples_split < 2) throw ConfigError("min_samples_split must be at least 2");
    cfg.min_samples_leaf = positive_int(params, "min_samples_leaf", cfg.min_samples_leaf);
    return cfg;
}

GbtConfig resolve_gbt(const ParamMap& params) {
    require_keys(Family::gbt, params,
                 {"n_estimators", "learning_rate", "max_depth", "min_samples_split",
                  "min_samples_leaf", "max_features", "subsample"});
    GbtConfig cfg;
    cfg.n_estimators = positive_int(params, "n_estimators", cfg.n_estimators);
    cfg.learning_rate = get_real(params, "learning_rate", cfg.learning_rate);
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    cfg.max_depth = depth_param(params, cfg.max_depth);
    cfg.min_samples_split = positive_int(params, "min_samples_split", cfg.min_samples_split);
    if (cfg.min_samples_split < 2) throw ConfigError("min_samples_split must be at least 2");
    cfg.min_samples_leaf = positive_int(params, "min_samples_leaf", cfg.min_samples_leaf);
    cfg.max_features = features_rule(get_str(params, "max_features", "none"), true);
    cfg.subsample = get_real(params, "subsample", cfg.subsample);
    if (!(cfg.subsample > 0.0 && cfg.subsample <= 1.0)) {
        throw ConfigError("subsample must lie in (0, 1]");
    }
    return cfg;
}

XgbConfig resolve_xgb(const ParamMap& params) {
    require_keys(Family::gbt_xgb_mode, params,
                 {"n_estimators", "learning_rate", "max_depth", "min_child_weight", "gamma",
                  "subsample", "colsample_bytree"});
    XgbConfig cfg;
    cfg.n_estimators = positive_int(params, "n_estimators", cfg.n_estimators);
    cfg.learning_rate = get_real(params, "learning_rate", cfg.learning_rate);
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    cfg.max_depth = depth_param(params, cfg.max_depth);
    cfg.min_child_weight = get_real(params, "min_child_weight", cfg.min_child_weight);
    if (cfg.min_child_weight < 0.0) throw ConfigError("min_child_weight must be non-negative");
    cfg.gamma = get_real(params, "gamma", cfg.gamma);
    if (cfg.gamma < 0.0) throw ConfigError("gamma must be non-negative");
    cfg.subsample = get_real(params, "subsample", cfg.subsample);
    if (!(cfg.subsample > 0.0 && cfg.subsample <= 1.0)) {
        throw ConfigError("subsample must lie in (0, 1]");
    }
    cfg.colsample_bytree = get_real(params, "colsample_bytree", cfg.colsample_bytree);
    if (!(cfg.colsample_bytree > 0.0 && cfg.colsample_bytree <= 1.0)) {
        throw ConfigError("colsample_bytree must lie in (0, 1]");
    }
    return cfg;
}

SvmConfig resolve_svm(const ParamMap& params) {
    require_keys(Family::svm_rbf, params, {"kernel", "c", "decision_function_shape", "gamma"});
    const std::string kernel = get_str(params, "kernel", "rbf");
    if (kernel != "rbf") throw ConfigError("only the rbf kernel is supported");
    const std::string shape = get_str(params, "decision_function_shape", "ovr");
    if (shape != "ovr") throw ConfigError("only one-vs-rest decision functions are supported");
    SvmConfig cfg;
    cfg.c = get_real(params, "c", cfg.c);
    if (!(cfg.c > 0.0)) throw ConfigError("parameter 'c' must be positive");
    cfg.gamma = get_real(params, "gamma", cfg.gamma);
    if (!(cfg.gamma > 0.0)) throw ConfigError("parameter 'gamma' must be positive");
    return cfg;
}

MlpConfig resolve_mlp(const ParamMap& params) {
    require_keys(Family::mlp_bagging, params,
                 {"max_iteration", "initial_learning_rate", "n_estimators"});
    MlpConfig cfg;
    cfg.max_iteration = positive_int(params, "max_iteration", cfg.max_iteration);
    cfg.initial_learning_rate = get_real(params, "initial_learning_rate", cfg.initial_learning_rate);
    if (!(cfg.initial_learning_rate > 0.0)) {
        throw ConfigError("initial_learning_rate must be positive");
    }
    cfg.n_estimators = positive_int(params, "n_estimators", cfg.n_estimators);
    return cfg;
}

void validate_params(Family family, const ParamMap& params) {
    switch (family) {
    case Family::logreg: resolve_logreg(params); return;
    case Family::random_forest: resolve_forest(params); return;
    case Family::gbt: resolve_gbt(params); return;
    case Family::gbt_xgb_mode: resolve_xgb(params); return;
    case Family::svm_rbf: resolve_svm(params); return;
    case Family::mlp_bagging: resolve_mlp(params); return;
    }
}

namespace detail {

void softmax_inplace(std::span<double> z) {
    double max_z = z[0];
    for (double v : z) max_z = std::max(max_z, v);
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - max_z);
        sum += v;
    }
    for (double& v : z) v /= sum;
}

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return std::exp(-gamma * s);
}

// Per-family fit entry points, defined in their own translation units.
TrainedModel fit_logreg(const LearnerSpec& spec, const Dataset& train);
TrainedModel fit_forest(const LearnerSpec& spec, const Dataset& train);
TrainedModel fit_gbt(const LearnerSpec& spec, const Dataset& train, bool xgb_mode);
TrainedModel fit_mlp_bagging(const LearnerSpec& spec, const Dataset& train);
TrainedModel fit_svm(const LearnerSpec& spec, const Dataset& train);

} // namespace detail

namespace {

void check_trainable(const Dataset& train) {
    train.validate();
    if (!train.is_complete_numeric()) {
        throw DataError("learner: training data must be complete and numeric "
                        "(impute and encode first)");
    }
    for (double v : train.values.data) {
        if (!std::isfinite(v)) throw DataError("learner: non-finite feature value");
    }
}

} // namespace

TrainedModel fit(const LearnerSpec& spec, const Dataset& train) {
    check_trainable(train);
    switch (spec.family) {
    case Family::logreg: return detail::fit_logreg(spec, train);
    case Family::random_forest: return detail::fit_forest(spec, train);
    case Family::gbt: return detail::fit_gbt(spec, train, false);
    case Family::gbt_xgb_mode: return detail::fit_gbt(spec, train, true);
    case Family::mlp_bagging: return detail::fit_mlp_bagging(spec, train);
    case Family::svm_rbf: return detail::fit_svm(spec, train);
    }
    throw ConfigError("unknown learner family");
}

std::vector<double> score(const TrainedModel& model, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(model.feature_count)) {
        throw DataError("score: expected " + std::to_string(model.feature_count) +
                        " features, got " + std::to_string(x.size()));
    }
    const std::size_t c_count = static_cast<std::size_t>(model.class_count);
    std::vector<double> out(c_count, 0.0);

    if (const auto* m = std::get_if<LogregModel>(&model.state)) {
        for (std::size_t c = 0; c < c_count; ++c) {
            double z = m->intercepts[c];
            const auto row = m->weights.row(c);
            for (std::size_t j = 0; j < x.size(); ++j) z += row[j] * x[j];
            out[c] = z;
        }
        detail::softmax_inplace(out);
    } else if (const auto* m = std::get_if<ForestModel>(&model.state)) {
        for (const Tree& tree : m->trees) {
            const auto& leaf = tree.leaf_value(x);
            for (std::size_t c = 0; c < c_count; ++c) out[c] += leaf[c];
        }
        for (double& v : out) v /= static_cast<double>(m->trees.size());
    } else if (const auto* m = std::get_if<GbtModel>(&model.state)) {
        for (const auto& round : m->rounds) {
            for (std::size_t c = 0; c < c_count; ++c) {
                out[c] += m->learning_rate * round[c].predict_scalar(x);
            }
        }
        detail::softmax_inplace(out);
    } else if (const auto* m = std::get_if<MlpBaggingModel>(&model.state)) {
        const std::size_t hidden = static_cast<std::size_t>(m->hidden_units);
        std::vector<double> a1(hidden);
        std::vector<double> z2(c_count);
        for (const MlpNet& net : m->members) {
            for (std::size_t h = 0; h < hidden; ++h) {
                double z = net.b1[h];
                const auto row = net.w1.row(h);
                for (std::size_t j = 0; j < x.size(); ++j) z += row[j] * x[j];
                a1[h] = z > 0.0 ? z : 0.0;
            }
            for (std::size_t c = 0; c < c_count; ++c) {
                double z = net.b2[c];
                const auto row = net.w2.row(c);
                for (std::size_t h = 0; h < hidden; ++h) z += row[h] * a1[h];
                z2[c] = z;
            }
            detail::softmax_inplace(z2);
            for (std::size_t c = 0; c < c_count; ++c) out[c] += z2[c];
        }
        for (double& v : out) v /= static_cast<double>(m->members.size());
    } else if (const auto* m = std::get_if<SvmOvrModel>(&model.state)) {
        for (std::size_t c = 0; c < c_count; ++c) {
            const auto& bin = m->machines[c];
            double f = bin.bias;
            for (std::size_t s = 0; s < bin.coef.size(); ++s) {
                f += bin.coef[s] * detail::rbf_kernel(bin.support_vectors.row(s), x, m->gamma);
            }
            out[c] = f;
        }
    }
    return out;
}

Matrix score_all(const TrainedModel& model, const Dataset& ds) {
    Matrix scores(ds.n_rows(), static_cast<std::size_t>(model.class_count));
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        const auto s = score(model, ds.values.row(i));
        std::copy(s.begin(), s.end(), scores.row(i).begin());
    }
    return scores;
}

int predict(const TrainedModel& model, std::span<const double> x) {
    const auto s = score(model, x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < s.size(); ++c) {
        if (s[c] > s[best]) best = c;
    }
    return static_cast<int>(best);
}

std::vector<int> predict_all(const TrainedModel& model, const Dataset& ds) {
    std::vector<int> out(ds.n_rows());
    for (std::size_t i = 0; i < ds.n_rows(); ++i) out[i] = predict(model, ds.values.row(i));
    return out;
}

std::vector<double> feature_importance(const TrainedModel& model) {
    std::vector<double> imp;
    if (const auto* m = std::get_if<LogregModel>(&model.state)) {
        imp.assign(static_cast<std::size_t>(model.feature_count), 0.0);
        for (std::size_t c = 0; c < m->weights.rows; ++c) {
            for (std::size_t j = 0; j < m->weights.cols; ++j) {
                imp[j] += std::abs(m->weights.at(c, j));
            }
        }
        for (double& v : imp) v /= static_cast<double>(m->weights.rows);
    } else if (const auto* m = std::get_if<ForestModel>(&model.state)) {
        imp = m->importance;
    } else if (const auto* m = std::get_if<GbtModel>(&model.state)) {
        imp = m->importance;
    } else {
        throw ConfigError("feature importance is not available for family " +
                          to_string(model.family));
    }
    double total = 0.0;
    for (double v : imp) total += v;
    if (total > 0.0) {
        for (double& v : imp) v /= total;
    }
    return imp;
}

} // namespace skewlearn
