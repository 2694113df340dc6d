#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "skewlearn/tabular.hpp"
#include "skewlearn/tree.hpp"

namespace skewlearn {

enum class Family {
    logreg,
    random_forest,
    gbt,
    gbt_xgb_mode,
    mlp_bagging,
    svm_rbf,
};

std::string to_string(Family f);
Family family_from_string(const std::string& s);

using ParamValue = std::variant<std::int64_t, double, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

std::string to_string(const ParamValue& v);

struct LearnerSpec {
    Family family = Family::random_forest;
    ParamMap params;
    std::uint64_t seed = 0;
};

/// Throws ConfigError on unknown keys or out-of-range values for the family.
void validate_params(Family family, const ParamMap& params);

// ---- resolved per-family configurations -----------------------------------

enum class MaxFeaturesRule { sqrt_rule, log2_rule, all };

struct LogregConfig {
    double c = 1.0;
    int max_iterations = 100;
    std::string solver = "lbfgs"; // recorded; every solver targets the same optimum
};

struct ForestConfig {
    int n_estimators = 100;
    MaxFeaturesRule max_features = MaxFeaturesRule::sqrt_rule;
    int max_depth = -1; // -1 = grow until purity / min-samples constraints
    int min_samples_split = 2;
    int min_samples_leaf = 1;
};

struct GbtConfig {
    int n_estimators = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    MaxFeaturesRule max_features = MaxFeaturesRule::all;
    double subsample = 1.0;
};

struct XgbConfig {
    int n_estimators = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    double min_child_weight = 1.0;
    double gamma = 0.0;
    double subsample = 1.0;
    double colsample_bytree = 1.0;
    double reg_lambda = 1.0; // fixed; not part of the searched keys
};

struct SvmConfig {
    double c = 10.0;
    double gamma = 0.01;
    double kkt_tol = 1e-3;
};

struct MlpConfig {
    int max_iteration = 1000;
    double initial_learning_rate = 0.001;
    int n_estimators = 10;
    int hidden_units = 100; // fixed architecture
};

LogregConfig resolve_logreg(const ParamMap& params);
ForestConfig resolve_forest(const ParamMap& params);
GbtConfig resolve_gbt(const ParamMap& params);
XgbConfig resolve_xgb(const ParamMap& params);
SvmConfig resolve_svm(const ParamMap& params);
MlpConfig resolve_mlp(const ParamMap& params);

// ---- fitted state ----------------------------------------------------------

struct LogregModel {
    Matrix weights;                // class_count x d
    std::vector<double> intercepts;
    int iterations = 0;
    double final_grad_norm = 0.0;
};

struct ForestModel {
    std::vector<Tree> trees;
    std::vector<double> importance; // per-feature Gini decrease, sums to 1
};

struct GbtModel {
    std::vector<std::vector<Tree>> rounds; // [round][class], additive scores
    double learning_rate = 0.1;
    bool xgb_mode = false;
    std::vector<double> importance;        // per-feature gain, sums to 1
    std::vector<double> train_loss;        // softmax loss before/after each round
};

struct MlpNet {
    Matrix w1; // hidden x d
    std::vector<double> b1;
    Matrix w2; // class_count x hidden
    std::vector<double> b2;
};

struct MlpBaggingModel {
    std::vector<MlpNet> members;
    int hidden_units = 100;
};

struct SvmBinaryModel {
    Matrix support_vectors;        // n_sv x d
    std::vector<double> coef;      // alpha_i * y_i per support vector
    double bias = 0.0;
};

struct SvmOvrModel {
    std::vector<SvmBinaryModel> machines; // one per class
    double gamma = 0.01;
};

struct TrainedModel {
    Family family = Family::random_forest;
    int feature_count = 0;
    int class_count = 0;
    std::variant<LogregModel, ForestModel, GbtModel, MlpBaggingModel, SvmOvrModel> state;
};

/// Trains on a complete numeric dataset. Throws ConfigError for bad params,
/// DataError for unusable data, TrainError on divergence.
TrainedModel fit(const LearnerSpec& spec, const Dataset& train);

/// Length-C score vector: a probability distribution for logreg / forest /
/// gbt / mlp_bagging, raw one-vs-rest decision values for svm_rbf.
std::vector<double> score(const TrainedModel& model, std::span<const double> x);

Matrix score_all(const TrainedModel& model, const Dataset& ds);

/// argmax of score(x); ties go to the lowest class id.
int predict(const TrainedModel& model, std::span<const double> x);
std::vector<int> predict_all(const TrainedModel& model, const Dataset& ds);

/// Normalized per-feature importances for logreg and the tree families;
/// throws ConfigError for mlp_bagging and svm_rbf.
std::vector<double> feature_importance(const TrainedModel& model);

namespace detail {

/// Gini impurity 1 - sum_c p_c^2 of a class-count histogram.
double gini_impurity(std::span<const std::size_t> counts);

/// Second-order split machinery, exposed for direct verification.
double xgb_leaf_weight(double grad_sum, double hess_sum, double reg_lambda);
double xgb_split_gain(double gl, double hl, double gr, double hr, double reg_lambda,
                      double gamma_penalty);

/// Multinomial logistic loss (summed cross-entropy + L2/(2c) on weights) and
/// its gradient; used by the optimizer and by finite-difference checks.
double logreg_loss_grad(const Matrix& weights, const std::vector<double>& intercepts,
                        const Dataset& data, double c_reg, Matrix* grad_w,
                        std::vector<double>* grad_b);

/// Mean cross-entropy of a one-hidden-layer ReLU/softmax net over the given
/// rows, with gradients for every parameter; used by Adam and by checks.
double mlp_loss_grad(const MlpNet& net, const Dataset& data,
                     const std::vector<std::size_t>& rows, MlpNet* grad);

struct SvmSolution {
    std::vector<double> alpha;
    double bias = 0.0;
    std::size_t updates = 0;
};

/// SMO on the dual soft-margin problem with an RBF kernel; y in {-1,+1}.
SvmSolution solve_svm_binary(const Matrix& x, const std::vector<double>& y, double c,
                             double gamma, double kkt_tol);

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

void softmax_inplace(std::span<double> z);

} // namespace detail

} // namespace skewlearn
