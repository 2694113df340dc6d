#pragma once

#include <cstdint>
#include <vector>

#include "skewlearn/learners.hpp"
#include "skewlearn/tabular.hpp"

namespace skewlearn {

/// counts[t][p] = rows of true class t predicted as p.
struct ConfusionMatrix {
    int class_count = 0;
    std::vector<std::int64_t> counts; // class_count x class_count, row-major

    std::int64_t at(int t, int p) const {
        return counts[static_cast<std::size_t>(t) * static_cast<std::size_t>(class_count) +
                      static_cast<std::size_t>(p)];
    }
    std::int64_t total() const;
    std::int64_t trace() const;
    std::vector<std::int64_t> support() const; // row sums
};

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted,
                          int class_count);

/// 0/0 cases yield 0 with the corresponding defined flag cleared.
struct ClassPrf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
    bool precision_defined = true;
    bool recall_defined = true;
    bool f1_defined = true;
};

struct PrfSummary {
    std::vector<ClassPrf> per_class;
    double accuracy = 0.0;
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
    double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
};

PrfSummary prf(const ConfusionMatrix& matrix);

/// One-vs-rest ROC curve. Points start at (0,0) and end at (1,1); tied scores
/// collapse into a single step so the trapezoidal area matches the
/// Mann-Whitney statistic exactly. thresholds[0] is +infinity.
struct RocCurve {
    int class_id = 0;
    std::vector<double> fpr, tpr, thresholds;
    double auc = 0.0;
    bool defined = true; // false when the class has no positives or no negatives
};

struct RocResult {
    std::vector<RocCurve> curves;
    double weighted_auc = 0.0; // support-weighted over defined classes
    double macro_auc = 0.0;
    bool any_defined = true;
};

RocResult roc_auc(const std::vector<int>& truth, const Matrix& scores);

struct EvaluationReport {
    ConfusionMatrix confusion;
    PrfSummary prf;
    RocResult roc;
    double train_time_seconds = 0.0;
    std::vector<double> feature_importances;
    bool has_importances = false;
};

/// Wall-clock (monotonic) training time alongside the fitted model.
std::pair<TrainedModel, double> timed_fit(const LearnerSpec& spec, const Dataset& train);

/// Scores the test split and assembles confusion/PRF/ROC.
EvaluationReport evaluate_model(const TrainedModel& model, const Dataset& test);

} // namespace skewlearn
