#include "skewlearn/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace skewlearn {

std::int64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t t = 0;
    for (int c = 0; c < class_count; ++c) t += at(c, c);
    return t;
}

std::vector<std::int64_t> ConfusionMatrix::support() const {
    std::vector<std::int64_t> s(static_cast<std::size_t>(class_count), 0);
    for (int t = 0; t < class_count; ++t) {
        for (int p = 0; p < class_count; ++p) s[static_cast<std::size_t>(t)] += at(t, p);
    }
    return s;
}

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted,
                          int class_count) {
    if (truth.size() != predicted.size()) {
        throw DataError("confusion: label vectors have different lengths");
    }
    if (class_count < 1) throw DataError("confusion: class_count must be positive");
    ConfusionMatrix m;
    m.class_count = class_count;
    m.counts.assign(static_cast<std::size_t>(class_count) * static_cast<std::size_t>(class_count),
                    0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i];
        const int p = predicted[i];
        if (t < 0 || t >= class_count || p < 0 || p >= class_count) {
            throw DataError("confusion: label out of range at row " + std::to_string(i));
        }
        m.counts[static_cast<std::size_t>(t) * static_cast<std::size_t>(class_count) +
                 static_cast<std::size_t>(p)] += 1;
    }
    return m;
}

PrfSummary prf(const ConfusionMatrix& matrix) {
    const int c_count = matrix.class_count;
    PrfSummary out;
    out.per_class.resize(static_cast<std::size_t>(c_count));
    const auto support = matrix.support();
    const std::int64_t total = matrix.total();
    out.accuracy = total > 0 ? static_cast<double>(matrix.trace()) / static_cast<double>(total)
                             : 0.0;

    double w_total = 0.0;
    for (int c = 0; c < c_count; ++c) {
        ClassPrf& pc = out.per_class[static_cast<std::size_t>(c)];
        const std::int64_t tp = matrix.at(c, c);
        std::int64_t fp = 0;
        for (int t = 0; t < c_count; ++t) {
            if (t != c) fp += matrix.at(t, c);
        }
        const std::int64_t fn = support[static_cast<std::size_t>(c)] - tp;
        pc.support = support[static_cast<std::size_t>(c)];

        if (tp + fp > 0) {
            pc.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        } else {
            pc.precision_defined = false;
        }
        if (tp + fn > 0) {
            pc.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
        } else {
            pc.recall_defined = false;
        }
        if (pc.precision + pc.recall > 0.0) {
            pc.f1 = 2.0 * pc.precision * pc.recall / (pc.precision + pc.recall);
        } else {
            pc.f1_defined = false;
        }

        out.macro_precision += pc.precision;
        out.macro_recall += pc.recall;
        out.macro_f1 += pc.f1;
        const double w = static_cast<double>(pc.support);
        out.weighted_precision += w * pc.precision;
        out.weighted_recall += w * pc.recall;
        out.weighted_f1 += w * pc.f1;
        w_total += w;
    }
    out.macro_precision /= static_cast<double>(c_count);
    out.macro_recall /= static_cast<double>(c_count);
    out.macro_f1 /= static_cast<double>(c_count);
    if (w_total > 0.0) {
        out.weighted_precision /= w_total;
        out.weighted_recall /= w_total;
        out.weighted_f1 /= w_total;
    }
    return out;
}

RocResult roc_auc(const std::vector<int>& truth, const Matrix& scores) {
    if (truth.size() != scores.rows) throw DataError("roc_auc: label/score length mismatch");
    const std::size_t n = truth.size();
    const int c_count = static_cast<int>(scores.cols);
    for (double s : scores.data) {
        if (!std::isfinite(s)) throw DataError("roc_auc: non-finite score");
    }

    RocResult out;
    double weighted_sum = 0.0, weight_total = 0.0, macro_sum = 0.0;
    int defined_count = 0;
    std::vector<std::size_t> order(n);
    for (int c = 0; c < c_count; ++c) {
        RocCurve curve;
        curve.class_id = c;
        std::size_t n_pos = 0;
        for (std::size_t i = 0; i < n; ++i) n_pos += truth[i] == c;
        const std::size_t n_neg = n - n_pos;
        if (n_pos == 0 || n_neg == 0) {
            curve.defined = false;
            out.curves.push_back(std::move(curve));
            continue;
        }

        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return scores.at(a, static_cast<std::size_t>(c)) >
                   scores.at(b, static_cast<std::size_t>(c));
        });

        curve.fpr.push_back(0.0);
        curve.tpr.push_back(0.0);
        curve.thresholds.push_back(std::numeric_limits<double>::infinity());
        std::size_t tp = 0, fp = 0;
        double auc = 0.0;
        std::size_t i = 0;
        while (i < n) {
            const double s = scores.at(order[i], static_cast<std::size_t>(c));
            // consume the whole tie group so equal scores form one step
            while (i < n && scores.at(order[i], static_cast<std::size_t>(c)) == s) {
                if (truth[order[i]] == c) ++tp;
                else ++fp;
                ++i;
            }
            const double x = static_cast<double>(fp) / static_cast<double>(n_neg);
            const double y = static_cast<double>(tp) / static_cast<double>(n_pos);
            auc += (x - curve.fpr.back()) * (y + curve.tpr.back()) / 2.0;
            curve.fpr.push_back(x);
            curve.tpr.push_back(y);
            curve.thresholds.push_back(s);
        }
        curve.auc = auc;
        weighted_sum += static_cast<double>(n_pos) * auc;
        weight_total += static_cast<double>(n_pos);
        macro_sum += auc;
        ++defined_count;
        out.curves.push_back(std::move(curve));
    }
    out.any_defined = defined_count > 0;
    if (out.any_defined) {
        out.weighted_auc = weighted_sum / weight_total;
        out.macro_auc = macro_sum / static_cast<double>(defined_count);
    }
    return out;
}

std::pair<TrainedModel, double> timed_fit(const LearnerSpec& spec, const Dataset& train) {
    const auto start = std::chrono::steady_clock::now();
    TrainedModel model = fit(spec, train);
    const auto stop = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(stop - start).count();
    return {std::move(model), seconds};
}

EvaluationReport evaluate_model(const TrainedModel& model, const Dataset& test) {
    EvaluationReport report;
    const auto predictions = predict_all(model, test);
    report.confusion = confusion(test.labels, predictions, model.class_count);
    report.prf = prf(report.confusion);
    report.roc = roc_auc(test.labels, score_all(model, test));
    if (model.family == Family::logreg || model.family == Family::random_forest ||
        model.family == Family::gbt || model.family == Family::gbt_xgb_mode) {
        report.feature_importances = feature_importance(model);
        report.has_importances = true;
    }
    return report;
}

} // namespace skewlearn
