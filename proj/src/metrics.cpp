#include "alsim/metrics.hpp"

#include <cmath>

#include "alsim/error.hpp"

namespace alsim {

ConfusionCounts confusion(const std::vector<MultiLabelVector>& predictions,
                          const std::vector<MultiLabelVector>& truths) {
    if (predictions.size() != truths.size())
        throw ConfigError("confusion: prediction/truth count mismatch");
    std::size_t C = predictions.empty() ? 0 : predictions[0].size();
    ConfusionCounts counts;
    counts.tp.assign(C, 0);
    counts.fp.assign(C, 0);
    counts.fn.assign(C, 0);
    counts.tn.assign(C, 0);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i].size() != C || truths[i].size() != C)
            throw ConfigError("confusion: class count mismatch at sample " + std::to_string(i));
        for (std::size_t j = 0; j < C; ++j) {
            bool p = predictions[i].present(j);
            bool t = truths[i].present(j);
            if (p && t)
                ++counts.tp[j];
            else if (p && !t)
                ++counts.fp[j];
            else if (!p && t)
                ++counts.fn[j];
            else
                ++counts.tn[j];
        }
    }
    return counts;
}

namespace {

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double f1_from(double tp, double fp, double fn) {
    double precision = safe_div(tp, tp + fp);
    double recall = safe_div(tp, tp + fn);
    return safe_div(2.0 * precision * recall, precision + recall);
}

}  // namespace

double micro_f1(const ConfusionCounts& counts) {
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (std::size_t j = 0; j < counts.num_classes(); ++j) {
        tp += static_cast<double>(counts.tp[j]);
        fp += static_cast<double>(counts.fp[j]);
        fn += static_cast<double>(counts.fn[j]);
    }
    return f1_from(tp, fp, fn);
}

std::vector<double> per_class_f1(const ConfusionCounts& counts) {
    std::vector<double> f1(counts.num_classes());
    for (std::size_t j = 0; j < counts.num_classes(); ++j)
        f1[j] = f1_from(static_cast<double>(counts.tp[j]), static_cast<double>(counts.fp[j]),
                        static_cast<double>(counts.fn[j]));
    return f1;
}

double macro_f1(const ConfusionCounts& counts) {
    if (counts.num_classes() == 0) return 0.0;
    std::vector<double> f1 = per_class_f1(counts);
    double sum = 0.0;
    for (double v : f1) sum += v;
    return sum / static_cast<double>(f1.size());
}

CurveSummary aggregate(const std::vector<std::vector<CurvePoint>>& run_curves) {
    if (run_curves.empty()) throw ConfigError("aggregate: no runs");
    const std::vector<CurvePoint>& first = run_curves[0];
    for (const auto& curve : run_curves) {
        if (curve.size() != first.size())
            throw ConfigError("aggregate: runs have mismatched checkpoint grids");
        for (std::size_t i = 0; i < curve.size(); ++i)
            if (curve[i].labeled_count != first[i].labeled_count)
                throw ConfigError("aggregate: runs have mismatched checkpoint grids");
    }

    const std::size_t n_points = first.size();
    const double n_runs = static_cast<double>(run_curves.size());
    CurveSummary summary;
    summary.labeled_counts.resize(n_points);
    summary.micro_mean.assign(n_points, 0.0);
    summary.micro_std.assign(n_points, 0.0);
    summary.macro_mean.assign(n_points, 0.0);
    summary.macro_std.assign(n_points, 0.0);

    for (std::size_t i = 0; i < n_points; ++i) {
        summary.labeled_counts[i] = first[i].labeled_count;
        double micro_sum = 0.0, macro_sum = 0.0;
        for (const auto& curve : run_curves) {
            micro_sum += curve[i].micro_f1;
            macro_sum += curve[i].macro_f1;
        }
        double micro_mean = micro_sum / n_runs;
        double macro_mean = macro_sum / n_runs;
        double micro_var = 0.0, macro_var = 0.0;
        for (const auto& curve : run_curves) {
            micro_var += (curve[i].micro_f1 - micro_mean) * (curve[i].micro_f1 - micro_mean);
            macro_var += (curve[i].macro_f1 - macro_mean) * (curve[i].macro_f1 - macro_mean);
        }
        summary.micro_mean[i] = micro_mean;
        summary.micro_std[i] = std::sqrt(micro_var / n_runs);
        summary.macro_mean[i] = macro_mean;
        summary.macro_std[i] = std::sqrt(macro_var / n_runs);
    }

    double total = 0.0;
    for (const auto& curve : run_curves)
        for (const CurvePoint& point : curve) total += point.macro_f1;
    summary.macro_mean_over_iterations = n_points == 0 ? 0.0 : total / (n_runs * n_points);
    return summary;
}

}  // namespace alsim
