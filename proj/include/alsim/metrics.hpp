#pragma once

#include <cstddef>
#include <vector>

#include "alsim/dataset.hpp"

namespace alsim {

struct ConfusionCounts {
    std::vector<std::size_t> tp, fp, fn, tn;  // one entry per class

    std::size_t num_classes() const { return tp.size(); }
};

ConfusionCounts confusion(const std::vector<MultiLabelVector>& predictions,
                          const std::vector<MultiLabelVector>& truths);

// F1 of the class-pooled counts. Degenerate 0/0 ratios evaluate to 0.
double micro_f1(const ConfusionCounts& counts);

// Unweighted mean of per-class F1 over all classes (0/0 -> 0 per class).
double macro_f1(const ConfusionCounts& counts);

std::vector<double> per_class_f1(const ConfusionCounts& counts);

// One evaluation checkpoint of one run.
struct CurvePoint {
    std::size_t labeled_count = 0;
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
};

struct CurveSummary {
    std::vector<std::size_t> labeled_counts;
    std::vector<double> micro_mean, micro_std;
    std::vector<double> macro_mean, macro_std;
    double macro_mean_over_iterations = 0.0;  // macro F1 averaged over all checkpoints and runs
};

// Pointwise mean/std across runs sharing the same checkpoint grid.
// Standard deviations are population deviations (a single run yields zeros).
CurveSummary aggregate(const std::vector<std::vector<CurvePoint>>& run_curves);

}  // namespace alsim
