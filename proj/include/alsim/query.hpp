#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "alsim/dataset.hpp"
#include "alsim/model.hpp"

namespace alsim {

struct QuerySelection {
    std::vector<std::size_t> selected_ids;  // distinct, drawn from the unlabeled set
    std::vector<double> scores;             // uncertainty score per selected id
    std::string strategy_tag;
};

struct ScoredSample {
    std::size_t id = 0;
    double score = 0.0;
};

// Threshold at 0.5, boundary inclusive: y_hat[j] = 1 iff probs[j] >= threshold.
MultiLabelVector pseudo_label(std::span<const double> probs, double threshold = 0.5);

// MGE uncertainty per sample: the Euclidean magnitude of the last-layer BCE
// gradient computed under the sample's pseudo-labels. Depends only on the
// model and the features, never on ground-truth labels. Returned in input order.
std::vector<ScoredSample> mge_scores(const ModelParams& params,
                                     std::span<const Sample* const> unlabeled);

// Uniform sample of min(budget, |unlabeled|) ids without replacement.
QuerySelection random_query(std::span<const Sample* const> unlabeled, std::size_t budget,
                            Rng& rng);

// Top-budget by MGE magnitude, ties to the lowest id.
QuerySelection mge_query(const ModelParams& params, std::span<const Sample* const> unlabeled,
                         std::size_t budget);

// The full query function: score everything, keep the m most uncertain
// candidates, cluster their penultimate features into `budget` groups, and take
// the most uncertain sample of each group. Degenerate geometry (fewer clusters
// than budget) is topped up by global magnitude rank.
QuerySelection mge_clustering_query(const ModelParams& params,
                                    std::span<const Sample* const> unlabeled, std::size_t budget,
                                    std::size_t m, Rng& rng);

}  // namespace alsim
