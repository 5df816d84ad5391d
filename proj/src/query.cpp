#include "alsim/query.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "alsim/cluster.hpp"
#include "alsim/error.hpp"

namespace alsim {

MultiLabelVector pseudo_label(std::span<const double> probs, double threshold) {
    MultiLabelVector labels;
    labels.bits.resize(probs.size());
    for (std::size_t j = 0; j < probs.size(); ++j)
        labels.bits[j] = probs[j] >= threshold ? 1 : 0;
    return labels;
}

std::vector<ScoredSample> mge_scores(const ModelParams& params,
                                     std::span<const Sample* const> unlabeled) {
    std::vector<ScoredSample> scores;
    scores.reserve(unlabeled.size());
    for (const Sample* sample : unlabeled) {
        ForwardResult fr = forward(params, sample->features);
        MultiLabelVector y_hat = pseudo_label(fr.probs);
        GradientEmbedding g = last_layer_gradient(params, sample->features, y_hat);
        scores.push_back({sample->id, g.magnitude});
    }
    return scores;
}

namespace {

// Descending score, ascending id on ties; the one ordering every strategy uses.
void sort_by_uncertainty(std::vector<ScoredSample>& scores) {
    std::sort(scores.begin(), scores.end(), [](const ScoredSample& a, const ScoredSample& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
}

QuerySelection take_top(std::vector<ScoredSample> scores, std::size_t budget,
                        const std::string& tag) {
    sort_by_uncertainty(scores);
    QuerySelection selection;
    selection.strategy_tag = tag;
    std::size_t n = std::min(budget, scores.size());
    for (std::size_t i = 0; i < n; ++i) {
        selection.selected_ids.push_back(scores[i].id);
        selection.scores.push_back(scores[i].score);
    }
    return selection;
}

}  // namespace

QuerySelection random_query(std::span<const Sample* const> unlabeled, std::size_t budget,
                            Rng& rng) {
    if (budget < 1) throw ConfigError("random_query: budget must be at least 1");
    QuerySelection selection;
    selection.strategy_tag = "random";
    if (unlabeled.empty()) return selection;

    std::vector<std::size_t> ids;
    ids.reserve(unlabeled.size());
    for (const Sample* sample : unlabeled) ids.push_back(sample->id);
    std::sort(ids.begin(), ids.end());  // caller order must not matter

    std::vector<std::size_t> picks =
        rng.sample_without_replacement(ids.size(), std::min(budget, ids.size()));
    for (std::size_t p : picks) {
        selection.selected_ids.push_back(ids[p]);
        selection.scores.push_back(0.0);
    }
    return selection;
}

QuerySelection mge_query(const ModelParams& params, std::span<const Sample* const> unlabeled,
                         std::size_t budget) {
    if (budget < 1) throw ConfigError("mge_query: budget must be at least 1");
    if (unlabeled.empty()) return QuerySelection{{}, {}, "mge"};
    return take_top(mge_scores(params, unlabeled), budget, "mge");
}

QuerySelection mge_clustering_query(const ModelParams& params,
                                    std::span<const Sample* const> unlabeled, std::size_t budget,
                                    std::size_t m, Rng& rng) {
    if (budget < 1) throw ConfigError("mge_clustering_query: budget must be at least 1");
    if (unlabeled.empty()) return QuerySelection{{}, {}, "mge_clustering"};

    std::vector<ScoredSample> scores = mge_scores(params, unlabeled);
    sort_by_uncertainty(scores);

    std::size_t m_eff = std::min(m, scores.size());
    if (m_eff <= budget)
        return take_top(std::move(scores), budget, "mge_clustering");

    std::unordered_map<std::size_t, const Sample*> by_id;
    for (const Sample* sample : unlabeled) by_id.emplace(sample->id, sample);

    // Candidates: the m most uncertain, ranked. Cluster their learned
    // (penultimate) features into `budget` groups.
    std::vector<ScoredSample> candidates(scores.begin(), scores.begin() + m_eff);
    std::vector<std::vector<double>> features;
    features.reserve(m_eff);
    for (const ScoredSample& c : candidates)
        features.push_back(forward(params, by_id.at(c.id)->features).penultimate);

    Clustering clustering = cluster(features, budget, rng);

    // Most uncertain member of each cluster; candidates are already ranked, so
    // the first hit per cluster wins.
    std::vector<std::size_t> best(clustering.num_clusters(), m_eff);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        std::size_t c = clustering.assignment[i];
        if (best[c] == m_eff) best[c] = i;
    }

    std::vector<ScoredSample> picked;
    std::unordered_set<std::size_t> used;
    for (std::size_t c = 0; c < best.size(); ++c)
        if (best[c] != m_eff) {
            picked.push_back(candidates[best[c]]);
            used.insert(best[c]);
        }

    // Degenerate geometry can leave fewer clusters than budget; fill the gap by
    // global rank among the remaining candidates.
    for (std::size_t i = 0; i < candidates.size() && picked.size() < budget; ++i)
        if (!used.count(i)) {
            picked.push_back(candidates[i]);
            used.insert(i);
        }

    return take_top(std::move(picked), budget, "mge_clustering");
}

}  // namespace alsim
