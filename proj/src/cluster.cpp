#include "alsim/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "alsim/error.hpp"

namespace alsim {

namespace {

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        sum += diff * diff;
    }
    return sum;
}

void check_dims(const std::vector<std::vector<double>>& points) {
    if (points.empty()) throw ConfigError("cluster: no points");
    for (const auto& p : points)
        if (p.size() != points[0].size()) throw ConfigError("cluster: point dimension mismatch");
}

std::vector<std::size_t> assign_nearest(const std::vector<std::vector<double>>& points,
                                        const std::vector<std::vector<double>>& centroids) {
    std::vector<std::size_t> assignment(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t best = 0;
        double best_d = dist2(points[i], centroids[0]);
        for (std::size_t c = 1; c < centroids.size(); ++c) {
            double d = dist2(points[i], centroids[c]);
            if (d < best_d) {  // strict: ties stay with the lowest index
                best_d = d;
                best = c;
            }
        }
        assignment[i] = best;
    }
    return assignment;
}

double wcss(const std::vector<std::vector<double>>& points,
            const std::vector<std::vector<double>>& centroids,
            const std::vector<std::size_t>& assignment) {
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) sum += dist2(points[i], centroids[assignment[i]]);
    return sum;
}

}  // namespace

std::vector<std::vector<double>> kmeanspp_seed(const std::vector<std::vector<double>>& points,
                                               std::size_t k, Rng& rng) {
    check_dims(points);
    if (k < 1) throw ConfigError("kmeanspp: k must be at least 1");
    if (k > points.size()) throw ConfigError("kmeanspp: k exceeds the number of points");

    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    std::vector<bool> chosen(points.size(), false);

    std::size_t first = rng.index(points.size());
    centroids.push_back(points[first]);
    chosen[first] = true;

    std::vector<double> d2(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) d2[i] = dist2(points[i], centroids[0]);

    while (centroids.size() < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick = points.size();
        if (total > 0.0) {
            double u = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < points.size(); ++i) {
                if (d2[i] == 0.0) continue;
                acc += d2[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
            if (pick == points.size()) {  // fp residue: take the last weighted point
                for (std::size_t i = points.size(); i-- > 0;)
                    if (d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
            }
        } else {
            // All remaining points coincide with a centroid; take the lowest
            // unchosen index so the draw stays deterministic.
            for (std::size_t i = 0; i < points.size(); ++i)
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
            if (pick == points.size()) pick = 0;
        }
        chosen[pick] = true;
        centroids.push_back(points[pick]);
        for (std::size_t i = 0; i < points.size(); ++i)
            d2[i] = std::min(d2[i], dist2(points[i], centroids.back()));
    }
    return centroids;
}

Clustering lloyd(const std::vector<std::vector<double>>& points,
                 std::vector<std::vector<double>> centroids, std::size_t max_iter, double tol) {
    check_dims(points);
    if (centroids.empty()) throw ConfigError("lloyd: no centroids");
    for (const auto& c : centroids)
        if (c.size() != points[0].size()) throw ConfigError("lloyd: centroid dimension mismatch");
    if (tol < 0.0) throw ConfigError("lloyd: tol must be nonnegative");

    const std::size_t k = centroids.size();
    const std::size_t dim = points[0].size();

    Clustering result;
    result.requested_k = k;
    result.assignment = assign_nearest(points, centroids);
    double prev_wcss = wcss(points, centroids, result.assignment);

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        std::vector<std::vector<double>> means(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            std::size_t c = result.assignment[i];
            ++sizes[c];
            for (std::size_t t = 0; t < dim; ++t) means[c][t] += points[i][t];
        }
        for (std::size_t c = 0; c < k; ++c)
            if (sizes[c] > 0)
                for (std::size_t t = 0; t < dim; ++t) means[c][t] /= static_cast<double>(sizes[c]);
            else
                means[c] = centroids[c];  // placeholder until reseeded below

        // Reseed empty clusters to the point farthest from its current centroid.
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] > 0) continue;
            std::size_t far = points.size();
            double far_d = -1.0;
            for (std::size_t i = 0; i < points.size(); ++i) {
                if (sizes[result.assignment[i]] <= 1) continue;  // do not empty another cluster
                double d = dist2(points[i], means[result.assignment[i]]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far == points.size()) continue;  // every cluster is a singleton already
            --sizes[result.assignment[far]];
            means[c] = points[far];
            result.assignment[far] = c;
            sizes[c] = 1;
        }

        double max_move2 = 0.0;
        for (std::size_t c = 0; c < k; ++c) max_move2 = std::max(max_move2, dist2(means[c], centroids[c]));
        centroids = std::move(means);
        result.assignment = assign_nearest(points, centroids);

        double cur_wcss = wcss(points, centroids, result.assignment);
        if (cur_wcss > prev_wcss * (1.0 + 1e-12) + 1e-12)
            throw std::logic_error("lloyd: within-cluster sum of squares increased");
        prev_wcss = cur_wcss;

        if (max_move2 <= tol * tol) break;
    }
    result.centroids = std::move(centroids);
    return result;
}

Clustering cluster(const std::vector<std::vector<double>>& points, std::size_t k, Rng& rng,
                   std::size_t max_iter, double tol, std::size_t restarts) {
    check_dims(points);
    if (k < 1) throw ConfigError("cluster: k must be at least 1");
    if (k > points.size()) throw ConfigError("cluster: k exceeds the number of points");
    if (restarts < 1) throw ConfigError("cluster: restarts must be at least 1");

    std::set<std::vector<double>> distinct(points.begin(), points.end());
    std::size_t k_eff = std::min(k, distinct.size());

    Clustering best;
    double best_wcss = std::numeric_limits<double>::infinity();
    for (std::size_t attempt = 0; attempt < restarts; ++attempt) {
        std::vector<std::vector<double>> seeds = kmeanspp_seed(points, k_eff, rng);
        Clustering result = lloyd(points, std::move(seeds), max_iter, tol);
        double score = wcss(points, result.centroids, result.assignment);
        if (score < best_wcss) {
            best_wcss = score;
            best = std::move(result);
        }
    }
    best.requested_k = k;
    return best;
}

}  // namespace alsim
