#pragma once

#include <cstddef>
#include <vector>

#include "alsim/rng.hpp"

namespace alsim {

struct Clustering {
    std::vector<std::vector<double>> centroids;
    std::vector<std::size_t> assignment;  // nearest centroid per point, ties to lowest index
    std::size_t requested_k = 0;          // centroids.size() < requested_k when the
                                          // points had fewer distinct values than k
    std::size_t num_clusters() const { return centroids.size(); }
};

// D^2-weighted seeding: first centroid uniform over the points, each further
// centroid drawn with probability proportional to the squared distance to its
// nearest already-chosen centroid.
std::vector<std::vector<double>> kmeanspp_seed(const std::vector<std::vector<double>>& points,
                                               std::size_t k, Rng& rng);

// Alternates nearest-centroid assignment and mean updates until the largest
// centroid displacement drops below tol or max_iter passes. Empty clusters are
// reseeded to the point currently farthest from its centroid, so exactly k
// clusters survive. Within-cluster sum of squares never increases.
Clustering lloyd(const std::vector<std::vector<double>>& points,
                 std::vector<std::vector<double>> centroids, std::size_t max_iter, double tol);

// kmeanspp_seed followed by lloyd, repeated for `restarts` independent seedings
// from the same rng stream; the result with the lowest final WCSS wins (first
// on ties). Single-start KMeans++ lands in bad local minima often enough on
// small instances that restarts are the standard remedy. When the points have
// fewer than k distinct values, k is reduced to that count and the reduction
// recorded in requested_k.
Clustering cluster(const std::vector<std::vector<double>>& points, std::size_t k, Rng& rng,
                   std::size_t max_iter = 100, double tol = 1e-6, std::size_t restarts = 10);

}  // namespace alsim
