#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "alsim/cluster.hpp"
#include "alsim/error.hpp"

using namespace alsim;

namespace {

using Points = std::vector<std::vector<double>>;

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
    return sum;
}

double wcss_of(const Points& points, const Clustering& clustering) {
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        sum += dist2(points[i], clustering.centroids[clustering.assignment[i]]);
    return sum;
}

// Exhaustive oracle: tries every assignment of the points into at most k
// groups, scoring each with centroids at the group means.
double brute_force_optimum(const Points& points, std::size_t k) {
    const std::size_t n = points.size();
    const std::size_t dim = points[0].size();
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n; ++i) combos *= k;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> assign(n);
    for (std::size_t code = 0; code < combos; ++code) {
        std::size_t rest = code;
        for (std::size_t i = 0; i < n; ++i) {
            assign[i] = rest % k;
            rest /= k;
        }
        std::vector<std::vector<double>> means(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++sizes[assign[i]];
            for (std::size_t t = 0; t < dim; ++t) means[assign[i]][t] += points[i][t];
        }
        for (std::size_t c = 0; c < k; ++c)
            if (sizes[c])
                for (std::size_t t = 0; t < dim; ++t) means[c][t] /= static_cast<double>(sizes[c]);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += dist2(points[i], means[assign[i]]);
        best = std::min(best, total);
    }
    return best;
}

void check_assignment_is_nearest(const Points& points, const Clustering& clustering) {
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t best = 0;
        double best_d = dist2(points[i], clustering.centroids[0]);
        for (std::size_t c = 1; c < clustering.centroids.size(); ++c) {
            double d = dist2(points[i], clustering.centroids[c]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        CHECK(dist2(points[i], clustering.centroids[clustering.assignment[i]]) ==
              doctest::Approx(best_d).epsilon(1e-12));
    }
}

}  // namespace

TEST_CASE("kmeanspp_seed: k=1 picks one of the points") {
    Points points = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 2.0}};
    Rng rng(3);
    auto centroids = kmeanspp_seed(points, 1, rng);
    REQUIRE(centroids.size() == 1);
    CHECK(std::count(points.begin(), points.end(), centroids[0]) == 1);
}

TEST_CASE("kmeanspp_seed: k = n over distinct points is a permutation") {
    Points points = {{0.0}, {1.0}, {5.0}, {-2.0}};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        auto centroids = kmeanspp_seed(points, points.size(), rng);
        Points sorted_c = centroids, sorted_p = points;
        std::sort(sorted_c.begin(), sorted_c.end());
        std::sort(sorted_p.begin(), sorted_p.end());
        CHECK(sorted_c == sorted_p);
    }
}

TEST_CASE("kmeanspp_seed: far-separated groups get one centroid each") {
    // Two tight pairs 100 apart: the D^2 mass of the far group dwarfs the near
    // one, so every seeded stream lands the second centroid across the gap.
    Points points = {{0.0, 0.0}, {0.1, 0.0}, {100.0, 0.0}, {100.1, 0.0}};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        auto centroids = kmeanspp_seed(points, 2, rng);
        bool left = false, right = false;
        for (const auto& c : centroids) (c[0] < 50.0 ? left : right) = true;
        CHECK(left);
        CHECK(right);
    }
}

TEST_CASE("kmeanspp_seed: k beyond the point count is rejected") {
    Points points = {{0.0}, {1.0}};
    Rng rng(1);
    CHECK_THROWS_AS(kmeanspp_seed(points, 3, rng), ConfigError);
}

TEST_CASE("lloyd: zero iterations keeps the initial centroids") {
    Points points = {{0.0}, {1.0}, {10.0}};
    Points init = {{0.5}, {9.0}};
    Clustering result = lloyd(points, init, 0, 1e-6);
    CHECK(result.centroids == init);
    CHECK(result.assignment == std::vector<std::size_t>{0, 0, 1});
}

TEST_CASE("lloyd: points equal to centroids are a fixed point") {
    Points points = {{0.0, 0.0}, {5.0, 0.0}, {0.0, 5.0}};
    Clustering result = lloyd(points, points, 10, 1e-9);
    CHECK(result.centroids == points);
    CHECK(result.assignment == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("lloyd: two tight blobs match the brute-force optimum") {
    Points points = {{0.0, 0.0}, {0.2, 0.1}, {0.1, 0.3},
                     {8.0, 8.0}, {8.2, 8.1}, {8.1, 8.3}};
    Rng rng(5);
    Clustering result = cluster(points, 2, rng);
    // Blob separation.
    CHECK(result.assignment[0] == result.assignment[1]);
    CHECK(result.assignment[1] == result.assignment[2]);
    CHECK(result.assignment[3] == result.assignment[4]);
    CHECK(result.assignment[4] == result.assignment[5]);
    CHECK(result.assignment[0] != result.assignment[3]);

    CHECK(wcss_of(points, result) == doctest::Approx(brute_force_optimum(points, 2)).epsilon(1e-9));
}

TEST_CASE("cluster: identical points collapse to a single surviving centroid") {
    Points points = {{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}};
    Rng rng(9);
    Clustering result = cluster(points, 3, rng);
    CHECK(result.requested_k == 3);
    CHECK(result.num_clusters() == 1);
    for (std::size_t a : result.assignment) CHECK(a == 0);
}

TEST_CASE("cluster: k = n distinct points become singleton clusters") {
    Points points = {{0.0}, {3.0}, {7.0}, {-4.0}};
    Rng rng(2);
    Clustering result = cluster(points, 4, rng);
    CHECK(result.num_clusters() == 4);
    std::set<std::size_t> used(result.assignment.begin(), result.assignment.end());
    CHECK(used.size() == 4);
    CHECK(wcss_of(points, result) == doctest::Approx(0.0));
}

TEST_CASE("cluster: deterministic under a fixed rng seed") {
    Points points;
    Rng gen(17);
    for (int i = 0; i < 40; ++i) points.push_back({gen.normal(), gen.normal(), gen.normal()});
    Rng rng_a(123), rng_b(123);
    Clustering a = cluster(points, 5, rng_a);
    Clustering b = cluster(points, 5, rng_b);
    CHECK(a.assignment == b.assignment);
    CHECK(a.centroids == b.centroids);
}

TEST_CASE("cluster: final assignment is always nearest-centroid") {
    Rng gen(29);
    for (int trial = 0; trial < 20; ++trial) {
        Points points;
        std::size_t n = 5 + gen.index(30);
        for (std::size_t i = 0; i < n; ++i) points.push_back({gen.normal(), gen.normal()});
        Rng rng(1000 + trial);
        Clustering result = cluster(points, 1 + rng.index(4), rng);
        check_assignment_is_nearest(points, result);
    }
}

TEST_CASE("cluster: seeding quality on small instances vs brute force") {
    // <=8 points, k<=3: final WCSS within 5% of the enumerated optimum in at
    // least 95% of 50 seeded trials.
    Rng gen(77);
    int good = 0;
    const int trials = 50;
    for (int trial = 0; trial < trials; ++trial) {
        std::size_t n = 4 + gen.index(5);  // 4..8
        std::size_t k = 2 + gen.index(2);  // 2..3
        Points points;
        for (std::size_t i = 0; i < n; ++i) points.push_back({gen.normal() * 2, gen.normal() * 2});
        Rng rng(5000 + trial);
        Clustering result = cluster(points, k, rng, 100, 1e-9);
        double best = brute_force_optimum(points, result.num_clusters());
        if (wcss_of(points, result) <= 1.05 * best + 1e-12) ++good;
    }
    CHECK(good >= 48);
}
