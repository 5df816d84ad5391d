#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "alsim/error.hpp"
#include "alsim/metrics.hpp"
#include "alsim/rng.hpp"

using namespace alsim;

namespace {

MultiLabelVector mv(std::initializer_list<std::uint8_t> bits) {
    return MultiLabelVector{std::vector<std::uint8_t>(bits)};
}

}  // namespace

TEST_CASE("confusion: perfect predictions have no FP or FN") {
    std::vector<MultiLabelVector> truth = {mv({1, 0}), mv({0, 1}), mv({1, 1})};
    ConfusionCounts counts = confusion(truth, truth);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(counts.fp[j] == 0);
        CHECK(counts.fn[j] == 0);
    }
    CHECK(counts.tp[0] == 2);
    CHECK(counts.tp[1] == 2);
}

TEST_CASE("confusion: crossed single-sample prediction") {
    ConfusionCounts counts = confusion({mv({1, 0})}, {mv({0, 1})});
    CHECK(counts.fp[0] == 1);
    CHECK(counts.fn[1] == 1);
    CHECK(counts.tp[0] == 0);
    CHECK(counts.tp[1] == 0);
}

TEST_CASE("confusion: two-sample hand count") {
    ConfusionCounts counts =
        confusion({mv({1, 0}), mv({1, 0})}, {mv({1, 0}), mv({1, 1})});
    CHECK(counts.tp[0] == 2);
    CHECK(counts.fn[1] == 1);
    CHECK(counts.tn[1] == 1);
    CHECK(counts.tp[0] + counts.fp[0] + counts.fn[0] + counts.tn[0] == 2);
    CHECK(counts.tp[1] + counts.fp[1] + counts.fn[1] + counts.tn[1] == 2);
}

TEST_CASE("confusion: length mismatch rejected") {
    CHECK_THROWS_AS(confusion({mv({1})}, {}), ConfigError);
    CHECK_THROWS_AS(confusion({mv({1})}, {mv({1, 0})}), ConfigError);
}

TEST_CASE("micro_f1: fixtures") {
    ConfusionCounts perfect;
    perfect.tp = {3, 2};
    perfect.fp = {0, 0};
    perfect.fn = {0, 0};
    perfect.tn = {0, 1};
    CHECK(micro_f1(perfect) == doctest::Approx(1.0));

    // Pooled TP=1, FP=1, FN=1: P = R = 0.5, F1 = 0.5.
    ConfusionCounts mixed;
    mixed.tp = {1, 0};
    mixed.fp = {0, 1};
    mixed.fn = {1, 0};
    mixed.tn = {0, 1};
    CHECK(micro_f1(mixed) == doctest::Approx(0.5).epsilon(1e-12));

    // Nothing predicted, nothing true: 0 by the 0/0 convention.
    ConfusionCounts empty;
    empty.tp = {0, 0};
    empty.fp = {0, 0};
    empty.fn = {0, 0};
    empty.tn = {5, 5};
    CHECK(micro_f1(empty) == 0.0);
}

TEST_CASE("macro_f1: hand-derived two-class fixture gives one third") {
    // class 0: TP=1, FP=1, FN=0 -> P=0.5, R=1, F1=2/3; class 1: 0/0 -> 0.
    ConfusionCounts counts;
    counts.tp = {1, 0};
    counts.fp = {1, 0};
    counts.fn = {0, 1};
    counts.tn = {0, 1};
    CHECK(macro_f1(counts) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    std::vector<double> per_class = per_class_f1(counts);
    CHECK(per_class[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(per_class[1] == 0.0);
}

TEST_CASE("macro_f1: equals the shared per-class value and stays inside the per-class range") {
    ConfusionCounts uniform;
    uniform.tp = {2, 2, 2};
    uniform.fp = {1, 1, 1};
    uniform.fn = {1, 1, 1};
    uniform.tn = {0, 0, 0};
    std::vector<double> per_class = per_class_f1(uniform);
    CHECK(macro_f1(uniform) == doctest::Approx(per_class[0]).epsilon(1e-12));

    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t C = 1 + rng.index(6);
        ConfusionCounts counts;
        counts.tp.resize(C);
        counts.fp.resize(C);
        counts.fn.resize(C);
        counts.tn.resize(C);
        for (std::size_t j = 0; j < C; ++j) {
            counts.tp[j] = rng.index(10);
            counts.fp[j] = rng.index(10);
            counts.fn[j] = rng.index(10);
            counts.tn[j] = rng.index(10);
        }
        std::vector<double> f1 = per_class_f1(counts);
        double macro = macro_f1(counts);
        CHECK(macro >= *std::min_element(f1.begin(), f1.end()) - 1e-12);
        CHECK(macro <= *std::max_element(f1.begin(), f1.end()) + 1e-12);
        CHECK(micro_f1(counts) >= 0.0);
        CHECK(micro_f1(counts) <= 1.0);
    }
}

TEST_CASE("micro and macro F1 are invariant under class permutation") {
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t C = 2 + rng.index(5);
        ConfusionCounts counts;
        counts.tp.resize(C);
        counts.fp.resize(C);
        counts.fn.resize(C);
        counts.tn.resize(C);
        for (std::size_t j = 0; j < C; ++j) {
            counts.tp[j] = rng.index(8);
            counts.fp[j] = rng.index(8);
            counts.fn[j] = rng.index(8);
            counts.tn[j] = rng.index(8);
        }
        std::vector<std::size_t> perm(C);
        for (std::size_t j = 0; j < C; ++j) perm[j] = j;
        rng.shuffle(perm);
        ConfusionCounts permuted = counts;
        for (std::size_t j = 0; j < C; ++j) {
            permuted.tp[j] = counts.tp[perm[j]];
            permuted.fp[j] = counts.fp[perm[j]];
            permuted.fn[j] = counts.fn[perm[j]];
            permuted.tn[j] = counts.tn[perm[j]];
        }
        CHECK(micro_f1(permuted) == doctest::Approx(micro_f1(counts)).epsilon(1e-12));
        CHECK(macro_f1(permuted) == doctest::Approx(macro_f1(counts)).epsilon(1e-12));
    }
}

TEST_CASE("identical per-class counts make micro equal macro") {
    ConfusionCounts counts;
    counts.tp = {3, 3, 3};
    counts.fp = {1, 1, 1};
    counts.fn = {2, 2, 2};
    counts.tn = {4, 4, 4};
    CHECK(micro_f1(counts) == doctest::Approx(macro_f1(counts)).epsilon(1e-12));
}

TEST_CASE("aggregate: single run has zero std and its own means") {
    std::vector<std::vector<CurvePoint>> runs = {
        {{40, 0.5, 0.4}, {60, 0.6, 0.5}},
    };
    CurveSummary summary = aggregate(runs);
    CHECK(summary.labeled_counts == std::vector<std::size_t>{40, 60});
    CHECK(summary.micro_mean == std::vector<double>{0.5, 0.6});
    CHECK(summary.macro_mean == std::vector<double>{0.4, 0.5});
    CHECK(summary.micro_std == std::vector<double>{0.0, 0.0});
    CHECK(summary.macro_mean_over_iterations == doctest::Approx(0.45).epsilon(1e-12));
}

TEST_CASE("aggregate: two-run hand fixture") {
    std::vector<std::vector<CurvePoint>> runs = {
        {{40, 0.0, 0.2}, {60, 0.0, 0.4}},
        {{40, 0.0, 0.4}, {60, 0.0, 0.6}},
    };
    CurveSummary summary = aggregate(runs);
    CHECK(summary.macro_mean[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(summary.macro_mean[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(summary.macro_mean_over_iterations == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(summary.macro_std[0] == doctest::Approx(0.1).epsilon(1e-12));

    // Permuting run order changes nothing.
    std::swap(runs[0], runs[1]);
    CurveSummary again = aggregate(runs);
    CHECK(again.macro_mean == summary.macro_mean);
    CHECK(again.macro_std == summary.macro_std);
    CHECK(again.macro_mean_over_iterations == summary.macro_mean_over_iterations);
}

TEST_CASE("aggregate: mismatched grids rejected") {
    std::vector<std::vector<CurvePoint>> runs = {
        {{40, 0.1, 0.1}},
        {{50, 0.1, 0.1}},
    };
    CHECK_THROWS_AS(aggregate(runs), ConfigError);
    runs[1] = {{40, 0.1, 0.1}, {60, 0.1, 0.1}};
    CHECK_THROWS_AS(aggregate(runs), ConfigError);
}
