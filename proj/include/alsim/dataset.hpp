#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace alsim {

// Binary presence/absence vector over the archive's classes.
struct MultiLabelVector {
    std::vector<std::uint8_t> bits;

    std::size_t size() const { return bits.size(); }
    bool present(std::size_t j) const { return bits[j] != 0; }
    std::size_t count() const;

    bool operator==(const MultiLabelVector&) const = default;
};

struct Sample {
    std::size_t id = 0;
    std::vector<double> features;
    MultiLabelVector labels;  // ground truth; the learner sees it only through the oracle
};

struct Archive {
    std::vector<Sample> samples;
    std::vector<std::string> class_names;
    std::size_t feature_dim = 0;

    std::size_t size() const { return samples.size(); }
    std::size_t num_classes() const { return class_names.size(); }
};

struct CooccurrencePair {
    std::size_t class_a = 0;
    std::size_t class_b = 0;
    double strength = 0.0;  // probability of copying class_a's bit onto class_b
};

struct SyntheticConfig {
    std::size_t num_classes = 8;
    std::size_t feature_dim = 16;
    std::size_t num_samples = 2000;
    std::vector<double> class_priors;  // per-class Bernoulli priors in [0, 1]
    std::vector<CooccurrencePair> cooccurrence_pairs;
    double noise_std = 0.1;
    std::uint64_t seed = 0;
    bool allow_all_zero = false;  // when false, all-zero label draws are rejected
};

struct ScenarioSpec {
    std::vector<std::size_t> minority_classes;
    std::size_t remove_per_class = 0;
    std::vector<std::pair<std::size_t, std::size_t>> exclusion_pairs;
    std::uint64_t seed = 0;
};

struct SplitFractions {
    double pool = 0.5;
    double val = 0.25;
    double test = 0.25;
};

struct SplitResult {
    Archive pool;
    Archive val;
    Archive test;
};

// Draws per-class labels from the priors (rejecting all-zero vectors unless
// allowed), applies co-occurrence coupling, and builds features as the sum of
// the present classes' prototype vectors plus isotropic Gaussian noise.
// Deterministic given config.seed.
Archive generate_synthetic(const SyntheticConfig& config);

// CSV format: header `id,f0,...,f{d-1},y0,...,y{C-1}`, decimal float features,
// strictly 0/1 labels, LF newlines. The writer emits 9 significant digits.
Archive load_csv(const std::string& path);
void save_csv(const Archive& archive, const std::string& path);

// Disjoint partition covering all samples; sizes are rounded shares of N.
SplitResult split(const Archive& archive, const SplitFractions& fractions, std::uint64_t seed);

// Deepens class imbalance: for each listed class, removes exactly
// remove_per_class samples drawn uniformly (without replacement) among the
// remaining samples containing that class. A sample removed for one class may
// incidentally contain another listed class; each class still receives its own
// full quota of dedicated removals. The input archive is left unmodified.
Archive apply_scenario(const Archive& pool, const ScenarioSpec& spec);

// counts[j] = number of samples with class j present.
std::vector<std::size_t> class_frequencies(const Archive& archive);

}  // namespace alsim
