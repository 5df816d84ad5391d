#include "alsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "alsim/error.hpp"
#include "alsim/rng.hpp"

namespace alsim {

std::size_t MultiLabelVector::count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
}

namespace {

void validate(const SyntheticConfig& config) {
    if (config.num_classes == 0) throw ConfigError("synthetic: num_classes must be positive");
    if (config.feature_dim == 0) throw ConfigError("synthetic: feature_dim must be positive");
    if (config.noise_std < 0.0) throw ConfigError("synthetic: noise_std must be nonnegative");
    if (config.class_priors.size() != config.num_classes)
        throw ConfigError("synthetic: class_priors length must equal num_classes");
    double prior_sum = 0.0;
    for (double p : config.class_priors) {
        if (p < 0.0 || p > 1.0) throw ConfigError("synthetic: class priors must lie in [0, 1]");
        prior_sum += p;
    }
    if (!config.allow_all_zero && prior_sum == 0.0)
        throw ConfigError("synthetic: all priors are zero but all-zero labels are disallowed");
    for (const auto& pair : config.cooccurrence_pairs) {
        if (pair.class_a >= config.num_classes || pair.class_b >= config.num_classes)
            throw ConfigError("synthetic: co-occurrence pair references an unknown class");
        if (pair.strength < 0.0 || pair.strength > 1.0)
            throw ConfigError("synthetic: co-occurrence strength must lie in [0, 1]");
    }
}

}  // namespace

Archive generate_synthetic(const SyntheticConfig& config) {
    validate(config);
    const std::size_t C = config.num_classes;
    const std::size_t d = config.feature_dim;

    Rng root(config.seed);
    Rng proto_rng = root.child(stream_id("prototypes"));
    Rng label_rng = root.child(stream_id("labels"));
    Rng noise_rng = root.child(stream_id("noise"));

    std::vector<std::vector<double>> prototypes(C, std::vector<double>(d));
    for (auto& proto : prototypes)
        for (double& v : proto) v = proto_rng.normal();

    Archive archive;
    archive.feature_dim = d;
    archive.class_names.resize(C);
    for (std::size_t j = 0; j < C; ++j) archive.class_names[j] = "y" + std::to_string(j);

    archive.samples.resize(config.num_samples);
    for (std::size_t i = 0; i < config.num_samples; ++i) {
        Sample& sample = archive.samples[i];
        sample.id = i;

        MultiLabelVector labels;
        labels.bits.resize(C);
        constexpr int kMaxDraws = 10000;
        int draws = 0;
        while (true) {
            for (std::size_t j = 0; j < C; ++j)
                labels.bits[j] = label_rng.bernoulli(config.class_priors[j]) ? 1 : 0;
            for (const auto& pair : config.cooccurrence_pairs)
                if (label_rng.bernoulli(pair.strength))
                    labels.bits[pair.class_b] = labels.bits[pair.class_a];
            if (config.allow_all_zero || labels.count() > 0) break;
            if (++draws >= kMaxDraws)
                throw ConfigError("synthetic: could not draw a nonzero label vector");
        }
        sample.labels = std::move(labels);

        sample.features.assign(d, 0.0);
        for (std::size_t j = 0; j < C; ++j)
            if (sample.labels.present(j))
                for (std::size_t k = 0; k < d; ++k) sample.features[k] += prototypes[j][k];
        if (config.noise_std > 0.0)
            for (double& v : sample.features) v += noise_rng.normal(0.0, config.noise_std);
    }
    return archive;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

}  // namespace

Archive load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": empty file");
    std::vector<std::string> header = split_line(line);
    if (header.empty() || header[0] != "id")
        throw FormatError(path + ": header must start with 'id'");

    std::size_t d = 0;
    std::size_t idx = 1;
    while (idx < header.size() && header[idx] == "f" + std::to_string(d)) {
        ++d;
        ++idx;
    }
    std::size_t C = 0;
    while (idx < header.size() && header[idx] == "y" + std::to_string(C)) {
        ++C;
        ++idx;
    }
    if (idx != header.size() || d == 0 || C == 0)
        throw FormatError(path + ": header must be id,f0..f{d-1},y0..y{C-1}");

    Archive archive;
    archive.feature_dim = d;
    archive.class_names.assign(header.begin() + 1 + d, header.end());

    std::size_t row = 1;
    while (std::getline(in, line)) {
        if (line.empty() && in.peek() == EOF) break;
        ++row;
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != 1 + d + C)
            throw FormatError(path + ": row " + std::to_string(row) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(1 + d + C));
        Sample sample;
        sample.id = archive.samples.size();
        sample.features.resize(d);
        for (std::size_t k = 0; k < d; ++k) {
            try {
                std::size_t pos = 0;
                sample.features[k] = std::stod(cells[1 + k], &pos);
                if (pos != cells[1 + k].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw FormatError(path + ": row " + std::to_string(row) + ", column f" +
                                  std::to_string(k) + ": invalid float '" + cells[1 + k] + "'");
            }
        }
        sample.labels.bits.resize(C);
        for (std::size_t j = 0; j < C; ++j) {
            const std::string& cell = cells[1 + d + j];
            if (cell == "0")
                sample.labels.bits[j] = 0;
            else if (cell == "1")
                sample.labels.bits[j] = 1;
            else
                throw FormatError(path + ": row " + std::to_string(row) + ", column y" +
                                  std::to_string(j) + ": label must be 0 or 1, got '" + cell + "'");
        }
        archive.samples.push_back(std::move(sample));
    }
    return archive;
}

void save_csv(const Archive& archive, const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF newlines on every platform
    if (!out) throw IoError("cannot write dataset file: " + path);
    out << "id";
    for (std::size_t k = 0; k < archive.feature_dim; ++k) out << ",f" << k;
    for (std::size_t j = 0; j < archive.num_classes(); ++j) out << ",y" << j;
    out << "\n";
    char buf[64];
    for (const Sample& sample : archive.samples) {
        out << sample.id;
        for (double v : sample.features) {
            std::snprintf(buf, sizeof buf, "%.9g", v);
            out << ',' << buf;
        }
        for (std::size_t j = 0; j < sample.labels.size(); ++j)
            out << ',' << (sample.labels.present(j) ? '1' : '0');
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

SplitResult split(const Archive& archive, const SplitFractions& fractions, std::uint64_t seed) {
    if (fractions.pool <= 0.0 || fractions.val < 0.0 || fractions.test < 0.0)
        throw ConfigError("split: fractions must be positive (val/test may be zero)");
    double sum = fractions.pool + fractions.val + fractions.test;
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("split: fractions must sum to 1");

    const std::size_t n = archive.size();
    // Cumulative rounding keeps every share nonnegative and the total exact.
    auto cum = [&](double f) {
        return static_cast<std::size_t>(std::llround(f * static_cast<double>(n)));
    };
    std::size_t n_pool = cum(fractions.pool);
    std::size_t n_val = cum(fractions.pool + fractions.val) - n_pool;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    auto take = [&](std::size_t begin, std::size_t end) {
        Archive part;
        part.feature_dim = archive.feature_dim;
        part.class_names = archive.class_names;
        std::vector<std::size_t> idx(order.begin() + begin, order.begin() + end);
        std::sort(idx.begin(), idx.end());
        part.samples.reserve(idx.size());
        for (std::size_t i : idx) part.samples.push_back(archive.samples[i]);
        return part;
    };

    SplitResult result;
    result.pool = take(0, n_pool);
    result.val = take(n_pool, n_pool + n_val);
    result.test = take(n_pool + n_val, n);
    return result;
}

Archive apply_scenario(const Archive& pool, const ScenarioSpec& spec) {
    const std::size_t C = pool.num_classes();
    for (std::size_t c : spec.minority_classes)
        if (c >= C) throw ScenarioError("scenario: unknown class index " + std::to_string(c));
    for (const auto& [a, b] : spec.exclusion_pairs) {
        bool has_a = std::find(spec.minority_classes.begin(), spec.minority_classes.end(), a) !=
                     spec.minority_classes.end();
        bool has_b = std::find(spec.minority_classes.begin(), spec.minority_classes.end(), b) !=
                     spec.minority_classes.end();
        if (has_a && has_b)
            throw ScenarioError("scenario: classes " + std::to_string(a) + " and " +
                                std::to_string(b) + " are excluded from joint removal");
    }

    std::vector<std::size_t> counts = class_frequencies(pool);
    for (std::size_t c : spec.minority_classes)
        if (counts[c] < spec.remove_per_class)
            throw ScenarioError("scenario: class " + std::to_string(c) + " has only " +
                                std::to_string(counts[c]) + " samples, cannot remove " +
                                std::to_string(spec.remove_per_class));

    Rng rng(spec.seed);
    std::unordered_set<std::size_t> removed;  // positions within pool.samples
    for (std::size_t c : spec.minority_classes) {
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < pool.samples.size(); ++i)
            if (!removed.count(i) && pool.samples[i].labels.present(c)) candidates.push_back(i);
        if (candidates.size() < spec.remove_per_class)
            throw ScenarioError("scenario: class " + std::to_string(c) +
                                " depleted by earlier removals");
        std::vector<std::size_t> picks =
            rng.sample_without_replacement(candidates.size(), spec.remove_per_class);
        for (std::size_t p : picks) removed.insert(candidates[p]);
    }

    Archive result;
    result.feature_dim = pool.feature_dim;
    result.class_names = pool.class_names;
    result.samples.reserve(pool.samples.size() - removed.size());
    for (std::size_t i = 0; i < pool.samples.size(); ++i)
        if (!removed.count(i)) result.samples.push_back(pool.samples[i]);
    return result;
}

std::vector<std::size_t> class_frequencies(const Archive& archive) {
    std::vector<std::size_t> counts(archive.num_classes(), 0);
    for (const Sample& sample : archive.samples)
        for (std::size_t j = 0; j < sample.labels.size(); ++j)
            if (sample.labels.present(j)) ++counts[j];
    return counts;
}

}  // namespace alsim
