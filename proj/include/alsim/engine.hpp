#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "alsim/dataset.hpp"
#include "alsim/metrics.hpp"
#include "alsim/model.hpp"
#include "alsim/query.hpp"
#include "alsim/ssl.hpp"

namespace alsim {

enum class Strategy { random, mge, mge_clustering };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

struct ALConfig {
    std::size_t initial_labeled = 40;       // M
    std::size_t budget_per_iteration = 20;  // b
    std::size_t total_budget = 200;         // B
    Strategy strategy = Strategy::mge_clustering;
    double m_factor = 10.0;  // candidate pool size m = m_factor * b, clamped to |U|
    TrainConfig train;
    std::vector<std::size_t> hidden_sizes = {32};
    Activation activation = Activation::relu;
    bool use_pretrained_encoder = false;
    std::uint64_t seed = 0;
};

// Tracks which pool samples have been oracle-labeled. The simulated oracle
// reveals ground truth; every sample may be labeled at most once.
class LabeledPool {
public:
    explicit LabeledPool(const Archive& pool);

    // Reveals the true labels of the given ids and retires them from the
    // unlabeled set. Unknown ids and repeated labeling raise ProtocolError.
    std::vector<const Sample*> oracle_label(const std::vector<std::size_t>& ids);

    const std::vector<const Sample*>& labeled() const { return labeled_; }
    const std::vector<const Sample*>& unlabeled() const { return unlabeled_; }
    std::size_t pool_size() const { return pool_->size(); }

private:
    const Archive* pool_;
    std::vector<const Sample*> labeled_;
    std::vector<const Sample*> unlabeled_;  // kept sorted by id
};

struct IterationRecord {
    std::size_t iteration = 0;      // t, starting at 1
    std::size_t labeled_count = 0;  // |T^t|
    std::vector<std::size_t> selected_ids;  // chosen after this evaluation; empty at the end
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
    std::vector<double> per_class_f1;
};

struct RunHistory {
    std::vector<IterationRecord> records;
    std::vector<std::size_t> initial_ids;
    ModelParams final_params;
    Strategy strategy = Strategy::random;
    std::uint64_t seed = 0;

    std::vector<CurvePoint> curve() const;
};

// Test seam: replaces the built-in strategies when provided.
using QueryFn = std::function<QuerySelection(const ModelParams&, std::span<const Sample* const>,
                                             std::size_t, Rng&)>;

// Runs the full AL protocol: draw the initial labeled set, fine-tune, evaluate
// on the test split, query, oracle-label, repeat until the budget is spent,
// then fine-tune and evaluate once more. Fine-tuning always warm-starts from
// the previous iteration's parameters. The validation split is carried along
// for the caller's hyperparameter work; the engine itself never touches it.
RunHistory run_al(const Archive& pool, const Archive& val, const Archive& test,
                  const ALConfig& config, const MlpBlock* pretrained_encoder = nullptr,
                  const QueryFn& custom_query = nullptr);

struct RunOutcome {
    std::uint64_t seed = 0;
    std::optional<RunHistory> history;
    std::string error;  // nonempty when the run failed

    bool ok() const { return history.has_value(); }
};

// Independent runs, one per seed. Failures are collected per run rather than
// aborting the batch. jobs > 1 executes runs on worker threads; results are
// identical to the sequential order either way.
std::vector<RunOutcome> run_many(const Archive& pool, const Archive& val, const Archive& test,
                                 const ALConfig& base_config,
                                 const std::vector<std::uint64_t>& seeds,
                                 const MlpBlock* pretrained_encoder = nullptr,
                                 std::size_t jobs = 1);

}  // namespace alsim
