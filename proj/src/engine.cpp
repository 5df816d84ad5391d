#include "alsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <unordered_set>

#include "alsim/error.hpp"
#include "alsim/metrics.hpp"

namespace alsim {

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::random: return "random";
        case Strategy::mge: return "mge";
        case Strategy::mge_clustering: return "mge_clustering";
    }
    return "random";
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "random") return Strategy::random;
    if (name == "mge") return Strategy::mge;
    if (name == "mge_clustering") return Strategy::mge_clustering;
    throw ConfigError("unknown strategy: " + name);
}

LabeledPool::LabeledPool(const Archive& pool) : pool_(&pool) {
    unlabeled_.reserve(pool.size());
    for (const Sample& sample : pool.samples) unlabeled_.push_back(&sample);
    std::sort(unlabeled_.begin(), unlabeled_.end(),
              [](const Sample* a, const Sample* b) { return a->id < b->id; });
}

std::vector<const Sample*> LabeledPool::oracle_label(const std::vector<std::size_t>& ids) {
    std::vector<const Sample*> newly;
    newly.reserve(ids.size());
    for (std::size_t id : ids) {
        auto it = std::lower_bound(unlabeled_.begin(), unlabeled_.end(), id,
                                   [](const Sample* s, std::size_t v) { return s->id < v; });
        if (it == unlabeled_.end() || (*it)->id != id) {
            bool known = false;
            for (const Sample* s : labeled_)
                if (s->id == id) known = true;
            throw ProtocolError(known ? "sample " + std::to_string(id) + " was already labeled"
                                      : "unknown sample id " + std::to_string(id));
        }
        newly.push_back(*it);
        labeled_.push_back(*it);
        unlabeled_.erase(it);
    }
    return newly;
}

std::vector<CurvePoint> RunHistory::curve() const {
    std::vector<CurvePoint> points;
    points.reserve(records.size());
    for (const IterationRecord& r : records)
        points.push_back({r.labeled_count, r.micro_f1, r.macro_f1});
    return points;
}

namespace {

IterationRecord evaluate(const ModelParams& params, const Archive& test, std::size_t iteration,
                         std::size_t labeled_count) {
    std::vector<MultiLabelVector> predictions, truths;
    predictions.reserve(test.size());
    truths.reserve(test.size());
    for (const Sample& sample : test.samples) {
        ForwardResult fr = forward(params, sample.features);
        predictions.push_back(pseudo_label(fr.probs));
        truths.push_back(sample.labels);
    }
    ConfusionCounts counts = confusion(predictions, truths);
    IterationRecord record;
    record.iteration = iteration;
    record.labeled_count = labeled_count;
    record.micro_f1 = micro_f1(counts);
    record.macro_f1 = macro_f1(counts);
    record.per_class_f1 = per_class_f1(counts);
    return record;
}

// Augmentation noise defaults to 0.05 x the pooled feature standard deviation
// when the config carries the auto sentinel (negative value).
double resolve_augment_std(double configured, const Archive& pool) {
    if (configured >= 0.0) return configured;
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const Sample& sample : pool.samples)
        for (double v : sample.features) {
            sum += v;
            sq += v * v;
            ++n;
        }
    if (n == 0) return 0.0;
    double mean = sum / static_cast<double>(n);
    double var = std::max(0.0, sq / static_cast<double>(n) - mean * mean);
    return 0.05 * std::sqrt(var);
}

std::vector<Sample> copy_samples(const std::vector<const Sample*>& ptrs) {
    std::vector<Sample> out;
    out.reserve(ptrs.size());
    for (const Sample* p : ptrs) out.push_back(*p);
    return out;
}

}  // namespace

RunHistory run_al(const Archive& pool, const Archive& val, const Archive& test,
                  const ALConfig& config, const MlpBlock* pretrained_encoder,
                  const QueryFn& custom_query) {
    (void)val;  // reserved for caller-side hyperparameter selection
    if (config.initial_labeled < 1) throw ConfigError("run_al: initial_labeled must be positive");
    if (config.budget_per_iteration < 1 || config.total_budget < config.budget_per_iteration)
        throw ConfigError("run_al: budgets must satisfy B >= b >= 1");
    if (pool.size() < config.initial_labeled + config.total_budget)
        throw ConfigError("run_al: pool smaller than initial_labeled + total_budget");
    if (config.use_pretrained_encoder && pretrained_encoder == nullptr)
        throw ConfigError("run_al: pretrained encoder requested but not provided");

    Rng root(config.seed);
    LabeledPool state(pool);

    // The initial draw and model init depend only on the seed, so strategies
    // compared under the same seed share them (paired comparisons).
    Rng init_rng = root.child(stream_id("initial-set"));
    std::vector<std::size_t> positions =
        init_rng.sample_without_replacement(state.unlabeled().size(), config.initial_labeled);
    std::vector<std::size_t> initial_ids;
    initial_ids.reserve(positions.size());
    for (std::size_t p : positions) initial_ids.push_back(state.unlabeled()[p]->id);
    std::sort(initial_ids.begin(), initial_ids.end());
    state.oracle_label(initial_ids);

    ModelParams params;
    if (config.use_pretrained_encoder) {
        if (pretrained_encoder->input_dim() != pool.feature_dim)
            throw ConfigError("run_al: pretrained encoder input dim does not match the pool");
        params = transfer(*pretrained_encoder, pool.num_classes(),
                          root.child(stream_id("head")).seed());
    } else {
        params = init_model(pool.feature_dim, config.hidden_sizes, pool.num_classes(),
                            root.child(stream_id("model")).seed(), config.activation);
    }

    TrainConfig train_config = config.train;
    train_config.augment_noise_std = resolve_augment_std(config.train.augment_noise_std, pool);

    RunHistory history;
    history.initial_ids = initial_ids;
    history.strategy = config.strategy;
    history.seed = config.seed;

    std::size_t spent = 0;
    std::size_t iteration = 1;
    while (true) {
        train_config.seed = root.child(stream_id("train"), iteration).seed();
        try {
            params = train(params, copy_samples(state.labeled()), train_config);
        } catch (const TrainError& e) {
            throw TrainError("AL iteration " + std::to_string(iteration) + ": " + e.what());
        }

        IterationRecord record = evaluate(params, test, iteration, state.labeled().size());
        bool done = spent >= config.total_budget || state.unlabeled().empty();
        if (!done) {
            std::size_t budget = std::min(config.budget_per_iteration, config.total_budget - spent);
            budget = std::min(budget, state.unlabeled().size());
            Rng query_rng = root.child(stream_id("query"), iteration);
            QuerySelection selection;
            if (custom_query) {
                selection = custom_query(params, state.unlabeled(), budget, query_rng);
            } else {
                switch (config.strategy) {
                    case Strategy::random:
                        selection = random_query(state.unlabeled(), budget, query_rng);
                        break;
                    case Strategy::mge:
                        selection = mge_query(params, state.unlabeled(), budget);
                        break;
                    case Strategy::mge_clustering: {
                        auto m = static_cast<std::size_t>(
                            std::llround(config.m_factor * static_cast<double>(budget)));
                        selection =
                            mge_clustering_query(params, state.unlabeled(), budget, m, query_rng);
                        break;
                    }
                }
            }
            if (selection.selected_ids.size() != budget)
                throw ProtocolError("query returned " +
                                    std::to_string(selection.selected_ids.size()) +
                                    " ids, expected " + std::to_string(budget));
            record.selected_ids = selection.selected_ids;
            state.oracle_label(selection.selected_ids);
            spent += selection.selected_ids.size();
        }
        history.records.push_back(std::move(record));
        if (done) break;
        ++iteration;
    }

    history.final_params = std::move(params);
    return history;
}

std::vector<RunOutcome> run_many(const Archive& pool, const Archive& val, const Archive& test,
                                 const ALConfig& base_config,
                                 const std::vector<std::uint64_t>& seeds,
                                 const MlpBlock* pretrained_encoder, std::size_t jobs) {
    std::vector<RunOutcome> outcomes(seeds.size());
    auto run_one = [&](std::size_t i) {
        outcomes[i].seed = seeds[i];
        try {
            ALConfig config = base_config;
            config.seed = seeds[i];
            outcomes[i].history = run_al(pool, val, test, config, pretrained_encoder);
        } catch (const std::exception& e) {
            outcomes[i].error = e.what();
        }
    };
    if (jobs <= 1 || seeds.size() <= 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i) run_one(i);
        return outcomes;
    }
    std::vector<std::thread> workers;
    std::size_t n_workers = std::min(jobs, seeds.size());
    for (std::size_t w = 0; w < n_workers; ++w)
        workers.emplace_back([&, w] {
            for (std::size_t i = w; i < seeds.size(); i += n_workers) run_one(i);
        });
    for (auto& t : workers) t.join();
    return outcomes;
}

}  // namespace alsim
