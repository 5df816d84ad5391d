#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "alsim/engine.hpp"
#include "alsim/error.hpp"

using namespace alsim;

namespace {

SplitResult toy_splits(std::size_t n = 160, std::uint64_t seed = 12) {
    SyntheticConfig cfg;
    cfg.num_classes = 3;
    cfg.feature_dim = 5;
    cfg.num_samples = n;
    cfg.class_priors = {0.6, 0.4, 0.15};
    cfg.noise_std = 0.4;
    cfg.seed = seed;
    Archive archive = generate_synthetic(cfg);
    return split(archive, {0.6, 0.2, 0.2}, seed + 1);
}

ALConfig fast_config() {
    ALConfig cfg;
    cfg.initial_labeled = 10;
    cfg.budget_per_iteration = 5;
    cfg.total_budget = 20;
    cfg.strategy = Strategy::mge_clustering;
    cfg.hidden_sizes = {8};
    cfg.train.epochs = 8;
    cfg.train.batch_size = 5;
    cfg.train.learning_rate = 0.1;
    cfg.train.lr_decay_factor = 1.0;
    cfg.train.lr_decay_epoch = 8;
    cfg.train.augment_noise_std = 0.0;
    cfg.seed = 3;
    return cfg;
}

}  // namespace

TEST_CASE("oracle_label: reveals truth once, rejects repeats and unknowns") {
    SplitResult parts = toy_splits(60);
    LabeledPool pool(parts.pool);
    std::size_t first_id = parts.pool.samples[0].id;
    std::size_t second_id = parts.pool.samples[1].id;

    auto labeled = pool.oracle_label({first_id, second_id});
    REQUIRE(labeled.size() == 2);
    CHECK(labeled[0]->labels == parts.pool.samples[0].labels);  // ground truth verbatim
    CHECK(pool.labeled().size() == 2);
    CHECK(pool.unlabeled().size() == parts.pool.size() - 2);

    CHECK_THROWS_AS(pool.oracle_label({first_id}), ProtocolError);
    CHECK_THROWS_AS(pool.oracle_label({999999}), ProtocolError);

    std::size_t before = pool.unlabeled().size();
    CHECK(pool.oracle_label({}).empty());
    CHECK(pool.unlabeled().size() == before);
}

TEST_CASE("run_al: exhausting the pool in one iteration yields two evaluations") {
    SplitResult parts = toy_splits(50);
    ALConfig cfg = fast_config();
    cfg.strategy = Strategy::random;
    cfg.initial_labeled = parts.pool.size() - 5;
    cfg.budget_per_iteration = 5;
    cfg.total_budget = 5;

    RunHistory history = run_al(parts.pool, parts.val, parts.test, cfg);
    REQUIRE(history.records.size() == 2);
    CHECK(history.records[0].labeled_count == parts.pool.size() - 5);
    CHECK(history.records[0].selected_ids.size() == 5);
    CHECK(history.records[1].labeled_count == parts.pool.size());
    CHECK(history.records[1].selected_ids.empty());
}

TEST_CASE("run_al: pool too small is a configuration error") {
    SplitResult parts = toy_splits(50);
    ALConfig cfg = fast_config();
    cfg.initial_labeled = parts.pool.size();
    cfg.total_budget = 20;
    CHECK_THROWS_AS(run_al(parts.pool, parts.val, parts.test, cfg), ConfigError);
}

TEST_CASE("run_al: fixed seed reruns are identical") {
    SplitResult parts = toy_splits();
    ALConfig cfg = fast_config();
    RunHistory a = run_al(parts.pool, parts.val, parts.test, cfg);
    RunHistory b = run_al(parts.pool, parts.val, parts.test, cfg);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].selected_ids == b.records[i].selected_ids);
        CHECK(a.records[i].micro_f1 == b.records[i].micro_f1);  // bitwise
        CHECK(a.records[i].macro_f1 == b.records[i].macro_f1);
    }
    CHECK(a.initial_ids == b.initial_ids);
    CHECK(a.final_params == b.final_params);
}

TEST_CASE("run_al: budget arithmetic, partition and no-repeat invariants") {
    SplitResult parts = toy_splits();
    ALConfig cfg = fast_config();
    cfg.total_budget = 23;  // not divisible by b: final iteration truncated to 3

    std::set<std::size_t> pool_ids;
    for (const Sample& s : parts.pool.samples) pool_ids.insert(s.id);

    std::set<std::size_t> seen;  // every id selected across iterations
    std::vector<std::size_t> unlabeled_sizes;
    QueryFn spy = [&](const ModelParams& params, std::span<const Sample* const> unlabeled,
                      std::size_t b, Rng& rng) {
        unlabeled_sizes.push_back(unlabeled.size());
        for (const Sample* s : unlabeled) {
            CHECK(pool_ids.count(s->id) == 1);
            CHECK(seen.count(s->id) == 0);  // labeled ids never reappear in U
        }
        QuerySelection sel = random_query(unlabeled, b, rng);
        for (std::size_t id : sel.selected_ids) CHECK(seen.insert(id).second);
        return sel;
    };

    RunHistory history = run_al(parts.pool, parts.val, parts.test, cfg, nullptr, spy);

    // Records: 10, 15, 20, 25, 30, 33 labeled.
    REQUIRE(history.records.size() == 6);
    CHECK(history.records.back().labeled_count == cfg.initial_labeled + cfg.total_budget);
    CHECK(history.records[4].selected_ids.size() == 3);

    // T and U partition the pool at every query point.
    for (std::size_t i = 0; i < unlabeled_sizes.size(); ++i)
        CHECK(unlabeled_sizes[i] + history.records[i].labeled_count == parts.pool.size());

    // The initial set and selections never overlap.
    for (std::size_t id : history.initial_ids) CHECK(seen.count(id) == 0);
}

TEST_CASE("run_al: warm start carries parameters across iterations") {
    // With lr = 0 fine-tuning cannot move the parameters, so every iteration's
    // model equals the initial one; the stub query sees that via its params arg.
    SplitResult parts = toy_splits(80);
    ALConfig cfg = fast_config();
    cfg.train.learning_rate = 1e-30;  // effectively zero but valid
    cfg.initial_labeled = 10;
    cfg.total_budget = 10;

    std::vector<ModelParams> seen_params;
    QueryFn spy = [&](const ModelParams& params, std::span<const Sample* const> unlabeled,
                      std::size_t b, Rng& rng) {
        seen_params.push_back(params);
        return random_query(unlabeled, b, rng);
    };
    run_al(parts.pool, parts.val, parts.test, cfg, nullptr, spy);
    REQUIRE(seen_params.size() == 2);
    ModelParams fresh = init_model(parts.pool.feature_dim, cfg.hidden_sizes,
                                   parts.pool.num_classes(),
                                   Rng(cfg.seed).child(stream_id("model")).seed());
    for (std::size_t li = 0; li < fresh.encoder.layers.size(); ++li)
        for (std::size_t i = 0; i < fresh.encoder.layers[li].w.size(); ++i)
            CHECK(seen_params[1].encoder.layers[li].w[i] ==
                  doctest::Approx(fresh.encoder.layers[li].w[i]).epsilon(1e-9));
}

TEST_CASE("run_al: strategies share the initial labeled set under one seed") {
    SplitResult parts = toy_splits();
    ALConfig cfg = fast_config();
    cfg.strategy = Strategy::random;
    RunHistory random_run = run_al(parts.pool, parts.val, parts.test, cfg);
    cfg.strategy = Strategy::mge;
    RunHistory mge_run = run_al(parts.pool, parts.val, parts.test, cfg);
    cfg.strategy = Strategy::mge_clustering;
    RunHistory mgec_run = run_al(parts.pool, parts.val, parts.test, cfg);
    CHECK(random_run.initial_ids == mge_run.initial_ids);
    CHECK(mge_run.initial_ids == mgec_run.initial_ids);
    // First evaluation is on the shared initial set with shared init: identical.
    CHECK(random_run.records[0].macro_f1 == mge_run.records[0].macro_f1);
    CHECK(mge_run.records[0].macro_f1 == mgec_run.records[0].macro_f1);
}

TEST_CASE("run_al: a stub strategy changes selections but not budget arithmetic") {
    SplitResult parts = toy_splits();
    ALConfig cfg = fast_config();

    QueryFn lowest_id_stub = [](const ModelParams&, std::span<const Sample* const> unlabeled,
                                std::size_t b, Rng&) {
        std::vector<std::size_t> ids;
        for (const Sample* s : unlabeled) ids.push_back(s->id);
        std::sort(ids.begin(), ids.end());
        QuerySelection sel;
        sel.strategy_tag = "stub";
        for (std::size_t i = 0; i < std::min(b, ids.size()); ++i) {
            sel.selected_ids.push_back(ids[i]);
            sel.scores.push_back(0.0);
        }
        return sel;
    };

    RunHistory stubbed = run_al(parts.pool, parts.val, parts.test, cfg, nullptr, lowest_id_stub);
    RunHistory normal = run_al(parts.pool, parts.val, parts.test, cfg);

    REQUIRE(stubbed.records.size() == normal.records.size());
    for (std::size_t i = 0; i < stubbed.records.size(); ++i) {
        CHECK(stubbed.records[i].labeled_count == normal.records[i].labeled_count);
        CHECK(stubbed.records[i].selected_ids.size() == normal.records[i].selected_ids.size());
    }
    CHECK(stubbed.records[0].selected_ids != normal.records[0].selected_ids);
}

TEST_CASE("run_al: pretrained encoder is honored and validated") {
    SplitResult parts = toy_splits(100);
    ALConfig cfg = fast_config();
    cfg.total_budget = 5;
    cfg.budget_per_iteration = 5;
    cfg.use_pretrained_encoder = true;

    CHECK_THROWS_AS(run_al(parts.pool, parts.val, parts.test, cfg), ConfigError);

    ByolConfig ssl_cfg;
    ssl_cfg.encoder_hidden = cfg.hidden_sizes;
    ssl_cfg.epochs = 2;
    ssl_cfg.batch_size = 20;
    ssl_cfg.seed = 8;
    PretrainResult pre = pretrain(parts.pool, ssl_cfg);
    RunHistory history = run_al(parts.pool, parts.val, parts.test, cfg, &pre.encoder);
    CHECK(history.records.size() == 2);

    MlpBlock wrong = pre.encoder;
    wrong.in_dim += 1;
    CHECK_THROWS_AS(run_al(parts.pool, parts.val, parts.test, cfg, &wrong), ConfigError);
}

TEST_CASE("run_al: AL run improves macro F1 over the initial model on an imbalanced pool") {
    SyntheticConfig data_cfg;
    data_cfg.num_classes = 4;
    data_cfg.feature_dim = 8;
    data_cfg.num_samples = 420;
    data_cfg.class_priors = {0.5, 0.4, 0.08, 0.08};
    data_cfg.noise_std = 0.6;
    data_cfg.seed = 31;
    Archive archive = generate_synthetic(data_cfg);
    SplitResult parts = split(archive, {0.7, 0.1, 0.2}, 9);

    ALConfig cfg;
    cfg.initial_labeled = 20;
    cfg.budget_per_iteration = 20;
    cfg.total_budget = 200;
    cfg.strategy = Strategy::mge_clustering;
    cfg.hidden_sizes = {16};
    cfg.train.epochs = 40;
    cfg.train.batch_size = 10;
    cfg.train.learning_rate = 0.05;
    cfg.train.lr_decay_factor = 0.1;
    cfg.train.lr_decay_epoch = 32;
    cfg.train.augment_noise_std = 0.0;
    cfg.seed = 5;

    RunHistory history = run_al(parts.pool, parts.val, parts.test, cfg);
    CHECK(history.records.back().macro_f1 > history.records.front().macro_f1);
}

TEST_CASE("run_many: distinct initial sets per seed, deterministic collection") {
    SplitResult parts = toy_splits();
    ALConfig cfg = fast_config();
    cfg.total_budget = 10;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

    std::vector<RunOutcome> outcomes = run_many(parts.pool, parts.val, parts.test, cfg, seeds);
    REQUIRE(outcomes.size() == 5);
    std::set<std::vector<std::size_t>> initial_sets;
    for (const RunOutcome& outcome : outcomes) {
        REQUIRE(outcome.ok());
        initial_sets.insert(outcome.history->initial_ids);
    }
    CHECK(initial_sets.size() == 5);

    std::vector<RunOutcome> again = run_many(parts.pool, parts.val, parts.test, cfg, seeds);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(again[i].history->initial_ids == outcomes[i].history->initial_ids);
        CHECK(again[i].history->records.back().macro_f1 ==
              outcomes[i].history->records.back().macro_f1);
    }

    // Parallel execution returns the same results in the same order.
    std::vector<RunOutcome> parallel =
        run_many(parts.pool, parts.val, parts.test, cfg, seeds, nullptr, 2);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(parallel[i].history->initial_ids == outcomes[i].history->initial_ids);
        CHECK(parallel[i].history->records.back().macro_f1 ==
              outcomes[i].history->records.back().macro_f1);
    }
}

TEST_CASE("run_many: failures are collected per run, not thrown") {
    SplitResult parts = toy_splits(40);
    ALConfig cfg = fast_config();
    cfg.initial_labeled = parts.pool.size();  // every run must fail the size check
    std::vector<RunOutcome> outcomes =
        run_many(parts.pool, parts.val, parts.test, cfg, {1, 2, 3});
    REQUIRE(outcomes.size() == 3);
    for (const RunOutcome& outcome : outcomes) {
        CHECK(!outcome.ok());
        CHECK(!outcome.error.empty());
    }
}

TEST_CASE("RunHistory::curve flattens the records") {
    SplitResult parts = toy_splits(60);
    ALConfig cfg = fast_config();
    cfg.initial_labeled = 8;
    cfg.budget_per_iteration = 4;
    cfg.total_budget = 8;
    RunHistory history = run_al(parts.pool, parts.val, parts.test, cfg);
    auto curve = history.curve();
    REQUIRE(curve.size() == history.records.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
        CHECK(curve[i].labeled_count == history.records[i].labeled_count);
        CHECK(curve[i].macro_f1 == history.records[i].macro_f1);
    }
}
