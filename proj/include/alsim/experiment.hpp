#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "alsim/dataset.hpp"
#include "alsim/engine.hpp"
#include "alsim/ssl.hpp"

namespace alsim {

struct ScenarioConfig {
    std::string name = "base";
    ScenarioSpec spec;
};

// The single experiment document consumed by every CLI subcommand. Loaded from
// a JSON file; unknown keys are rejected at every level.
struct ExperimentConfig {
    std::optional<std::string> dataset_csv;     // tabular input, or:
    std::optional<SyntheticConfig> synthetic;   // generator settings
    SplitFractions split_fractions{0.5, 0.25, 0.25};
    std::uint64_t split_seed = 0;
    std::vector<ScenarioConfig> scenarios;      // empty = the unmodified pool
    ALConfig al;                                // model/train blocks fold in here
    ByolConfig ssl;                             // encoder architecture mirrors al
    std::vector<std::string> strategies = {"random", "mge_clustering"};  // for compare
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::optional<std::string> encoder_checkpoint;
    std::string output_dir = "out";
    std::size_t jobs = 1;
};

ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& json_text, const std::string& context);

// Produces the archive named by the config: loads dataset_csv when set,
// otherwise generates the synthetic archive.
Archive materialize_archive(const ExperimentConfig& config);

// The scenarios to run: the configured list, or a single pass-through scenario.
std::vector<ScenarioConfig> effective_scenarios(const ExperimentConfig& config);

// One aggregated (scenario, strategy) cell of an experiment.
struct ExperimentEntry {
    std::string scenario;
    std::string strategy;
    CurveSummary summary;
    std::vector<RunOutcome> runs;
};

// Run log: one JSON object per iteration per run, line delimited.
void write_runs_jsonl(std::ostream& out, const std::vector<ExperimentEntry>& entries);

// Plot-ready CSV: strategy,scenario,labeled_count,metric,mean,std.
void write_curves_csv(std::ostream& out, const std::vector<ExperimentEntry>& entries);

// Mean-over-iterations macro F1 per (strategy, scenario).
void write_summary_csv(std::ostream& out, const std::vector<ExperimentEntry>& entries);

void print_report(std::ostream& out, const std::vector<ExperimentEntry>& entries);

}  // namespace alsim
