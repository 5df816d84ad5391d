#include "alsim/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "alsim/error.hpp"
#include "alsim/experiment.hpp"

namespace alsim {

namespace fs = std::filesystem;

namespace {

std::string resolve_output_dir(const CommandOptions& options, const ExperimentConfig& config) {
    if (!options.out.empty()) return options.out;
    if (const char* env = std::getenv("ALSIM_OUTPUT_DIR")) return env;
    return config.output_dir;
}

std::size_t resolve_jobs(const CommandOptions& options, const ExperimentConfig& config) {
    if (options.jobs) return *options.jobs;
    if (const char* env = std::getenv("ALSIM_JOBS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) throw ConfigError("ALSIM_JOBS must be a positive integer");
        return static_cast<std::size_t>(v);
    }
    return config.jobs;
}

std::vector<std::uint64_t> resolve_seeds(const CommandOptions& options,
                                         const ExperimentConfig& config) {
    return options.seeds.empty() ? config.seeds : options.seeds;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

void ensure_parent_dir(const std::string& path) {
    fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

void print_class_frequencies(const Archive& archive) {
    std::vector<std::size_t> counts = class_frequencies(archive);
    std::printf("class      count  frequency\n");
    for (std::size_t j = 0; j < counts.size(); ++j)
        std::printf("%-9s %6zu  %.4f\n", archive.class_names[j].c_str(), counts[j],
                    archive.size() ? static_cast<double>(counts[j]) / archive.size() : 0.0);
}

// Optionally pretrains or loads the shared encoder, honoring the config flag.
std::optional<MlpBlock> obtain_encoder(const ExperimentConfig& config, const Archive& pool) {
    if (!config.al.use_pretrained_encoder) return std::nullopt;
    if (!config.encoder_checkpoint)
        throw ConfigError(
            "al.use_pretrained_encoder is set but encoder_checkpoint is missing; run the "
            "pretrain command first");
    MlpBlock encoder = load_encoder(*config.encoder_checkpoint);
    if (encoder.input_dim() != pool.feature_dim)
        throw ConfigError("encoder checkpoint input dim does not match the dataset");
    return encoder;
}

struct PreparedData {
    Archive archive;
    SplitResult splits;
};

PreparedData prepare_data(const ExperimentConfig& config) {
    PreparedData data;
    data.archive = materialize_archive(config);
    data.splits = split(data.archive, config.split_fractions, config.split_seed);
    return data;
}

// Runs every (scenario, strategy, seed) combination and aggregates the curves.
// Failed runs are reported on stderr; the batch keeps going.
std::vector<ExperimentEntry> execute(const ExperimentConfig& config,
                                     const std::vector<std::string>& strategies,
                                     const std::vector<std::uint64_t>& seeds, std::size_t jobs,
                                     const PreparedData& data, const MlpBlock* encoder,
                                     bool& any_failed) {
    std::vector<ExperimentEntry> entries;
    for (const ScenarioConfig& scenario : effective_scenarios(config)) {
        Archive pool = apply_scenario(data.splits.pool, scenario.spec);
        for (const std::string& strategy : strategies) {
            ALConfig al = config.al;
            al.strategy = strategy_from_name(strategy);
            std::vector<RunOutcome> outcomes =
                run_many(pool, data.splits.val, data.splits.test, al, seeds, encoder, jobs);
            std::vector<std::vector<CurvePoint>> curves;
            for (const RunOutcome& outcome : outcomes) {
                if (outcome.ok()) {
                    curves.push_back(outcome.history->curve());
                } else {
                    any_failed = true;
                    std::fprintf(stderr, "run failed (scenario=%s strategy=%s seed=%llu): %s\n",
                                 scenario.name.c_str(), strategy.c_str(),
                                 static_cast<unsigned long long>(outcome.seed),
                                 outcome.error.c_str());
                }
            }
            if (curves.empty())
                throw Error("all runs failed for scenario " + scenario.name + ", strategy " +
                            strategy);
            ExperimentEntry entry;
            entry.scenario = scenario.name;
            entry.strategy = strategy;
            entry.summary = aggregate(curves);
            entry.runs = std::move(outcomes);
            entries.push_back(std::move(entry));
        }
    }
    return entries;
}

void write_results(const std::string& dir, const std::vector<ExperimentEntry>& entries) {
    fs::create_directories(dir);
    std::ostringstream runs, curves, summary;
    write_runs_jsonl(runs, entries);
    write_curves_csv(curves, entries);
    write_summary_csv(summary, entries);
    write_text_file((fs::path(dir) / "runs.jsonl").string(), runs.str());
    write_text_file((fs::path(dir) / "curves.csv").string(), curves.str());
    write_text_file((fs::path(dir) / "summary.csv").string(), summary.str());
}

int run_or_compare(const CommandOptions& options, bool compare) {
    ExperimentConfig config = load_experiment_config(options.config_path);
    std::vector<std::uint64_t> seeds = resolve_seeds(options, config);
    std::size_t jobs = resolve_jobs(options, config);
    std::string out_dir = resolve_output_dir(options, config);

    PreparedData data = prepare_data(config);
    std::optional<MlpBlock> encoder = obtain_encoder(config, data.splits.pool);

    std::vector<std::string> strategies =
        compare ? config.strategies : std::vector<std::string>{strategy_name(config.al.strategy)};

    bool any_failed = false;
    std::vector<ExperimentEntry> entries =
        execute(config, strategies, seeds, jobs, data, encoder ? &*encoder : nullptr, any_failed);
    write_results(out_dir, entries);
    print_report(std::cout, entries);
    std::printf("\nresults written to %s\n", out_dir.c_str());
    return any_failed ? 1 : 0;
}

}  // namespace

int cmd_generate(const CommandOptions& options) {
    try {
        ExperimentConfig config = load_experiment_config(options.config_path);
        if (!config.synthetic)
            throw ConfigError(options.config_path + ": generate requires a 'synthetic' block");
        if (options.out.empty()) throw ConfigError("generate: --out <csv path> is required");
        Archive archive = generate_synthetic(*config.synthetic);
        ensure_parent_dir(options.out);
        save_csv(archive, options.out);
        std::printf("wrote %zu samples (d=%zu, C=%zu) to %s\n", archive.size(),
                    archive.feature_dim, archive.num_classes(), options.out.c_str());
        print_class_frequencies(archive);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

int cmd_pretrain(const CommandOptions& options) {
    try {
        ExperimentConfig config = load_experiment_config(options.config_path);
        if (options.out.empty()) throw ConfigError("pretrain: --out <checkpoint path> is required");
        std::string data_path = options.data;
        if (data_path.empty() && config.dataset_csv) data_path = *config.dataset_csv;
        Archive archive;
        if (!data_path.empty())
            archive = load_csv(data_path);
        else if (config.synthetic)
            archive = generate_synthetic(*config.synthetic);
        else
            throw ConfigError("pretrain: no dataset (use --data or config dataset_csv/synthetic)");

        // Pretraining sees the pool split only, so validation/test stay unseen.
        SplitResult splits = split(archive, config.split_fractions, config.split_seed);
        PretrainResult result = pretrain(splits.pool, config.ssl);
        ensure_parent_dir(options.out);
        save_encoder(result.encoder, options.out);

        std::ostringstream loss_csv;
        loss_csv << "epoch,mean_loss\n";
        char buf[40];
        for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
            std::snprintf(buf, sizeof buf, "%.9g", result.epoch_loss[e]);
            loss_csv << (e + 1) << ',' << buf << "\n";
        }
        write_text_file(options.out + ".loss.csv", loss_csv.str());
        std::printf("pretrained on %zu pool samples for %zu epochs; encoder written to %s\n",
                    splits.pool.size(), config.ssl.epochs, options.out.c_str());
        std::printf("loss: first epoch %.6f, last epoch %.6f\n", result.epoch_loss.front(),
                    result.epoch_loss.back());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

int cmd_run(const CommandOptions& options) {
    try {
        return run_or_compare(options, false);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

int cmd_compare(const CommandOptions& options) {
    try {
        return run_or_compare(options, true);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

int cmd_report(const CommandOptions& options) {
    try {
        std::string dir = options.out;
        if (dir.empty()) {
            if (const char* env = std::getenv("ALSIM_OUTPUT_DIR")) dir = env;
        }
        if (dir.empty() && !options.config_path.empty())
            dir = load_experiment_config(options.config_path).output_dir;
        if (dir.empty()) throw ConfigError("report: --out <results dir> is required");

        std::ifstream curves(fs::path(dir) / "curves.csv");
        if (!curves) throw IoError("no curves.csv under " + dir + "; run or compare first");
        std::ifstream summary(fs::path(dir) / "summary.csv");

        std::string line;
        std::printf("%-16s %-12s %8s %-9s %10s %10s\n", "strategy", "scenario", "labeled",
                    "metric", "mean", "std");
        std::getline(curves, line);  // header
        while (std::getline(curves, line)) {
            std::string cells[6];
            std::size_t field = 0, start = 0;
            for (std::size_t i = 0; i <= line.size() && field < 6; ++i) {
                if (i == line.size() || line[i] == ',') {
                    cells[field++] = line.substr(start, i - start);
                    start = i + 1;
                }
            }
            if (field != 6) throw FormatError(dir + "/curves.csv: malformed row: " + line);
            std::printf("%-16s %-12s %8s %-9s %10s %10s\n", cells[0].c_str(), cells[1].c_str(),
                        cells[2].c_str(), cells[3].c_str(), cells[4].c_str(), cells[5].c_str());
        }
        if (summary) {
            std::printf("\nmacro F1 averaged over iterations:\n");
            std::getline(summary, line);  // header
            while (std::getline(summary, line)) std::printf("  %s\n", line.c_str());
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace alsim
