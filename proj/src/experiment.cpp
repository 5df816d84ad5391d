#include "alsim/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "alsim/error.hpp"

namespace alsim {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
    if (!obj.is_object()) throw ConfigError(context + ": expected an object");
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw ConfigError(context + ": unknown key '" + item.key() + "'");
}

template <class T>
void read_into(const json& obj, const char* key, T& value, const std::string& context) {
    if (!obj.contains(key)) return;
    try {
        value = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(context + ": invalid value for key '" + std::string(key) + "'");
    }
}

SyntheticConfig parse_synthetic(const json& obj) {
    check_keys(obj,
               {"num_classes", "feature_dim", "num_samples", "class_priors", "cooccurrence_pairs",
                "noise_std", "seed", "allow_all_zero"},
               "synthetic");
    SyntheticConfig cfg;
    read_into(obj, "num_classes", cfg.num_classes, "synthetic");
    read_into(obj, "feature_dim", cfg.feature_dim, "synthetic");
    read_into(obj, "num_samples", cfg.num_samples, "synthetic");
    read_into(obj, "class_priors", cfg.class_priors, "synthetic");
    read_into(obj, "noise_std", cfg.noise_std, "synthetic");
    read_into(obj, "seed", cfg.seed, "synthetic");
    read_into(obj, "allow_all_zero", cfg.allow_all_zero, "synthetic");
    if (obj.contains("cooccurrence_pairs")) {
        for (const auto& item : obj.at("cooccurrence_pairs")) {
            if (!item.is_array() || item.size() != 3)
                throw ConfigError("synthetic: cooccurrence_pairs entries must be [a, b, strength]");
            CooccurrencePair pair;
            pair.class_a = item.at(0).get<std::size_t>();
            pair.class_b = item.at(1).get<std::size_t>();
            pair.strength = item.at(2).get<double>();
            cfg.cooccurrence_pairs.push_back(pair);
        }
    }
    return cfg;
}

ScenarioConfig parse_scenario(const json& obj, std::size_t index) {
    std::string context = "scenarios[" + std::to_string(index) + "]";
    check_keys(obj, {"name", "minority_classes", "remove_per_class", "exclusion_pairs", "seed"},
               context);
    ScenarioConfig cfg;
    cfg.name = "scenario" + std::to_string(index + 1);
    read_into(obj, "name", cfg.name, context);
    read_into(obj, "minority_classes", cfg.spec.minority_classes, context);
    read_into(obj, "remove_per_class", cfg.spec.remove_per_class, context);
    read_into(obj, "seed", cfg.spec.seed, context);
    if (obj.contains("exclusion_pairs")) {
        for (const auto& item : obj.at("exclusion_pairs")) {
            if (!item.is_array() || item.size() != 2)
                throw ConfigError(context + ": exclusion_pairs entries must be [a, b]");
            cfg.spec.exclusion_pairs.emplace_back(item.at(0).get<std::size_t>(),
                                                  item.at(1).get<std::size_t>());
        }
    }
    return cfg;
}

void parse_model(const json& obj, ALConfig& al, ByolConfig& ssl) {
    check_keys(obj, {"hidden_sizes", "activation"}, "model");
    read_into(obj, "hidden_sizes", al.hidden_sizes, "model");
    if (obj.contains("activation"))
        al.activation = activation_from_name(obj.at("activation").get<std::string>());
    // The BYOL encoder must mirror the classifier encoder for transfer.
    ssl.encoder_hidden = al.hidden_sizes;
    ssl.activation = al.activation;
}

void parse_train(const json& obj, TrainConfig& cfg) {
    check_keys(obj,
               {"epochs", "batch_size", "learning_rate", "lr_decay_factor", "lr_decay_epoch",
                "augment_noise_std", "freeze_encoder"},
               "train");
    read_into(obj, "epochs", cfg.epochs, "train");
    read_into(obj, "batch_size", cfg.batch_size, "train");
    read_into(obj, "learning_rate", cfg.learning_rate, "train");
    read_into(obj, "lr_decay_factor", cfg.lr_decay_factor, "train");
    read_into(obj, "lr_decay_epoch", cfg.lr_decay_epoch, "train");
    read_into(obj, "freeze_encoder", cfg.freeze_encoder, "train");
    if (obj.contains("augment_noise_std")) {
        const json& v = obj.at("augment_noise_std");
        if (v.is_string() && v.get<std::string>() == "auto")
            cfg.augment_noise_std = -1.0;  // resolved against the pool at run time
        else if (v.is_number())
            cfg.augment_noise_std = v.get<double>();
        else
            throw ConfigError("train: augment_noise_std must be a number or \"auto\"");
    }
}

void parse_al(const json& obj, ALConfig& cfg) {
    check_keys(obj,
               {"initial_labeled", "budget_per_iteration", "total_budget", "strategy", "m_factor",
                "use_pretrained_encoder"},
               "al");
    read_into(obj, "initial_labeled", cfg.initial_labeled, "al");
    read_into(obj, "budget_per_iteration", cfg.budget_per_iteration, "al");
    read_into(obj, "total_budget", cfg.total_budget, "al");
    read_into(obj, "m_factor", cfg.m_factor, "al");
    read_into(obj, "use_pretrained_encoder", cfg.use_pretrained_encoder, "al");
    if (obj.contains("strategy"))
        cfg.strategy = strategy_from_name(obj.at("strategy").get<std::string>());
}

void parse_ssl(const json& obj, ByolConfig& cfg) {
    check_keys(obj,
               {"epochs", "batch_size", "learning_rate", "momentum", "tau", "noise_std",
                "mask_prob", "seed"},
               "ssl");
    read_into(obj, "epochs", cfg.epochs, "ssl");
    read_into(obj, "batch_size", cfg.batch_size, "ssl");
    read_into(obj, "learning_rate", cfg.learning_rate, "ssl");
    read_into(obj, "momentum", cfg.momentum, "ssl");
    read_into(obj, "tau", cfg.tau, "ssl");
    read_into(obj, "noise_std", cfg.augment.noise_std, "ssl");
    read_into(obj, "mask_prob", cfg.augment.mask_prob, "ssl");
    read_into(obj, "seed", cfg.seed, "ssl");
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& context) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw FormatError(context + ": invalid JSON: " + e.what());
    }
    check_keys(doc,
               {"dataset_csv", "synthetic", "split_fractions", "split_seed", "scenarios", "model",
                "train", "al", "ssl", "strategies", "seeds", "encoder_checkpoint", "output_dir",
                "jobs"},
               context);

    ExperimentConfig cfg;
    if (doc.contains("dataset_csv")) cfg.dataset_csv = doc.at("dataset_csv").get<std::string>();
    if (doc.contains("synthetic")) cfg.synthetic = parse_synthetic(doc.at("synthetic"));
    if (doc.contains("split_fractions")) {
        const json& f = doc.at("split_fractions");
        if (!f.is_array() || f.size() != 3)
            throw ConfigError(context + ": split_fractions must be [pool, val, test]");
        cfg.split_fractions.pool = f.at(0).get<double>();
        cfg.split_fractions.val = f.at(1).get<double>();
        cfg.split_fractions.test = f.at(2).get<double>();
    }
    read_into(doc, "split_seed", cfg.split_seed, context);
    if (doc.contains("scenarios")) {
        const json& arr = doc.at("scenarios");
        if (!arr.is_array()) throw ConfigError(context + ": scenarios must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i)
            cfg.scenarios.push_back(parse_scenario(arr.at(i), i));
    }
    if (doc.contains("model")) parse_model(doc.at("model"), cfg.al, cfg.ssl);
    if (doc.contains("train")) parse_train(doc.at("train"), cfg.al.train);
    if (doc.contains("al")) parse_al(doc.at("al"), cfg.al);
    if (doc.contains("ssl")) parse_ssl(doc.at("ssl"), cfg.ssl);
    read_into(doc, "strategies", cfg.strategies, context);
    for (const std::string& s : cfg.strategies) strategy_from_name(s);  // validate early
    read_into(doc, "seeds", cfg.seeds, context);
    if (cfg.seeds.empty()) throw ConfigError(context + ": seeds must not be empty");
    if (doc.contains("encoder_checkpoint"))
        cfg.encoder_checkpoint = doc.at("encoder_checkpoint").get<std::string>();
    read_into(doc, "output_dir", cfg.output_dir, context);
    read_into(doc, "jobs", cfg.jobs, context);
    if (!cfg.dataset_csv && !cfg.synthetic)
        throw ConfigError(context + ": one of dataset_csv or synthetic is required");
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str(), path);
}

Archive materialize_archive(const ExperimentConfig& config) {
    if (config.dataset_csv) return load_csv(*config.dataset_csv);
    return generate_synthetic(*config.synthetic);
}

std::vector<ScenarioConfig> effective_scenarios(const ExperimentConfig& config) {
    if (!config.scenarios.empty()) return config.scenarios;
    return {ScenarioConfig{}};
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

void write_runs_jsonl(std::ostream& out, const std::vector<ExperimentEntry>& entries) {
    for (const ExperimentEntry& entry : entries) {
        for (const RunOutcome& outcome : entry.runs) {
            if (!outcome.ok()) continue;
            const RunHistory& history = *outcome.history;
            for (const IterationRecord& record : history.records) {
                json obj;
                obj["scenario"] = entry.scenario;
                obj["strategy"] = entry.strategy;
                obj["seed"] = outcome.seed;
                obj["iteration"] = record.iteration;
                obj["labeled_count"] = record.labeled_count;
                obj["selected_ids"] = record.selected_ids;
                obj["micro_f1"] = record.micro_f1;
                obj["macro_f1"] = record.macro_f1;
                obj["per_class_f1"] = record.per_class_f1;
                out << obj.dump() << "\n";
            }
        }
    }
}

void write_curves_csv(std::ostream& out, const std::vector<ExperimentEntry>& entries) {
    out << "strategy,scenario,labeled_count,metric,mean,std\n";
    for (const ExperimentEntry& entry : entries) {
        const CurveSummary& s = entry.summary;
        for (std::size_t i = 0; i < s.labeled_counts.size(); ++i) {
            out << entry.strategy << ',' << entry.scenario << ',' << s.labeled_counts[i]
                << ",micro_f1," << format_double(s.micro_mean[i]) << ','
                << format_double(s.micro_std[i]) << "\n";
            out << entry.strategy << ',' << entry.scenario << ',' << s.labeled_counts[i]
                << ",macro_f1," << format_double(s.macro_mean[i]) << ','
                << format_double(s.macro_std[i]) << "\n";
        }
    }
}

void write_summary_csv(std::ostream& out, const std::vector<ExperimentEntry>& entries) {
    out << "strategy,scenario,macro_f1_mean_over_iterations\n";
    for (const ExperimentEntry& entry : entries)
        out << entry.strategy << ',' << entry.scenario << ','
            << format_double(entry.summary.macro_mean_over_iterations) << "\n";
}

void print_report(std::ostream& out, const std::vector<ExperimentEntry>& entries) {
    out << "=== F1 curves (mean +/- std over runs) ===\n";
    for (const ExperimentEntry& entry : entries) {
        out << "\n[" << entry.strategy << " / " << entry.scenario << "]\n";
        out << "  labeled   micro_f1            macro_f1\n";
        const CurveSummary& s = entry.summary;
        char line[160];
        for (std::size_t i = 0; i < s.labeled_counts.size(); ++i) {
            std::snprintf(line, sizeof line, "  %7zu   %.4f +/- %.4f   %.4f +/- %.4f\n",
                          s.labeled_counts[i], s.micro_mean[i], s.micro_std[i], s.macro_mean[i],
                          s.macro_std[i]);
            out << line;
        }
    }
    out << "\n=== Macro F1 averaged over iterations ===\n";
    for (const ExperimentEntry& entry : entries) {
        char line[160];
        std::snprintf(line, sizeof line, "  %-16s %-12s %.4f\n", entry.strategy.c_str(),
                      entry.scenario.c_str(), entry.summary.macro_mean_over_iterations);
        out << line;
    }
}

}  // namespace alsim
