#include <CLI11.hpp>

#include "alsim/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"alsim - pool-based active learning simulator for multi-label classification"};
    app.require_subcommand(1);

    alsim::CommandOptions options;
    std::size_t jobs_flag = 0;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", options.config_path, "experiment config (JSON)");
        if (needs_config) opt->required();
        cmd->add_option("--out", options.out, "output file or directory");
        return cmd;
    };
    auto add_run_flags = [&](CLI::App* cmd) {
        cmd->add_option("--seeds", options.seeds, "seed list override")->delimiter(',');
        cmd->add_option("--jobs", jobs_flag, "worker threads for independent runs");
    };

    CLI::App* generate = add_common(app.add_subcommand("generate", "write a synthetic dataset CSV"), true);
    (void)generate;
    CLI::App* pretrain = add_common(app.add_subcommand("pretrain", "BYOL-pretrain an encoder"), true);
    pretrain->add_option("--data", options.data, "dataset CSV (defaults to config dataset_csv)");
    CLI::App* run = add_common(app.add_subcommand("run", "run the AL protocol"), true);
    add_run_flags(run);
    CLI::App* compare = add_common(app.add_subcommand("compare", "paired strategy comparison"), true);
    add_run_flags(compare);
    add_common(app.add_subcommand("report", "print tables from a results directory"), false);

    CLI11_PARSE(app, argc, argv);
    if (jobs_flag > 0) options.jobs = jobs_flag;

    if (app.got_subcommand("generate")) return alsim::cmd_generate(options);
    if (app.got_subcommand("pretrain")) return alsim::cmd_pretrain(options);
    if (app.got_subcommand("run")) return alsim::cmd_run(options);
    if (app.got_subcommand("compare")) return alsim::cmd_compare(options);
    if (app.got_subcommand("report")) return alsim::cmd_report(options);
    return 1;
}
