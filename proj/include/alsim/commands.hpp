#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace alsim {

// Options shared by the CLI subcommands. Precedence for the values they carry:
// explicit flag > environment variable (ALSIM_OUTPUT_DIR, ALSIM_JOBS) > config.
struct CommandOptions {
    std::string config_path;
    std::string out;                  // --out: file for generate/pretrain, directory otherwise
    std::string data;                 // --data: dataset CSV for pretrain
    std::vector<std::uint64_t> seeds; // --seeds override; empty = use config
    std::optional<std::size_t> jobs;  // --jobs override
};

// Each command returns a process exit status: 0 iff no error was raised.
int cmd_generate(const CommandOptions& options);
int cmd_pretrain(const CommandOptions& options);
int cmd_run(const CommandOptions& options);
int cmd_compare(const CommandOptions& options);
int cmd_report(const CommandOptions& options);

}  // namespace alsim
