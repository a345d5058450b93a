#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "mixsob/config.hpp"
#include "mixsob/reproduce.hpp"

namespace mixsob {

enum ExitCode : int { exit_ok = 0, exit_criteria_failed = 1, exit_config = 2, exit_not_converged = 3, exit_io = 4 };

struct RunOptions {
    std::filesystem::path out_root = "out";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::ostream* log = nullptr;
    /// reproduce-all repeats itself to check determinism: in a child process
    /// running this executable when set, in-process otherwise.
    std::optional<std::filesystem::path> rerun_executable;
    bool check_determinism = true;
};

struct RunOutcome {
    int exit_code = exit_ok;
    std::filesystem::path directory;   // <out_root>/<subcommand>-<hash>, empty on failure
    std::string message;
    std::optional<AcceptanceReport> acceptance;
    std::optional<Check> determinism;
};

/// Loads and validates the config, then runs. A config error leaves no files
/// behind; other failures remove the partially written directory.
RunOutcome run(Subcommand cmd, const std::filesystem::path& config_path, const RunOptions& options);
RunOutcome run(const ExperimentConfig& config, const RunOptions& options);

/// Accepts either a config file or a directory holding <subcommand>.toml.
std::filesystem::path resolve_config_path(Subcommand cmd, const std::filesystem::path& path);

}  // namespace mixsob
