#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "ssep/config.hpp"

namespace ssep {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2 };

struct RunResult {
    int exit_code = kExitOk;
    std::filesystem::path run_dir;  ///< empty for report
    std::string summary;            ///< human-readable, one screen
};

/// Execute a validated configuration. Every command except report creates a fresh
/// directory <out>/<command>-<UTC timestamp>[-n] holding config.json, the CSV
/// outputs and summary.json. Parameter errors surface as ConfigError.
RunResult run(const ExperimentConfig& config);

/// Build version string injected at configure time.
std::string git_describe();

}  // namespace ssep
