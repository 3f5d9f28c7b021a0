#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ssep/errors.hpp"

namespace ssep {

enum class Command { Simulate, VarianceSweep, MdpCurve, Variational, OracleCheck, Report };

std::string command_name(Command c);
/// Throws ConfigError for an unknown name.
Command parse_command(const std::string& name);

enum class KeyType { Int, UInt64, Double, Bool, String, DoubleList, IntList, GridList };

struct KeySpec {
    std::string name;
    KeyType type;
    std::string help;
};

/// Every key any command accepts (used to register command-line flags).
const std::vector<KeySpec>& all_keys();

/// Keys accepted by one command, with their defaults (null = required).
const std::vector<std::pair<std::string, nlohmann::json>>& command_keys(Command c);

/// Fully resolved and validated configuration: every key of the command is present.
struct ExperimentConfig {
    Command command = Command::Simulate;
    nlohmann::json values;

    std::int64_t integer(const std::string& key) const;
    std::uint64_t seed() const;
    double number(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::string text(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;
    std::vector<std::int64_t> integers(const std::string& key) const;
    std::vector<std::pair<int, int>> grids(const std::string& key) const;
};

/// Merge defaults, then `file` (a JSON object), then `flags` (raw strings keyed by
/// config key, converted by the key's type). `command` from the flags, if any,
/// overrides the file's. Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const nlohmann::json& file, const std::map<std::string, std::string>& flags);

/// Read a JSON file (if given) and call parse_config.
ExperimentConfig load_config(const std::optional<std::string>& path, const std::map<std::string, std::string>& flags);

}  // namespace ssep
