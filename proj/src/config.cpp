#include "ssep/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ssep {

using nlohmann::json;

namespace {

const std::vector<std::pair<Command, std::string>> kCommands = {
    {Command::Simulate, "simulate"},         {Command::VarianceSweep, "variance-sweep"},
    {Command::MdpCurve, "mdp-curve"},        {Command::Variational, "variational"},
    {Command::OracleCheck, "oracle-check"},  {Command::Report, "report"},
};

[[noreturn]] void fail(const std::string& key, const std::string& msg) { throw ConfigError(key + ": " + msg); }

KeyType type_of(const std::string& key) {
    for (const auto& k : all_keys())
        if (k.name == key) return k.type;
    throw ConfigError("unknown key '" + key + "'");
}

std::string type_name(KeyType t) {
    switch (t) {
        case KeyType::Int: return "integer";
        case KeyType::UInt64: return "unsigned 64-bit integer";
        case KeyType::Double: return "number";
        case KeyType::Bool: return "boolean";
        case KeyType::String: return "string";
        case KeyType::DoubleList: return "list of numbers";
        case KeyType::IntList: return "list of integers";
        case KeyType::GridList: return "list of [nt, nu] pairs";
    }
    return "?";
}

bool is_integral_number(const json& v) {
    if (v.is_number_integer()) return true;
    if (v.is_number_float()) {
        const double d = v.get<double>();
        return std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15;
    }
    return false;
}

// Normalise a JSON value to the key's type or throw.
json coerce(const std::string& key, KeyType t, const json& v) {
    auto mismatch = [&]() -> json { fail(key, "expected " + type_name(t) + ", got " + v.dump()); };
    switch (t) {
        case KeyType::Int:
            if (!is_integral_number(v)) return mismatch();
            return static_cast<std::int64_t>(v.get<double>());
        case KeyType::UInt64:
            if (v.is_number_unsigned()) return v.get<std::uint64_t>();
            if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
            return mismatch();
        case KeyType::Double:
            if (!v.is_number() || !std::isfinite(v.get<double>())) return mismatch();
            return v.get<double>();
        case KeyType::Bool:
            if (!v.is_boolean()) return mismatch();
            return v;
        case KeyType::String:
            if (!v.is_string()) return mismatch();
            return v;
        case KeyType::DoubleList: {
            if (!v.is_array()) return mismatch();
            json out = json::array();
            for (const auto& e : v) {
                if (!e.is_number() || !std::isfinite(e.get<double>())) return mismatch();
                out.push_back(e.get<double>());
            }
            return out;
        }
        case KeyType::IntList: {
            if (!v.is_array()) return mismatch();
            json out = json::array();
            for (const auto& e : v) {
                if (!is_integral_number(e)) return mismatch();
                out.push_back(static_cast<std::int64_t>(e.get<double>()));
            }
            return out;
        }
        case KeyType::GridList: {
            if (!v.is_array()) return mismatch();
            json out = json::array();
            for (const auto& e : v) {
                if (!e.is_array() || e.size() != 2 || !is_integral_number(e[0]) || !is_integral_number(e[1]))
                    return mismatch();
                out.push_back({static_cast<std::int64_t>(e[0].get<double>()), static_cast<std::int64_t>(e[1].get<double>())});
            }
            return out;
        }
    }
    return mismatch();
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep))
        if (!item.empty()) parts.push_back(item);
    return parts;
}

// Flag strings: numbers as written, booleans true/false/1/0, lists comma separated,
// grids as 32x64,64x128.
json from_flag(const std::string& key, KeyType t, const std::string& raw) {
    auto number = [&](const std::string& s) -> json {
        try {
            std::size_t used = 0;
            if (s.find_first_of(".eEnN") == std::string::npos && s.find('-') == std::string::npos) {
                const auto u = std::stoull(s, &used);
                if (used == s.size()) return u;
            }
            const double d = std::stod(s, &used);
            if (used == s.size()) return d;
        } catch (const std::exception&) {
        }
        fail(key, "expected " + type_name(t) + ", got '" + raw + "'");
    };
    switch (t) {
        case KeyType::Int:
        case KeyType::UInt64:
        case KeyType::Double:
            return coerce(key, t, number(raw));
        case KeyType::Bool:
            if (raw == "true" || raw == "1") return true;
            if (raw == "false" || raw == "0") return false;
            fail(key, "expected boolean, got '" + raw + "'");
        case KeyType::String:
            return raw;
        case KeyType::DoubleList:
        case KeyType::IntList: {
            json arr = json::array();
            for (const auto& p : split(raw, ',')) arr.push_back(number(p));
            return coerce(key, t, arr);
        }
        case KeyType::GridList: {
            json arr = json::array();
            for (const auto& p : split(raw, ',')) {
                const auto xy = split(p, 'x');
                if (xy.size() != 2) fail(key, "expected grids like 32x64,64x128, got '" + raw + "'");
                arr.push_back({number(xy[0]), number(xy[1])});
            }
            return coerce(key, t, arr);
        }
    }
    fail(key, "unsupported type");
}

void require(bool ok, const std::string& key, const std::string& msg) {
    if (!ok) fail(key, msg);
}

std::string show(const json& v) { return v.dump(); }

void validate_value(const std::string& key, const json& v) {
    auto num = [&]() { return v.get<double>(); };
    auto in_open01 = [&](const char* what) {
        require(num() > 0.0 && num() < 1.0, key, std::string("must lie in ") + what + ", got " + show(v));
    };
    if (key == "rho") in_open01("(0,1)");
    else if (key == "confidence") in_open01("(0,1)");
    else if (key == "theta") require(num() > 0.5 && num() < 1.0, key, "must lie in (1/2,1), got " + show(v));
    else if (key == "threads" || key == "L") require(num() >= 0, key, "must be >= 0, got " + show(v));
    else if (key == "replicas" || key == "records" || key == "N" || key == "max_iter" || key == "Jmax" ||
             key == "min_count" || key == "particle_count")
        require(num() >= 1, key, "must be >= 1, got " + show(v));
    else if (key == "horizon") require(num() >= 0.0, key, "must be >= 0, got " + show(v));
    else if (key == "T" || key == "qp_tol" || key == "u_width_factor")
        require(num() > 0.0, key, "must be > 0, got " + show(v));
    else if (key == "ring_safety_factor") require(num() >= 0.0, key, "must be >= 0, got " + show(v));
    else if (key == "terminal_layer") require(num() >= 0.0 && num() < 1.0, key, "must lie in [0,1), got " + show(v));
    else if (key == "tv_threshold") require(num() > 0.0 && num() <= 1.0, key, "must lie in (0,1], got " + show(v));
    else if (key == "law")
        require(v == "bernoulli_star" || v == "bernoulli" || v == "fixed_count", key,
                "must be one of bernoulli_star, bernoulli, fixed_count, got " + show(v));
    else if (key == "horizons") {
        require(v.size() >= 3, key, "needs at least 3 horizons");
        for (const auto& e : v) require(e.get<double>() > 0.0, key, "horizons must be > 0");
    } else if (key == "alphas") {
        require(!v.empty(), key, "needs at least one alpha");
    } else if (key == "times") {
        require(!v.empty(), key, "needs at least one time");
        for (const auto& e : v) require(e.get<double>() > 0.0, key, "times must be > 0");
    } else if (key == "rings") {
        require(!v.empty(), key, "needs at least one ring size");
        for (const auto& e : v) {
            const auto r = e.get<std::int64_t>();
            require(r >= 2 && r <= 12 && r % 2 == 0, key, "ring sizes must be even and in [2,12], got " + show(e));
        }
    } else if (key == "grids") {
        require(!v.empty(), key, "needs at least one grid");
        for (const auto& e : v) {
            require(e[0].get<std::int64_t>() >= 4 && e[1].get<std::int64_t>() >= 4, key,
                    "grids need nt, nu >= 4, got " + show(e));
            require(e[1].get<std::int64_t>() % 2 == 0, key, "nu must be even, got " + show(e));
        }
    } else if (key == "out" || key == "run_dir") {
        require(!v.get<std::string>().empty(), key, "must not be empty");
    }
}

}  // namespace

std::string command_name(Command c) {
    for (const auto& [k, n] : kCommands)
        if (k == c) return n;
    return "?";
}

Command parse_command(const std::string& name) {
    for (const auto& [k, n] : kCommands)
        if (n == name) return k;
    std::string all;
    for (const auto& [k, n] : kCommands) all += (all.empty() ? "" : ", ") + n;
    throw ConfigError("command: unknown command '" + name + "' (expected one of " + all + ")");
}

const std::vector<KeySpec>& all_keys() {
    static const std::vector<KeySpec> keys = {
        {"command", KeyType::String, "simulate | variance-sweep | mdp-curve | variational | oracle-check | report"},
        {"seed", KeyType::UInt64, "base seed (replica r uses a mixed seed derived from it)"},
        {"out", KeyType::String, "parent directory for the timestamped run directory"},
        {"threads", KeyType::Int, "worker threads (0: SSEP_MDP_THREADS or the OpenMP default)"},
        {"rho", KeyType::Double, "density in (0,1)"},
        {"L", KeyType::Int, "ring half-width (0: smallest allowed by ring_safety_factor)"},
        {"horizon", KeyType::Double, "simulated time"},
        {"records", KeyType::Int, "number of equally spaced observation times"},
        {"replicas", KeyType::Int, "independent replicas"},
        {"law", KeyType::String, "initial law: bernoulli_star | bernoulli | fixed_count"},
        {"particle_count", KeyType::Int, "particles for the fixed_count law"},
        {"ring_safety_factor", KeyType::Double, "require 2L >= factor * sqrt(horizon)"},
        {"write_samples", KeyType::Bool, "also write every replica's X and J"},
        {"horizons", KeyType::DoubleList, "observation times of the variance sweep"},
        {"confidence", KeyType::Double, "confidence level of all intervals"},
        {"N", KeyType::Int, "scale parameter"},
        {"theta", KeyType::Double, "a_N = N^theta"},
        {"T", KeyType::Double, "macroscopic horizon"},
        {"alphas", KeyType::DoubleList, "tail levels of the current curve"},
        {"tagged", KeyType::Bool, "also compute the tagged-particle curve at alpha / rho"},
        {"min_count", KeyType::Int, "tail counts below this are flagged unresolvable"},
        {"alpha", KeyType::Double, "terminal flux constraint K(T,0)"},
        {"grids", KeyType::GridList, "grid ladder as [nt, nu] pairs"},
        {"u_width_factor", KeyType::Double, "U = factor * sqrt(T)"},
        {"qp_tol", KeyType::Double, "relative residual tolerance of the QP solver"},
        {"max_iter", KeyType::Int, "QP iteration cap"},
        {"terminal_layer", KeyType::Double, "fraction of [0,T] left out of the bulk residual"},
        {"dump_fields", KeyType::Bool, "write the finest-grid fields as CSV"},
        {"rings", KeyType::IntList, "ring sizes 2L for the oracle check"},
        {"times", KeyType::DoubleList, "oracle comparison times"},
        {"Jmax", KeyType::Int, "oracle counter range"},
        {"tv_threshold", KeyType::Double, "largest accepted total-variation distance"},
        {"run_dir", KeyType::String, "run directory to summarise"},
    };
    return keys;
}

const std::vector<std::pair<std::string, json>>& command_keys(Command c) {
    static const json req = nullptr;
    static const std::map<Command, std::vector<std::pair<std::string, json>>> table = {
        {Command::Simulate,
         {{"command", req}, {"seed", req}, {"out", req}, {"threads", 0}, {"rho", 0.5}, {"L", 0},
          {"horizon", 1000.0}, {"records", 10}, {"replicas", 1000}, {"law", "bernoulli_star"},
          {"particle_count", 1}, {"ring_safety_factor", 10.0}, {"write_samples", false}}},
        {Command::VarianceSweep,
         {{"command", req}, {"seed", req}, {"out", req}, {"threads", 0}, {"rho", 0.5},
          {"horizons", json::array({100.0, 1000.0, 10000.0})}, {"replicas", 10000}, {"confidence", 0.95},
          {"ring_safety_factor", 10.0}, {"law", "bernoulli_star"}}},
        {Command::MdpCurve,
         {{"command", req}, {"seed", req}, {"out", req}, {"threads", 0}, {"N", 50}, {"theta", 0.75}, {"T", 1.0},
          {"rho", 0.5}, {"alphas", json::array({0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7})}, {"replicas", 1000000},
          {"confidence", 0.95}, {"tagged", true}, {"min_count", 10}, {"ring_safety_factor", 10.0}}},
        {Command::Variational,
         {{"command", req}, {"seed", req}, {"out", req}, {"threads", 0}, {"alpha", 1.0}, {"T", 1.0}, {"rho", 0.5},
          {"grids", json::array({json::array({32, 64}), json::array({64, 128}), json::array({128, 256})})},
          {"u_width_factor", 6.0}, {"qp_tol", 1e-10}, {"max_iter", 100000}, {"terminal_layer", 0.25},
          {"dump_fields", true}}},
        {Command::OracleCheck,
         {{"command", req}, {"seed", req}, {"out", req}, {"threads", 0}, {"rings", json::array({4, 6})},
          {"times", json::array({0.5, 1.0, 2.0})}, {"replicas", 100000}, {"Jmax", 12}, {"tv_threshold", 0.02}}},
        {Command::Report, {{"command", req}, {"run_dir", req}}},
    };
    return table.at(c);
}

ExperimentConfig parse_config(const json& file, const std::map<std::string, std::string>& flags) {
    if (!file.is_null() && !file.is_object()) throw ConfigError("config: top level must be a JSON object");

    json cmd;
    if (auto it = flags.find("command"); it != flags.end())
        cmd = it->second;
    else if (file.is_object() && file.contains("command"))
        cmd = file["command"];
    if (cmd.is_null()) {
        std::string missing = "command";
        for (const char* k : {"seed", "out"})
            if (!(file.is_object() && file.contains(k)) && !flags.count(k)) missing += std::string(", ") + k;
        throw ConfigError("config: missing required keys: " + missing);
    }
    if (!cmd.is_string()) fail("command", "expected string, got " + cmd.dump());

    ExperimentConfig cfg;
    cfg.command = parse_command(cmd.get<std::string>());
    const auto& keys = command_keys(cfg.command);
    auto accepted = [&](const std::string& k) {
        return std::any_of(keys.begin(), keys.end(), [&](const auto& p) { return p.first == k; });
    };

    json values = json::object();
    for (const auto& [k, def] : keys)
        if (!def.is_null()) values[k] = def;
    if (file.is_object())
        for (const auto& [k, v] : file.items()) {
            if (!accepted(k)) throw ConfigError(k + ": unknown key for command '" + command_name(cfg.command) + "'");
            values[k] = coerce(k, type_of(k), v);
        }
    for (const auto& [k, raw] : flags) {
        if (!accepted(k)) throw ConfigError(k + ": not an option of command '" + command_name(cfg.command) + "'");
        values[k] = from_flag(k, type_of(k), raw);
    }
    values["command"] = command_name(cfg.command);

    std::string missing;
    for (const auto& [k, def] : keys)
        if (!values.contains(k)) missing += (missing.empty() ? "" : ", ") + k;
    if (!missing.empty()) throw ConfigError("config: missing required keys: " + missing);
    for (const auto& [k, v] : values.items()) validate_value(k, v);
    cfg.values = std::move(values);
    return cfg;
}

ExperimentConfig load_config(const std::optional<std::string>& path, const std::map<std::string, std::string>& flags) {
    json file = nullptr;
    if (path) {
        std::ifstream in(*path);
        if (!in) throw ConfigError("config: cannot open '" + *path + "'");
        try {
            file = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError("config: '" + *path + "' is not valid JSON: " + e.what());
        }
    }
    return parse_config(file, flags);
}

std::int64_t ExperimentConfig::integer(const std::string& key) const { return values.at(key).get<std::int64_t>(); }
std::uint64_t ExperimentConfig::seed() const { return values.at("seed").get<std::uint64_t>(); }
double ExperimentConfig::number(const std::string& key) const { return values.at(key).get<double>(); }
bool ExperimentConfig::flag(const std::string& key) const { return values.at(key).get<bool>(); }
std::string ExperimentConfig::text(const std::string& key) const { return values.at(key).get<std::string>(); }
std::vector<double> ExperimentConfig::numbers(const std::string& key) const {
    return values.at(key).get<std::vector<double>>();
}
std::vector<std::int64_t> ExperimentConfig::integers(const std::string& key) const {
    return values.at(key).get<std::vector<std::int64_t>>();
}
std::vector<std::pair<int, int>> ExperimentConfig::grids(const std::string& key) const {
    std::vector<std::pair<int, int>> g;
    for (const auto& e : values.at(key)) g.emplace_back(e[0].get<int>(), e[1].get<int>());
    return g;
}

}  // namespace ssep
