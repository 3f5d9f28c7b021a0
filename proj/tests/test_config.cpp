#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "ssep/config.hpp"
#include "ssep/runner.hpp"

using namespace ssep;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string error_of(const json& file, const std::map<std::string, std::string>& flags = {}) {
    try {
        parse_config(file, flags);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("ssep_test_config_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("empty config lists every required key") {
    CHECK(error_of(json::object()) == "config: missing required keys: command, seed, out");
    CHECK(error_of(json(nullptr)) == "config: missing required keys: command, seed, out");
    CHECK(error_of(json{{"command", "simulate"}}) == "config: missing required keys: seed, out");
    CHECK(error_of(json{{"command", "report"}}) == "config: missing required keys: run_dir");
}

TEST_CASE("value errors name the key and the admissible range") {
    const json base{{"command", "simulate"}, {"seed", 1}, {"out", "x"}};
    json bad = base;
    bad["rho"] = 1.5;
    const auto msg = error_of(bad);
    CHECK(msg.find("rho") == 0);
    CHECK(msg.find("(0,1)") != std::string::npos);
    bad = base;
    bad["replicas"] = "many";
    CHECK(error_of(bad).find("replicas") == 0);
    CHECK(error_of(json{{"command", "mdp-curve"}, {"seed", 1}, {"out", "x"}, {"alphas", json::array()}}).find("alphas") == 0);
    CHECK(error_of(json{{"command", "variational"}, {"seed", 1}, {"out", "x"}}, {{"grids", "8x15"}}).find("grids") == 0);
    bad = base;
    bad["colour"] = "red";
    CHECK(error_of(bad).find("colour") == 0);
    bad = base;
    bad["law"] = "poisson";
    CHECK(error_of(bad).find("law") == 0);
    CHECK(error_of(base, {{"seed", "-4"}}).find("seed") == 0);
    CHECK(error_of(base, {{"replicas", "12abc"}}).find("replicas") == 0);
    CHECK(error_of(json{{"command", "explode"}, {"seed", 1}, {"out", "x"}}).find("command") == 0);
    CHECK(error_of(json::array({1, 2})) == "config: top level must be a JSON object");
}

TEST_CASE("precedence: defaults < file < flags") {
    const json file{{"command", "simulate"}, {"seed", 3}, {"out", "o"}, {"replicas", 100}};
    const auto a = parse_config(file, {});
    CHECK(a.integer("replicas") == 100);
    CHECK(a.number("horizon") == 1000.0);
    const auto b = parse_config(file, {{"replicas", "500"}});
    CHECK(b.integer("replicas") == 500);
    const auto c = parse_config(json::object(), {{"command", "variational"}, {"seed", "3"}, {"out", "o"},
                                                 {"grids", "8x16,16x32"}, {"alpha", "0.5"}});
    CHECK(c.command == Command::Variational);
    CHECK(c.grids("grids") == std::vector<std::pair<int, int>>{{8, 16}, {16, 32}});
    CHECK(c.number("alpha") == 0.5);
    const auto d = parse_config(json{{"command", "mdp-curve"}, {"seed", 1}, {"out", "o"}}, {{"alphas", "0,0.2,0.4"}});
    CHECK(d.numbers("alphas") == std::vector<double>{0.0, 0.2, 0.4});
    CHECK(d.flag("tagged"));
    CHECK(parse_config(file, {{"command", "oracle-check"}}).command == Command::OracleCheck);
    CHECK(d.seed() == 1);
}

TEST_CASE("load_config reads a file") {
    const auto dir = scratch("load");
    {
        std::ofstream f(dir / "c.json");
        f << R"({"command": "simulate", "seed": 9, "out": "somewhere", "rho": 0.25})";
    }
    const auto c = load_config((dir / "c.json").string(), {});
    CHECK(c.number("rho") == 0.25);
    CHECK_THROWS_AS(load_config((dir / "missing.json").string(), {}), ConfigError);
    {
        std::ofstream f(dir / "broken.json");
        f << "{ not json";
    }
    CHECK_THROWS_AS(load_config((dir / "broken.json").string(), {}), ConfigError);
}

TEST_CASE("simulate run writes its artifacts into a fresh directory and is reproducible") {
    const auto out = scratch("simulate");
    const json file{{"command", "simulate"}, {"seed", 42}, {"out", out.string()}, {"horizon", 20.0},
                    {"records", 4},          {"replicas", 200}, {"write_samples", true}};
    const auto cfg = parse_config(file, {});
    const auto r1 = run(cfg);
    const auto r2 = run(cfg);
    CHECK(r1.exit_code == kExitOk);
    CHECK(r1.run_dir != r2.run_dir);
    CHECK(r1.run_dir.parent_path() == out);
    CHECK(r1.run_dir.filename().string().rfind("simulate-", 0) == 0);
    for (const char* f : {"config.json", "summary.json", "moments.csv", "samples.csv"}) CHECK(fs::exists(r1.run_dir / f));
    CHECK(slurp(r1.run_dir / "samples.csv") == slurp(r2.run_dir / "samples.csv"));
    CHECK(slurp(r1.run_dir / "moments.csv") == slurp(r2.run_dir / "moments.csv"));

    const auto s = json::parse(slurp(r1.run_dir / "summary.json"));
    for (const char* k : {"params", "seed", "git_describe", "wall_time_s", "exit_code", "results"}) CHECK(s.contains(k));
    CHECK(s["seed"] == 42);
    CHECK(s["params"]["replicas"] == 200);
    CHECK(json::parse(slurp(r1.run_dir / "config.json")) == cfg.values);

    const auto rep = run(parse_config(json{{"command", "report"}, {"run_dir", r1.run_dir.string()}}, {}));
    CHECK(rep.exit_code == kExitOk);
    CHECK(rep.summary.find("moments.csv") != std::string::npos);
    CHECK_THROWS_AS(run(parse_config(json{{"command", "report"}, {"run_dir", out.string()}}, {})), ConfigError);
}

TEST_CASE("parameter errors surfacing during a run become config errors") {
    const auto out = scratch("bad");
    // more particles than sites is only caught when the ensemble is set up
    const auto cfg = parse_config(json{{"command", "simulate"}, {"seed", 1}, {"out", out.string()}},
                                  {{"law", "fixed_count"}, {"L", "4"}, {"particle_count", "100"}});
    CHECK_THROWS_AS(run(cfg), ConfigError);
}

TEST_CASE("variational and oracle-check commands") {
    const auto out = scratch("commands");
    const auto v = run(parse_config(json{{"command", "variational"}, {"seed", 1}, {"out", out.string()}},
                                    {{"grids", "8x16,16x32"}}));
    CHECK(v.exit_code == kExitOk);
    for (const char* f : {"variational.csv", "field_F.csv", "field_G.csv", "mu0_G.csv"}) CHECK(fs::exists(v.run_dir / f));

    const auto o = run(parse_config(json{{"command", "oracle-check"}, {"seed", 1}, {"out", out.string()}},
                                    {{"rings", "4"}, {"times", "0.5"}, {"replicas", "20000"}}));
    CHECK(o.exit_code == kExitOk);
    CHECK(fs::exists(o.run_dir / "oracle.csv"));
    const auto strict = run(parse_config(json{{"command", "oracle-check"}, {"seed", 1}, {"out", out.string()}},
                                         {{"rings", "4"}, {"times", "0.5"}, {"replicas", "100"}, {"tv_threshold", "1e-6"}}));
    CHECK(strict.exit_code == kExitFailure);
}
