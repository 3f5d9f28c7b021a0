// Command-line entry point: ssep_mdp <command> [--config FILE] [--key value ...]

#include <clocale>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ssep/config.hpp"
#include "ssep/runner.hpp"

int main(int argc, char** argv) {
    std::setlocale(LC_ALL, "C");

    CLI::App app{"SSEP tagged-particle simulator and moderate-deviation variational solver"};
    app.set_help_flag("-h,--help", "Print this help and exit");
    std::string command;
    std::optional<std::string> config_path;
    app.add_option("command", command, "simulate | variance-sweep | mdp-curve | variational | oracle-check | report");
    app.add_option("--config", config_path, "JSON configuration file; flags override its values");

    std::map<std::string, std::string> raw;
    for (const auto& key : ssep::all_keys()) {
        if (key.name == "command") continue;
        std::string names = "--" + key.name;
        if (key.name.find('_') != std::string::npos) {
            std::string dashed = key.name;
            for (auto& ch : dashed)
                if (ch == '_') ch = '-';
            names += ",--" + dashed;
        }
        app.add_option(names, raw[key.name], key.help);
    }
    app.add_flag("--version", "Print the build version and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ssep::kExitOk : ssep::kExitConfig;
    }
    if (app.count("--version")) {
        std::cout << ssep::git_describe() << "\n";
        return ssep::kExitOk;
    }

    std::map<std::string, std::string> flags;
    for (const auto& [k, v] : raw)
        if (app.count("--" + k) > 0) flags[k] = v;
    if (!command.empty()) flags["command"] = command;

    try {
        const auto config = ssep::load_config(config_path, flags);
        const auto result = ssep::run(config);
        std::cout << result.summary;
        return result.exit_code;
    } catch (const ssep::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return ssep::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ssep::kExitFailure;
    }
}
