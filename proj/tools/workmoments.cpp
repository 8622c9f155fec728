// workmoments.cpp: command-line front end, `workmoments <subcommand> --config <path> [--key value ...] --out <dir>`

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "workmoments/cli.hpp"
#include "workmoments/config.hpp"
#include "workmoments/errors.hpp"

int main(int argc, char** argv) {
    using namespace workmoments;

    CLI::App app{"Work statistics of a driven dissipative two-level system"};
    app.set_help_flag("-h,--help", "Print this help and exit");

    std::string which;
    std::string config_path;
    std::string out_dir = "out";
    bool list_keys = false;
    app.add_option("subcommand", which, "moments | qjump | oracle | fdt-scan | compare | figures")
        ->check(CLI::IsMember(subcommand_names()));
    app.add_option("--config", config_path, "Flat `key = value` configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_flag("--list-keys", list_keys, "Print every configuration key with its default and exit");

    std::map<std::string, std::string> flag_values;
    for (const auto& [key, def] : config_keys()) {
        app.add_option("--" + key, flag_values[key], "default: " + def)->group("Configuration keys");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    if (list_keys) {
        for (const auto& [key, def] : config_keys()) std::cout << key << " = " << def << "\n";
        return kExitOk;
    }
    if (which.empty()) {
        std::cerr << "missing subcommand; run with --help\n";
        return kExitConfig;
    }

    KeyValues overrides;
    for (const auto& [key, value] : flag_values) {
        if (app.count("--" + key) > 0) overrides[key] = value;
    }

    RunConfig cfg;
    try {
        cfg = load_config(config_path, overrides);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return run_subcommand(cfg, *parse_subcommand(which), out_dir, std::cout, std::cerr);
}
