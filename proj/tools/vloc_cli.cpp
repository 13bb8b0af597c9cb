// vloc: batch runner for cooperative vehicle localization experiments.

#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "vloc/cli/runner.hpp"

namespace {

std::vector<std::string> split_values(const std::string& list) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    for (std::string item; std::getline(ss, item, ',');) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cooperative vehicle localization simulator"};
    app.require_subcommand(1);

    vloc::cli::RunOptions opts;
    std::string seed, trials, mode, deviation;
    std::string sweep_param = "deviation";
    std::string sweep_values = "5,10,15";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opts.config_path, "key = value configuration file");
        cmd->add_option("--seed", seed, "base RNG seed (u64)");
        cmd->add_option("--trials", trials, "number of trials");
        cmd->add_option("--mode", mode, "ranging mode: full|abstract");
        cmd->add_option("--deviation", deviation, "GPS error standard deviation per axis [m]");
    };
    auto add_output = [&](CLI::App* cmd) {
        cmd->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
        cmd->add_flag("--trace", opts.trace, "write the protocol message trace");
        cmd->add_option("--workers", opts.workers, "worker threads for trials")->capture_default_str();
    };

    auto* run = app.add_subcommand("run", "run the configured experiment");
    add_common(run);
    add_output(run);
    auto* validate = app.add_subcommand("validate", "check a configuration and print the effective values");
    add_common(validate);
    auto* sweep = app.add_subcommand("sweep", "run the experiment for several values of one parameter");
    add_common(sweep);
    add_output(sweep);
    sweep->add_option("--param", sweep_param, "parameter to sweep")->capture_default_str();
    sweep->add_option("--values", sweep_values, "comma-separated values")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : vloc::cli::kUsageError;
    }

    if (!seed.empty()) opts.overrides.emplace_back("seed", seed);
    if (!trials.empty()) opts.overrides.emplace_back("trials", trials);
    if (!mode.empty()) opts.overrides.emplace_back("ranging_mode", mode);
    if (!deviation.empty()) opts.overrides.emplace_back("deviation", deviation);

    if (*run) return vloc::cli::run_command(opts, std::cout, std::cerr);
    if (*validate) return vloc::cli::validate_command(opts, std::cout, std::cerr);
    return vloc::cli::sweep_command(opts, {sweep_param, split_values(sweep_values)}, std::cout, std::cerr);
}
