#include "slipflow/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

enum ExitCode { ok = 0, solver_failure = 2, config_error = 3 };

int run(const std::string& forced_experiment, const std::string& path, std::vector<std::string> overrides, bool quiet)
{
    using namespace slipflow;
    try {
        if (!forced_experiment.empty())
            overrides.insert(overrides.begin(), "experiment=\"" + forced_experiment + "\"");
        const ExperimentConfig config = load_config(path, overrides);
        const RunArtifacts art = run_experiment(config, quiet ? nullptr : &std::cerr);
        for (const auto& [k, v] : art.summary)
            std::cout << k << ": " << v << '\n';
        for (const auto& f : art.files)
            std::cout << "wrote " << f << '\n';
        return ok;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const StabilityError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return solver_failure;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Navier-Stokes flow with nonlinear slip boundary conditions"};
    app.require_subcommand(1);

    struct Args {
        std::string config;
        std::vector<std::string> overrides;
        bool quiet = false;
    };
    Args args;
    std::string forced;
    const auto add = [&](const char* name, const char* help, const char* experiment) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("config", args.config, "JSON config file")->required();
        sub->add_option("--set", args.overrides, "Override a config key, key=value (repeatable)");
        sub->add_flag("-q,--quiet", args.quiet, "Suppress Newton logging");
        sub->callback([&forced, experiment] { forced = experiment; });
    };
    add("solve", "Run the experiment named in the config", "");
    add("convergence", "Run a manufactured-solution convergence study", "convergence");
    add("constants", "Compute discrete stability constants", "constants");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }
    return run(forced, args.config, args.overrides, args.quiet);
}
