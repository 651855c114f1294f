// cmnlab: radial chemotaxis-May-Nowak laboratory.
//
//   cmnlab simulate --config run.cfg --out outdir
//   cmnlab sweep    --config run.cfg --axis m=0.2:3.0:0.2 --axis chi=1:20:1 --out outdir
//   cmnlab verify   <mass|elliptic|ode-oracle|convergence|transform|odi|hypotheses>
//
// Exit codes for simulate: 0 bounded/completed, 2 blow-up suspected,
// 3 inconclusive, 1 error. Set CMNLAB_LOG=debug to echo the resolved
// configuration.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmn/config.hpp"
#include "cmn/driver.hpp"
#include "cmn/verify.hpp"

int main(int argc, char** argv) {
    CLI::App app{"radial chemotaxis-May-Nowak laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::vector<std::string> axis_args;
    int replicates = 1, jobs = 0;
    std::string suite;

    CLI::App* sim = app.add_subcommand("simulate", "run one configuration");
    sim->add_option("--config", config_path, "run configuration file")->required();
    sim->add_option("--out", out_dir, "output directory");

    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep");
    sweep->add_option("--config", config_path, "base configuration file")->required();
    sweep->add_option("--axis", axis_args, "axis spec name=start:stop:step (repeatable)")
        ->required();
    sweep->add_option("--replicates", replicates, "replicate runs per cell");
    sweep->add_option("--jobs", jobs, "parallel workers (0 = hardware width)");
    sweep->add_option("--out", out_dir, "output directory");

    CLI::App* ver = app.add_subcommand("verify", "run a named invariant suite");
    ver->add_option("suite", suite, "mass|elliptic|ode-oracle|convergence|transform|odi|hypotheses")
        ->required();

    CLI11_PARSE(app, argc, argv);

    const char* log_env = std::getenv("CMNLAB_LOG");
    const bool debug = log_env && std::string(log_env) == "debug";

    if (sim->parsed()) {
        if (debug) {
            try {
                std::cerr << cmn::serialize_config(cmn::load_config(config_path));
            } catch (...) {
            }
        }
        return cmn::cmd_simulate(config_path, out_dir);
    }
    if (sweep->parsed()) {
        cmn::SweepSpec spec;
        spec.replicates = replicates;
        spec.parallelism = jobs;
        try {
            for (const auto& a : axis_args) spec.axes.push_back(cmn::parse_axis(a));
        } catch (const cmn::ConfigError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
        return cmn::cmd_sweep(config_path, spec, out_dir);
    }
    return cmn::cmd_verify(suite);
}
