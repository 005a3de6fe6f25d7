#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ifslab/cli.hpp"

namespace {

void add_common_options(CLI::App* cmd, ifslab::cli::RunConfig& cfg, std::vector<std::string>& tol_args,
                        bool needs_system) {
    auto* system = cmd->add_option("--system", cfg.system_path, "system definition JSON");
    if (needs_system) system->required();
    cmd->add_option("--seed", cfg.seed, "RNG seed (mandatory; no wall-clock seeding)")
        ->required()
        ->each([&cfg](const std::string&) { cfg.seed_set = true; });
    cmd->add_option("--n", cfg.n, "trajectory length");
    cmd->add_option("--burn-in", cfg.burn_in, "discarded leading steps");
    cmd->add_option("--reps", cfg.reps, "replications");
    cmd->add_option("--samples", cfg.samples, "random probe draws for sup estimation");
    cmd->add_option("--grid", cfg.grid_nodes, "threshold grid nodes per axis");
    cmd->add_option("--n-max", cfg.n_max, "operator iterates for the decay fit");
    cmd->add_option("--alpha", cfg.alpha, "weighted-norm exponent alpha");
    cmd->add_option("--beta", cfg.beta, "weighted-norm exponent beta");
    cmd->add_option("--r", cfg.r, "bracket gap exponent r in (1,2)");
    cmd->add_option("--gamma", cfg.gamma, "modulus/budget shape gamma > 1");
    cmd->add_option("--c", cfg.c, "bracketing-integral exponent c >= 0");
    cmd->add_option("--mean-ref", cfg.mean_ref, "mean reference: longrun|uniform");
    cmd->add_option("--f", cfg.f_spec, "test function: id|const:v|ramp:t,eta|sigmoid:t,eta|affine:b,a...");
    cmd->add_option("--out", cfg.output_dir, "output directory");
    cmd->add_option("--tol", tol_args, "tolerance override key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and verification laboratory for iterated function systems\n"
                 "with place-dependent probabilities that contract on average"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> commands{
        {"verify", "estimate contraction and moment-condition constants"},
        {"norms", "weighted Lipschitz norms of the bundled function family"},
        {"simulate", "sample a trajectory and emit it as CSV"},
        {"invariant", "estimate the invariant measure and its first moment"},
        {"decay", "operator-iterate decay rate towards the invariant mean"},
        {"clt", "scalar central limit diagnostic"},
        {"eclt", "empirical-process limit diagnostic"},
        {"brackets", "bracketing covers, modulus and scaling checks"},
        {"report", "aggregate command reports into a summary"}};

    ifslab::cli::RunConfig cfg;
    std::vector<std::string> tol_args;
    for (const auto& [name, help] : commands) {
        CLI::App* cmd = app.add_subcommand(name, help);
        add_common_options(cmd, cfg, tol_args, name != "report");
        cmd->callback([&cfg, name = name] { cfg.command = name; });
    }

    CLI11_PARSE(app, argc, argv);

    for (const auto& arg : tol_args) {
        auto eq = arg.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: --tol expects key=value, got: " << arg << "\n";
            return ifslab::cli::exit_config_error;
        }
        try {
            cfg.tolerances[arg.substr(0, eq)] = std::stod(arg.substr(eq + 1));
        } catch (const std::exception&) {
            std::cerr << "error: --tol expects a numeric value in: " << arg << "\n";
            return ifslab::cli::exit_config_error;
        }
    }

    std::string error;
    int code = ifslab::cli::run_to_exit_code(cfg, &error);
    if (!error.empty()) std::cerr << "error: " << error << "\n";
    return code;
}
