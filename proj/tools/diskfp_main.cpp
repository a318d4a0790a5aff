#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "diskfp/cli.hpp"
#include "diskfp/config.hpp"

namespace {

struct SolveFlags {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<int> grid_nr;
    std::optional<int> grid_ntheta;
    std::optional<double> tol;
    std::optional<int> max_iter;
};

diskfp::RunConfig loadWithOverrides(const SolveFlags& flags) {
    diskfp::RunConfig cfg = diskfp::load_config(flags.config_path);
    if (flags.out_dir) cfg.out_dir = *flags.out_dir;
    if (flags.grid_nr) cfg.grid_nr = *flags.grid_nr;
    if (flags.grid_ntheta) cfg.grid_ntheta = *flags.grid_ntheta;
    if (flags.tol) cfg.tol = *flags.tol;
    if (flags.max_iter) cfg.max_iter = *flags.max_iter;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver and verification toolkit for coupled semilinear Poisson systems "
                 "on the unit disk"};
    app.require_subcommand(1);

    SolveFlags solve_flags;
    CLI::App* solve = app.add_subcommand("solve", "run the Picard iteration and check the norm box");
    solve->add_option("config", solve_flags.config_path, "configuration file")->required();
    solve->add_option("--out-dir", solve_flags.out_dir, "output directory override");
    solve->add_option("--grid-nr", solve_flags.grid_nr, "radial cell count override");
    solve->add_option("--grid-ntheta", solve_flags.grid_ntheta, "angular node count override");
    solve->add_option("--tol", solve_flags.tol, "relative tolerance override");
    solve->add_option("--max-iter", solve_flags.max_iter, "iteration cap override");

    SolveFlags certify_flags;
    int samples = 33;
    CLI::App* certify = app.add_subcommand("certify", "verify the localization hypotheses");
    certify->add_option("config", certify_flags.config_path, "configuration file")->required();
    certify->add_option("--samples", samples, "samples per scalar dimension (default 33)");
    certify->add_option("--out-dir", certify_flags.out_dir, "output directory override");
    certify->add_option("--grid-nr", certify_flags.grid_nr, "radial cell count override");
    certify->add_option("--grid-ntheta", certify_flags.grid_ntheta, "angular node count override");

    int seeds = 12;
    CLI::App* oracle = app.add_subcommand("oracle", "finite-dimensional index checks");
    CLI::App* run_cases = oracle->add_subcommand(
        "run-cases", "verify the (-1)^k index formula on the shipped case families");
    run_cases->add_option("--seeds", seeds, "Newton starts per axis (default 12)");
    oracle->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return diskfp::kExitError;
    }

    try {
        if (solve->parsed()) return diskfp::cmd_solve(loadWithOverrides(solve_flags));
        if (certify->parsed()) return diskfp::cmd_certify(loadWithOverrides(certify_flags), samples);
        if (run_cases->parsed()) return diskfp::cmd_oracle_run_cases(seeds, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return diskfp::kExitError;
    }
    return diskfp::kExitError;
}
