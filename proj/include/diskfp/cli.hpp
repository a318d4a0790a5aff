#ifndef DISKFP_CLI_HPP
#define DISKFP_CLI_HPP

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

#include "diskfp/certify.hpp"
#include "diskfp/config.hpp"
#include "diskfp/grid.hpp"
#include "diskfp/hammerstein.hpp"
#include "diskfp/index_oracle.hpp"

namespace diskfp {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Exit codes shared by the commands:
//   0 success (solve: converged and inside the box; certify: all pass)
//   1 certify found a failing condition / oracle case mismatch
//   2 solve converged but the solution left the localization box
//   3 solve did not converge within max_iter
//   4 configuration, evaluation or I/O error (mapped from exceptions)
enum ExitCode : int {
    kExitOk = 0,
    kExitCertifyFail = 1,
    kExitBoxFail = 2,
    kExitNoConvergence = 3,
    kExitError = 4,
};

namespace cli_detail {

inline void writeFile(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << contents;
    if (!out) throw IoError("failed while writing '" + path.string() + "'");
}

inline void writeGridFunction(const GridFunction& gf, const std::filesystem::path& dir,
                              const std::string& stem, const std::string& format) {
    if (format == "csv") {
        std::ofstream out(dir / (stem + ".csv"));
        if (!out) throw IoError("cannot open '" + (dir / (stem + ".csv")).string() + "'");
        write_csv(gf, out);
        if (!out) throw IoError("failed while writing '" + stem + ".csv'");
        return;
    }
    nlohmann::json j{
        {"grid", {{"Nr", gf.grid().nr()}, {"Ntheta", gf.grid().ntheta()}}},
        {"values", gf.values()},
    };
    writeFile(dir / (stem + ".json"), j.dump(2) + "\n");
}

inline GridFunction loadInitialGuess(const std::string& spec_path, const Grid& grid,
                                     const std::string& stem) {
    const std::filesystem::path path = std::filesystem::path(spec_path) / (stem + ".csv");
    std::ifstream in(path);
    if (!in) throw IoError("initial guess: cannot open '" + path.string() + "'");
    return read_csv(in, grid);
}

}  // namespace cli_detail

inline int cmd_solve(const RunConfig& cfg, std::ostream& log = std::cerr) {
    namespace fs = std::filesystem;
    const ProblemSpec spec = cfg.problem();
    const Grid grid = spec.makeGrid();

    GridFunction u0 = GridFunction::zeros(grid);
    GridFunction v0 = GridFunction::zeros(grid);
    if (cfg.initial_guess != "zero") {
        u0 = cli_detail::loadInitialGuess(cfg.initial_guess, grid, "u");
        v0 = cli_detail::loadInitialGuess(cfg.initial_guess, grid, "v");
    }

    auto [sol, trace] = picard_solve(spec, u0, v0, cfg.tol, cfg.max_iter);
    if (sol.min_u_seen < 0.0)
        log << "warning: u dipped below zero during the iteration (most negative value "
            << sol.min_u_seen << "); it was clamped before evaluating the nonlinearities\n";

    // the box check applies to converged solutions only
    BoxReport box;
    if (sol.converged) box = check_solution_in_box(sol, cfg.box());

    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + cfg.out_dir + "'");
    const fs::path dir(cfg.out_dir);

    cli_detail::writeGridFunction(sol.u, dir, "u", cfg.format);
    cli_detail::writeGridFunction(sol.v, dir, "v", cfg.format);
    {
        std::ofstream out(dir / "trace.csv");
        if (!out) throw IoError("cannot open trace.csv for writing");
        trace.writeCsv(out);
        if (!out) throw IoError("failed while writing trace.csv");
    }

    nlohmann::json box_json;
    if (sol.converged)
        box_json = {{"pass", box.pass},
                    {"r1", cfg.r1}, {"R1", cfg.R1}, {"r2", cfg.r2}, {"R2", cfg.R2},
                    {"margin_u_lower", box.margin_u_lower},
                    {"margin_u_upper", box.margin_u_upper},
                    {"margin_v_lower", box.margin_v_lower},
                    {"margin_v_upper", box.margin_v_upper}};
    nlohmann::json summary{
        {"converged", sol.converged},
        {"iterations", sol.iterations},
        {"norm_u", norm_inf(sol.u)},
        {"norm_v", norm_inf(sol.v)},
        {"residual", sol.residual},
        {"min_u_seen", sol.min_u_seen},
        {"tol", cfg.tol},
        {"grid", {{"Nr", grid.nr()}, {"Ntheta", grid.ntheta()}}},
        {"box_check", box_json},
    };
    cli_detail::writeFile(dir / "summary.json", summary.dump(2) + "\n");

    if (!sol.converged) return kExitNoConvergence;
    return box.pass ? kExitOk : kExitBoxFail;
}

inline int cmd_certify(const RunConfig& cfg, int Ns = 33, std::ostream& log = std::cerr) {
    namespace fs = std::filesystem;
    if (!cfg.bounds)
        throw ConfigError("certify requires a [bounds] section in the config file");

    const ProblemSpec spec = cfg.problem();
    const Grid grid = spec.makeGrid();

    const NonnegativityReport fsign = check_nonnegativity(cfg.f, grid, cfg.R1, cfg.R2, Ns);
    if (fsign.violation)
        log << "warning: f samples negative (min " << fsign.min_value << " at x=("
            << fsign.witness.x1 << ", " << fsign.witness.x2 << "), u=" << fsign.witness.u
            << ", v=" << fsign.witness.v << "); the theory assumes f >= 0\n";

    const Certificate cert = verify_conditions(spec, cfg.box(), *cfg.bounds, Ns);

    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + cfg.out_dir + "'");
    cli_detail::writeFile(fs::path(cfg.out_dir) / "certificate.json", cert.toJson().dump(2) + "\n");

    return cert.allPass() ? kExitOk : kExitCertifyFail;
}

inline int cmd_oracle_run_cases(int seeds_per_axis, std::ostream& out) {
    const std::vector<CaseResult> results = verify_theorem_cases(seeds_per_axis);
    nlohmann::json arr = nlohmann::json::array();
    bool all_pass = true;
    for (const CaseResult& r : results) {
        nlohmann::json fps = nlohmann::json::array();
        for (const FixedPoint& fp : r.fixed_points)
            fps.push_back({{"u", fp.u}, {"v", fp.v}, {"sign", fp.sign}});
        arr.push_back({
            {"case", r.name},
            {"k", r.k},
            {"expected_index", r.expected_index},
            {"computed_index", r.computed_index},
            {"fixed_points", fps},
        });
        all_pass = all_pass && r.pass();
    }
    out << arr.dump(2) << "\n";
    return all_pass ? kExitOk : kExitCertifyFail;
}

}  // namespace diskfp

#endif  // DISKFP_CLI_HPP
