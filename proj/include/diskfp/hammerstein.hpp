#ifndef DISKFP_HAMMERSTEIN_HPP
#define DISKFP_HAMMERSTEIN_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "diskfp/expr.hpp"
#include "diskfp/grid.hpp"
#include "diskfp/poisson.hpp"

namespace diskfp {

// The coupled system: -Delta u = f(x,u,v), -Delta v = g(x,u,v) on the
// unit disk with homogeneous Dirichlet data.  f is meant to be
// nonnegative (u is the cone component); g may change sign.
struct ProblemSpec {
    Expr f;
    Expr g;
    int grid_nr = 64;
    int grid_ntheta = 128;

    Grid makeGrid() const { return Grid(grid_nr, grid_ntheta); }
};

struct SolutionPair {
    GridFunction u;
    GridFunction v;
    double residual = 0.0;      // final relative change
    int iterations = 0;
    bool converged = false;
    double min_u_seen = 0.0;    // most negative raw u before clamping
};

struct TraceRow {
    int n;
    double norm_u;
    double norm_v;
    double rel_change_u;
    double rel_change_v;
    double seconds;
};

struct IterationTrace {
    std::vector<TraceRow> rows;

    // CSV schema "n,norm_u,norm_v,relchange_u,relchange_v,seconds"
    void writeCsv(std::ostream& out) const {
        out << "n,norm_u,norm_v,relchange_u,relchange_v,seconds\n";
        char buf[192];
        for (const TraceRow& r : rows) {
            std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.6f\n",
                          r.n, r.norm_u, r.norm_v, r.rel_change_u, r.rel_change_v, r.seconds);
            out << buf;
        }
    }
};

// The operator T = (T1, T2): T_i(u,v) is the Green's integral of the
// corresponding nonlinearity evaluated along (u, v).  Holds one
// factorized Laplacian, reused across applications.
class HammersteinOperator {
public:
    explicit HammersteinOperator(const ProblemSpec& spec)
        : grid_(spec.makeGrid()), lap_(LaplaceOperator::assemble(grid_)),
          f_(spec.f), g_(spec.g) {}

    const Grid& grid() const { return grid_; }
    const LaplaceOperator& laplacian() const { return lap_; }

    // u is clamped at 0 before evaluating the nonlinearities (their u
    // argument ranges over R_+; round-off can dip just below zero).
    std::pair<GridFunction, GridFunction> apply(const GridFunction& u,
                                                const GridFunction& v) const {
        if (u.grid() != grid_ || v.grid() != grid_)
            throw GridError("apply_T: iterate lives on a different grid");
        double min_u = 0.0;
        const GridFunction uc = clampNonnegative(u, &min_u);
        if (min_u < -kNegativeTol)
            throw std::invalid_argument(
                "apply_T: u has node values below -1e-10 (min " + std::to_string(min_u) + ")");
        GridFunction fu = sample(f_, grid_, &uc, &v);
        GridFunction gu = sample(g_, grid_, &uc, &v);
        return {lap_.solve(fu), lap_.solve(gu)};
    }

    static GridFunction clampNonnegative(const GridFunction& u, double* min_seen) {
        std::vector<double> vals(u.values());
        double m = 0.0;
        for (double& x : vals) {
            m = std::min(m, x);
            if (x < 0.0) x = 0.0;
        }
        if (min_seen) *min_seen = m;
        return GridFunction(u.grid(), std::move(vals));
    }

    static constexpr double kNegativeTol = 1e-10;

private:
    Grid grid_;
    LaplaceOperator lap_;
    Expr f_;
    Expr g_;
};

inline std::pair<GridFunction, GridFunction> apply_T(const ProblemSpec& spec,
                                                     const GridFunction& u,
                                                     const GridFunction& v) {
    return HammersteinOperator(spec).apply(u, v);
}

inline double relChange(const GridFunction& now, const GridFunction& before) {
    double diff = 0.0;
    for (int i = 0; i < now.size(); ++i)
        diff = std::max(diff, std::fabs(now[i] - before[i]));
    return diff / std::max(norm_inf(now), 1e-300);
}

// Picard iteration (u_n, v_n) = T(u_{n-1}, v_{n-1}) from (u0, v0).
// Stops when the larger of the two componentwise relative changes
// ||w_n - w_{n-1}||_inf / max(||w_n||_inf, 1e-300) drops to tol.  No
// convergence is guaranteed in general; after max_iter the pair is
// returned with converged = false.
inline std::pair<SolutionPair, IterationTrace> picard_solve(const ProblemSpec& spec,
                                                            const GridFunction& u0,
                                                            const GridFunction& v0,
                                                            double tol, int max_iter) {
    if (!(tol > 0.0)) throw std::invalid_argument("picard_solve: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("picard_solve: max_iter must be at least 1");
    for (double x : u0.values())
        if (x < 0.0) throw std::invalid_argument("picard_solve: u0 must be nonnegative");

    HammersteinOperator T(spec);
    if (u0.grid() != T.grid() || v0.grid() != T.grid())
        throw GridError("picard_solve: initial guess lives on a different grid");

    GridFunction u = u0;
    GridFunction v = v0;
    IterationTrace trace;
    double rel = 0.0;
    double min_u_seen = 0.0;
    bool converged = false;
    int n = 0;

    using Clock = std::chrono::steady_clock;
    while (n < max_iter) {
        const auto t0 = Clock::now();
        ++n;
        double min_u = 0.0;
        HammersteinOperator::clampNonnegative(u, &min_u);
        min_u_seen = std::min(min_u_seen, min_u);

        auto [un, vn] = T.apply(u, v);
        const double rel_u = relChange(un, u);
        const double rel_v = relChange(vn, v);
        u = std::move(un);
        v = std::move(vn);
        rel = std::max(rel_u, rel_v);
        const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        trace.rows.push_back({n, norm_inf(u), norm_inf(v), rel_u, rel_v, seconds});
        if (rel <= tol) {
            converged = true;
            break;
        }
    }

    SolutionPair sol{std::move(u), std::move(v), rel, n, converged, min_u_seen};
    return {std::move(sol), std::move(trace)};
}

struct InvarianceViolation {
    int sample;
    std::string kind;      // "u" or "v"
    double norm;           // offending ||T_i||_inf
    double bound;
};

struct InvarianceReport {
    int samples = 0;
    double worst_margin_u = 0.0;   // min over samples of R1 - ||T1||
    double worst_margin_v = 0.0;   // min over samples of R2 - ||T2||
    std::vector<InvarianceViolation> violations;

    bool pass() const { return violations.empty(); }
};

// Checks that T maps {0 <= u <= R1} x {|v| <= R2} into itself on a
// deterministic sample set: the box corners as constant fields first,
// then random Gaussian bumps scaled into the box.
inline InvarianceReport check_invariance(const ProblemSpec& spec, double R1, double R2,
                                         int samples, std::uint64_t seed = 20240817u) {
    if (!(R1 > 0.0) || !(R2 > 0.0))
        throw std::invalid_argument("check_invariance: radii must be positive");
    if (samples < 1) throw std::invalid_argument("check_invariance: need at least one sample");

    HammersteinOperator T(spec);
    const Grid& grid = T.grid();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto bump = [&](double amplitude) {
        const double rho = 0.8 * std::sqrt(unit(rng));
        const double phi = 2.0 * Grid::kPi * unit(rng);
        const double cx = rho * std::cos(phi);
        const double cy = rho * std::sin(phi);
        const double width = 0.15 + 0.45 * unit(rng);
        std::vector<double> vals(grid.size());
        double peak = 0.0;
        for (int j = 0; j < grid.nr(); ++j)
            for (int k = 0; k < grid.ntheta(); ++k) {
                const double dx = grid.x1(j, k) - cx;
                const double dy = grid.x2(j, k) - cy;
                const double b = std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
                vals[grid.index(j, k)] = b;
                peak = std::max(peak, b);
            }
        for (double& x : vals) x *= amplitude / peak;
        return GridFunction(grid, std::move(vals));
    };

    std::vector<std::pair<GridFunction, GridFunction>> inputs;
    const double corner[][2] = {{0.0, 0.0}, {R1, 0.0},  {R1, R2},
                                {R1, -R2},  {0.0, R2},  {0.0, -R2}};
    for (const auto& c : corner) {
        if (static_cast<int>(inputs.size()) >= samples) break;
        inputs.emplace_back(GridFunction::constant(grid, c[0]),
                            GridFunction::constant(grid, c[1]));
    }
    while (static_cast<int>(inputs.size()) < samples) {
        GridFunction us = bump(unit(rng) * R1);
        const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
        GridFunction vs = bump(sign * unit(rng) * R2);
        inputs.emplace_back(std::move(us), std::move(vs));
    }

    InvarianceReport report;
    report.samples = samples;
    report.worst_margin_u = R1;
    report.worst_margin_v = R2;
    for (int i = 0; i < samples; ++i) {
        auto [t1, t2] = T.apply(inputs[i].first, inputs[i].second);
        const double n1 = norm_inf(t1);
        const double n2 = norm_inf(t2);
        report.worst_margin_u = std::min(report.worst_margin_u, R1 - n1);
        report.worst_margin_v = std::min(report.worst_margin_v, R2 - n2);
        if (n1 > R1) report.violations.push_back({i, "u", n1, R1});
        if (n2 > R2) report.violations.push_back({i, "v", n2, R2});
    }
    return report;
}

}  // namespace diskfp

#endif  // DISKFP_HAMMERSTEIN_HPP
