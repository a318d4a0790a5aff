#ifndef DISKFP_CERTIFY_HPP
#define DISKFP_CERTIFY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "diskfp/expr.hpp"
#include "diskfp/grid.hpp"
#include "diskfp/hammerstein.hpp"
#include "diskfp/poisson.hpp"

namespace diskfp {

// Radii of the localization box: the cone component is sought with
// r1 < ||u|| < R1, the annular component with r2 < ||v|| < R2.
struct LocalizationBox {
    double r1, R1, r2, R2;

    LocalizationBox(double r1_, double R1_, double r2_, double R2_)
        : r1(r1_), R1(R1_), r2(r2_), R2(R2_) {
        if (!(r1 > 0.0 && r1 < R1)) throw std::invalid_argument("localization: need 0 < r1 < R1");
        if (!(r2 > 0.0 && r2 < R2)) throw std::invalid_argument("localization: need 0 < r2 < R2");
    }
};

// Bound functions over the disk only (variables x1, x2); all four must
// sample nonnegative.
struct BoundSet {
    Expr f_upper, f_lower, g_upper, g_lower;

    BoundSet(Expr fu, Expr fl, Expr gu, Expr gl)
        : f_upper(std::move(fu)), f_lower(std::move(fl)),
          g_upper(std::move(gu)), g_lower(std::move(gl)) {
        for (const Expr* e : {&f_upper, &f_lower, &g_upper, &g_lower})
            if (e->usesU() || e->usesV())
                throw std::invalid_argument("bounds: bound functions may reference x1, x2 only");
    }
};

struct Witness {
    double x1 = 0.0, x2 = 0.0, u = 0.0, v = 0.0;
};

struct PointwiseCheck {
    double margin = 0.0;
    Witness witness;
};

struct ConditionResult {
    std::string label;
    std::vector<PointwiseCheck> clauses;   // one clause for a/b/c, two for d
    double pointwise_margin = 0.0;         // min over clauses
    Witness witness;                       // of the binding clause
    double integral_value = 0.0;
    double radius = 0.0;
    double integral_margin = 0.0;          // signed, positive means satisfied
    std::optional<double> closed_form;     // c/(2n) for constant bounds
    bool pointwise_pass = false;
    bool integral_pass = false;

    bool pass() const { return pointwise_pass && integral_pass; }
};

struct Certificate {
    ConditionResult a, b, c, d;
    int Ns = 0;
    int grid_nr = 0;
    int grid_ntheta = 0;

    bool allPass() const { return a.pass() && b.pass() && c.pass() && d.pass(); }

    nlohmann::json toJson() const {
        auto cond = [](const ConditionResult& r) {
            nlohmann::json j{
                {"status", r.pass() ? "pass" : "fail"},
                {"pointwise_margin", r.pointwise_margin},
                {"witness", {{"x1", r.witness.x1}, {"x2", r.witness.x2},
                             {"u", r.witness.u}, {"v", r.witness.v}}},
                {"integral_value", r.integral_value},
                {"radius", r.radius},
                {"integral_margin", r.integral_margin},
            };
            if (r.closed_form) j["closed_form"] = *r.closed_form;
            if (r.clauses.size() > 1) {
                nlohmann::json cl = nlohmann::json::array();
                for (const PointwiseCheck& p : r.clauses)
                    cl.push_back({{"pointwise_margin", p.margin},
                                  {"witness", {{"x1", p.witness.x1}, {"x2", p.witness.x2},
                                               {"u", p.witness.u}, {"v", p.witness.v}}}});
                j["clauses"] = cl;
            }
            return j;
        };
        return nlohmann::json{
            {"conditions",
             {{"a", cond(a)}, {"b", cond(b)}, {"c", cond(c)}, {"d", cond(d)}}},
            {"Ns", Ns},
            {"grid", {{"Nr", grid_nr}, {"Ntheta", grid_ntheta}}},
        };
    }
};

namespace detail {

// Ns uniform midpoint samples of [lo, hi]; keeps every sample strictly
// inside the interval, mirroring the staggered spatial grid, so margins
// at bounds that are exactly attained on the closure stay sign-definite.
inline std::vector<double> midpointSamples(double lo, double hi, int ns) {
    std::vector<double> out(ns);
    const double step = (hi - lo) / ns;
    for (int i = 0; i < ns; ++i) out[i] = lo + (i + 0.5) * step;
    return out;
}

// Minimum of margin(expr_value, bound_value) over all grid nodes and all
// (u, v) sample pairs; the u loop is split across threads, merged in
// index order so the result is schedule-independent.
template <typename MarginFn>
PointwiseCheck scanPointwise(const Expr& h, const Grid& grid,
                             const std::vector<double>& bound_vals,
                             const std::vector<double>& us, const std::vector<double>& vs,
                             MarginFn margin_of) {
    const int n = grid.size();
    std::vector<double> xs1(n), xs2(n);
    for (int j = 0; j < grid.nr(); ++j)
        for (int k = 0; k < grid.ntheta(); ++k) {
            xs1[grid.index(j, k)] = grid.x1(j, k);
            xs2[grid.index(j, k)] = grid.x2(j, k);
        }

    struct Local {
        double margin = std::numeric_limits<double>::infinity();
        Witness witness;
        std::string error;
        Witness error_at;
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int nthreads = static_cast<int>(std::min<std::size_t>(hw, us.size()));
    std::vector<Local> locals(nthreads);

    auto work = [&](int t) {
        Local& loc = locals[t];
        for (std::size_t iu = t; iu < us.size(); iu += nthreads) {
            const double u = us[iu];
            for (double v : vs) {
                for (int i = 0; i < n; ++i) {
                    double value;
                    try {
                        value = h.eval(xs1[i], xs2[i], u, v);
                    } catch (const EvalError& err) {
                        if (loc.error.empty()) {
                            loc.error = err.what();
                            loc.error_at = {xs1[i], xs2[i], u, v};
                        }
                        return;
                    }
                    const double m = margin_of(value, bound_vals[i]);
                    if (m < loc.margin) {
                        loc.margin = m;
                        loc.witness = {xs1[i], xs2[i], u, v};
                    }
                }
            }
        }
    };

    if (nthreads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }

    PointwiseCheck result;
    result.margin = std::numeric_limits<double>::infinity();
    for (const Local& loc : locals) {
        if (!loc.error.empty())
            throw EvalError(loc.error + " at witness x=(" + std::to_string(loc.error_at.x1) +
                            ", " + std::to_string(loc.error_at.x2) + "), u=" +
                            std::to_string(loc.error_at.u) + ", v=" + std::to_string(loc.error_at.v));
        if (loc.margin < result.margin) {
            result.margin = loc.margin;
            result.witness = loc.witness;
        }
    }
    return result;
}

inline GridFunction sampleBound(const Expr& bound, const Grid& grid, const char* name) {
    GridFunction gf = sample(bound, grid);
    for (double x : gf.values())
        if (x < 0.0)
            throw std::invalid_argument(std::string("bounds: ") + name +
                                        " samples negative on the grid");
    return gf;
}

}  // namespace detail

// Numerically checks the four localization hypotheses:
//   a) f <= f_upper on disk x [0,R1] x [-R2,R2] and sup int k f_upper < R1
//   b) f >= f_lower on disk x [0,r1] x [-R2,R2] and sup int k f_lower > r1
//   c) |g| <= g_upper on disk x [0,R1] x [-R2,R2] and sup int k g_upper < R2
//   d) g >= 0 on disk x [0,R1] x [-r2,r2], g >= g_lower on disk x [0,R1] x [0,r2],
//      and sup int k g_lower > r2
// Every inequality is checked strictly; a zero margin is a failure.  The
// certificate is sampled evidence, not a proof.
inline Certificate verify_conditions(const ProblemSpec& spec, const LocalizationBox& box,
                                     const BoundSet& bounds, int Ns = 33) {
    if (Ns < 9) throw std::invalid_argument("verify_conditions: Ns must be at least 9");

    const Grid grid = spec.makeGrid();
    const LaplaceOperator lap = LaplaceOperator::assemble(grid);

    const GridFunction fbar = detail::sampleBound(bounds.f_upper, grid, "f_upper");
    const GridFunction flow = detail::sampleBound(bounds.f_lower, grid, "f_lower");
    const GridFunction gbar = detail::sampleBound(bounds.g_upper, grid, "g_upper");
    const GridFunction glow = detail::sampleBound(bounds.g_lower, grid, "g_lower");

    auto integralOf = [&](const Expr& bound, const GridFunction& gf) {
        const double value = norm_inf(greens_apply(lap, gf));
        std::optional<double> closed;
        if (bound.isConstant()) {
            const double c = bound.eval(0.0, 0.0);
            closed = c * greens_mass(0.0, 2);
            if (std::fabs(value - *closed) > 1e-6 * std::max(1.0, std::fabs(*closed)))
                throw SolverError("verify_conditions: constant-bound solve disagrees with the "
                                  "closed form beyond 1e-6");
        }
        return std::make_pair(value, closed);
    };

    const auto us_R1 = detail::midpointSamples(0.0, box.R1, Ns);
    const auto us_r1 = detail::midpointSamples(0.0, box.r1, Ns);
    const auto vs_R2 = detail::midpointSamples(-box.R2, box.R2, Ns);
    const auto vs_r2 = detail::midpointSamples(-box.r2, box.r2, Ns);
    const auto vs_r2p = detail::midpointSamples(0.0, box.r2, Ns);

    Certificate cert;
    cert.Ns = Ns;
    cert.grid_nr = grid.nr();
    cert.grid_ntheta = grid.ntheta();

    auto finish = [](ConditionResult& r, std::vector<PointwiseCheck> clauses, double value,
                     std::optional<double> closed, double radius, bool upper) {
        r.clauses = std::move(clauses);
        r.pointwise_margin = r.clauses.front().margin;
        r.witness = r.clauses.front().witness;
        for (const PointwiseCheck& p : r.clauses)
            if (p.margin < r.pointwise_margin) {
                r.pointwise_margin = p.margin;
                r.witness = p.witness;
            }
        r.integral_value = value;
        r.closed_form = closed;
        r.radius = radius;
        r.integral_margin = upper ? radius - value : value - radius;
        r.pointwise_pass = r.pointwise_margin > 0.0;
        r.integral_pass = r.integral_margin > 0.0;
    };

    {
        auto pw = detail::scanPointwise(spec.f, grid, fbar.values(), us_R1, vs_R2,
                                        [](double f, double b) { return b - f; });
        auto [value, closed] = integralOf(bounds.f_upper, fbar);
        cert.a.label = "a";
        finish(cert.a, {pw}, value, closed, box.R1, /*upper=*/true);
    }
    {
        auto pw = detail::scanPointwise(spec.f, grid, flow.values(), us_r1, vs_R2,
                                        [](double f, double b) { return f - b; });
        auto [value, closed] = integralOf(bounds.f_lower, flow);
        cert.b.label = "b";
        finish(cert.b, {pw}, value, closed, box.r1, /*upper=*/false);
    }
    {
        auto pw = detail::scanPointwise(spec.g, grid, gbar.values(), us_R1, vs_R2,
                                        [](double g, double b) { return b - std::fabs(g); });
        auto [value, closed] = integralOf(bounds.g_upper, gbar);
        cert.c.label = "c";
        finish(cert.c, {pw}, value, closed, box.R2, /*upper=*/true);
    }
    {
        auto pw1 = detail::scanPointwise(spec.g, grid, glow.values(), us_R1, vs_r2,
                                         [](double g, double) { return g; });
        auto pw2 = detail::scanPointwise(spec.g, grid, glow.values(), us_R1, vs_r2p,
                                         [](double g, double b) { return g - b; });
        auto [value, closed] = integralOf(bounds.g_lower, glow);
        cert.d.label = "d";
        finish(cert.d, {pw1, pw2}, value, closed, box.r2, /*upper=*/false);
    }
    return cert;
}

struct BoxReport {
    double norm_u = 0.0, norm_v = 0.0;
    double margin_u_lower = 0.0;   // ||u|| - r1
    double margin_u_upper = 0.0;   // R1 - ||u||
    double margin_v_lower = 0.0;   // ||v|| - r2
    double margin_v_upper = 0.0;   // R2 - ||v||
    bool pass = false;
};

// Strict norm-box membership r1 < ||u|| < R1, r2 < ||v|| < R2 of a
// computed solution; ties fail.
inline BoxReport check_solution_in_box(const SolutionPair& sol, const LocalizationBox& box) {
    BoxReport rep;
    rep.norm_u = norm_inf(sol.u);
    rep.norm_v = norm_inf(sol.v);
    rep.margin_u_lower = rep.norm_u - box.r1;
    rep.margin_u_upper = box.R1 - rep.norm_u;
    rep.margin_v_lower = rep.norm_v - box.r2;
    rep.margin_v_upper = box.R2 - rep.norm_v;
    rep.pass = rep.margin_u_lower > 0.0 && rep.margin_u_upper > 0.0 &&
               rep.margin_v_lower > 0.0 && rep.margin_v_upper > 0.0;
    return rep;
}

struct NonnegativityReport {
    double min_value = 0.0;
    Witness witness;
    bool violation = false;   // min_value < 0; reported, not thrown
};

// Samples an expression over disk x [0,R1] x [-R2,R2] and reports the
// minimum.  The nonnegativity of f is a standing hypothesis of the
// theory, but a violation here is a warning, not an error.
inline NonnegativityReport check_nonnegativity(const Expr& expr, const Grid& grid,
                                               double R1, double R2, int Ns = 33) {
    const GridFunction zeros = GridFunction::zeros(grid);
    auto pw = detail::scanPointwise(expr, grid, zeros.values(),
                                    detail::midpointSamples(0.0, R1, Ns),
                                    detail::midpointSamples(-R2, R2, Ns),
                                    [](double value, double) { return value; });
    NonnegativityReport rep;
    rep.min_value = pw.margin;
    rep.witness = pw.witness;
    rep.violation = pw.margin < 0.0;
    return rep;
}

}  // namespace diskfp

#endif  // DISKFP_CERTIFY_HPP
