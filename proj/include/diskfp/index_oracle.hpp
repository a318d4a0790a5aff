#ifndef DISKFP_INDEX_ORACLE_HPP
#define DISKFP_INDEX_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "diskfp/expr.hpp"

/*
 * Finite-dimensional verification of the (-1)^k fixed-point-index
 * formula on products of conical shells in R_+ x R_+, by brute-force
 * signed fixed-point counting: every fixed point is located by damped
 * Newton iteration from a grid of seeds, and the index is the sum of
 * sign det(I - DT) over the nondegenerate fixed points found.
 */

namespace diskfp {

class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One-dimensional model of a conical shell: {t in R_+ : r <= t <= R}.
struct ConicalShell {
    double r, R;

    ConicalShell(double r_, double R_) : r(r_), R(R_) {
        if (!(r > 0.0 && r < R))
            throw std::invalid_argument("conical shell: need 0 < r < R");
    }
};

// Per-component boundary behaviour.  With the direction element h = 1,
// the conditions of the index theorem reduce on each component to:
//   mode A:  T(u) > r at the inner sphere and T(u) < R at the outer one;
//   mode B:  T(u) < r at the inner sphere and T(u) > R at the outer one.
enum class BoundaryMode { A, B };

struct MapUnderTest {
    Expr t1, t2;
    ConicalShell shell1, shell2;
    BoundaryMode mode1, mode2;

    MapUnderTest(Expr t1_, Expr t2_, ConicalShell s1, ConicalShell s2,
                 BoundaryMode m1, BoundaryMode m2)
        : t1(std::move(t1_)), t2(std::move(t2_)), shell1(s1), shell2(s2),
          mode1(m1), mode2(m2) {
        for (const Expr* e : {&t1, &t2})
            if (e->uses(Var::X1) || e->uses(Var::X2))
                throw std::invalid_argument("map under test: components are expressions in u, v only");
    }

    double T1(double u, double v) const { return t1.eval(0.0, 0.0, u, v); }
    double T2(double u, double v) const { return t2.eval(0.0, 0.0, u, v); }

    int modeACount() const {
        return (mode1 == BoundaryMode::A ? 1 : 0) + (mode2 == BoundaryMode::A ? 1 : 0);
    }
};

struct BoundarySide {
    double margin;      // positive means the declared mode holds there
    double worst_at;    // opposite coordinate where the margin is attained
};

struct BoundaryReport {
    BoundarySide inner1, outer1, inner2, outer2;
    double min_component = 0.0;   // min of T1, T2 over the sampled product shell
    bool wedge_valued = false;    // component maps stay nonnegative
    bool pass = false;
};

// Samples each shell boundary against the opposite coordinate and
// reports the worst margin of the declared mode inequality, plus a
// product-shell sweep checking that the map stays wedge-valued.
inline BoundaryReport check_boundary_conditions(const MapUnderTest& m, int Ns = 33) {
    if (Ns < 9) throw std::invalid_argument("check_boundary_conditions: Ns must be at least 9");

    auto scan = [&](bool first_component, bool inner) {
        const ConicalShell& own = first_component ? m.shell1 : m.shell2;
        const ConicalShell& opp = first_component ? m.shell2 : m.shell1;
        const BoundaryMode mode = first_component ? m.mode1 : m.mode2;
        const double at = inner ? own.r : own.R;
        BoundarySide side{std::numeric_limits<double>::infinity(), opp.r};
        for (int i = 0; i < Ns; ++i) {
            const double o = opp.r + i * (opp.R - opp.r) / (Ns - 1);
            const double value = first_component ? m.T1(at, o) : m.T2(o, at);
            // A: push inward off both spheres; B: push outward.
            double margin;
            if (mode == BoundaryMode::A)
                margin = inner ? value - at : at - value;
            else
                margin = inner ? at - value : value - at;
            if (margin < side.margin) {
                side.margin = margin;
                side.worst_at = o;
            }
        }
        return side;
    };

    BoundaryReport rep;
    rep.inner1 = scan(true, true);
    rep.outer1 = scan(true, false);
    rep.inner2 = scan(false, true);
    rep.outer2 = scan(false, false);

    rep.min_component = std::numeric_limits<double>::infinity();
    for (int i = 0; i < Ns; ++i)
        for (int j = 0; j < Ns; ++j) {
            const double u = m.shell1.r + i * (m.shell1.R - m.shell1.r) / (Ns - 1);
            const double v = m.shell2.r + j * (m.shell2.R - m.shell2.r) / (Ns - 1);
            rep.min_component = std::min({rep.min_component, m.T1(u, v), m.T2(u, v)});
        }
    rep.wedge_valued = rep.min_component >= 0.0;

    rep.pass = rep.wedge_valued && rep.inner1.margin > 0.0 && rep.outer1.margin > 0.0 &&
               rep.inner2.margin > 0.0 && rep.outer2.margin > 0.0;
    return rep;
}

struct FixedPoint {
    double u, v;
    double det;     // det(I - DT)
    int sign;
};

namespace oracle_detail {

struct Vec2 {
    double u, v;
};

inline double normInf(double a, double b) { return std::max(std::fabs(a), std::fabs(b)); }

inline Vec2 residual(const MapUnderTest& m, double u, double v) {
    return {m.T1(u, v) - u, m.T2(u, v) - v};
}

// central-difference Jacobian of T
inline void jacobian(const MapUnderTest& m, double u, double v, double J[2][2]) {
    constexpr double step = 1e-6;
    J[0][0] = (m.T1(u + step, v) - m.T1(u - step, v)) / (2 * step);
    J[0][1] = (m.T1(u, v + step) - m.T1(u, v - step)) / (2 * step);
    J[1][0] = (m.T2(u + step, v) - m.T2(u - step, v)) / (2 * step);
    J[1][1] = (m.T2(u, v + step) - m.T2(u, v - step)) / (2 * step);
}

// Damped Newton on F(z) = T(z) - z; returns true when ||F||_inf <= tol.
inline bool newton(const MapUnderTest& m, double& u, double& v) {
    constexpr double tol = 1e-12;
    constexpr int max_iters = 100;
    constexpr int max_halvings = 40;
    for (int it = 0; it < max_iters; ++it) {
        const Vec2 F = residual(m, u, v);
        const double fn = normInf(F.u, F.v);
        if (fn <= tol) return true;
        double J[2][2];
        jacobian(m, u, v, J);
        // solve (J - I) delta = -F
        const double a = J[0][0] - 1.0, b = J[0][1];
        const double c = J[1][0], d = J[1][1] - 1.0;
        const double det = a * d - b * c;
        if (std::fabs(det) < 1e-14) return false;
        const double du = (-F.u * d + F.v * b) / det;
        const double dv = (-a * F.v + c * F.u) / det;
        double lambda = 1.0;
        int halvings = 0;
        while (halvings < max_halvings) {
            const Vec2 Fn = residual(m, u + lambda * du, v + lambda * dv);
            if (normInf(Fn.u, Fn.v) < fn) break;
            lambda *= 0.5;
            ++halvings;
        }
        if (halvings == max_halvings) return false;
        u += lambda * du;
        v += lambda * dv;
    }
    return normInf(residual(m, u, v).u, residual(m, u, v).v) <= tol;
}

}  // namespace oracle_detail

// Locates the fixed points of T in the open product shell by multistart
// damped Newton, deduplicating within 1e-8.  Errors on a degenerate
// fixed point (|det(I - DT)| < 1e-8) and when a seed cell shows a sign
// change in both residual components but no fixed point was found near
// it (the honest "I could not count" outcome).
inline std::vector<FixedPoint> locate_fixed_points(const MapUnderTest& m, int seeds_per_axis = 12) {
    using namespace oracle_detail;
    if (seeds_per_axis < 2)
        throw std::invalid_argument("locate_fixed_points: need at least 2 seeds per axis");

    const ConicalShell& s1 = m.shell1;
    const ConicalShell& s2 = m.shell2;
    auto seed_u = [&](int i) { return s1.r + (i + 0.5) * (s1.R - s1.r) / seeds_per_axis; };
    auto seed_v = [&](int i) { return s2.r + (i + 0.5) * (s2.R - s2.r) / seeds_per_axis; };

    std::vector<Vec2> found;
    auto record = [&](double u, double v) {
        if (!(u > s1.r && u < s1.R && v > s2.r && v < s2.R)) return;
        for (const Vec2& p : found)
            if (normInf(p.u - u, p.v - v) <= 1e-8) return;
        found.push_back({u, v});
    };

    for (int i = 0; i < seeds_per_axis; ++i)
        for (int j = 0; j < seeds_per_axis; ++j) {
            double u = seed_u(i), v = seed_v(j);
            if (newton(m, u, v)) record(u, v);
        }

    // sign-change sweep between neighbouring seeds: a cell whose corners
    // flip the sign of both residual components should own a fixed point
    for (int i = 0; i + 1 < seeds_per_axis; ++i)
        for (int j = 0; j + 1 < seeds_per_axis; ++j) {
            const double u0 = seed_u(i), u1 = seed_u(i + 1);
            const double v0 = seed_v(j), v1 = seed_v(j + 1);
            const Vec2 F00 = residual(m, u0, v0), F01 = residual(m, u0, v1);
            const Vec2 F10 = residual(m, u1, v0), F11 = residual(m, u1, v1);
            auto flips = [](double f00, double f01, double f10, double f11) {
                const double lo = std::min(std::min(f00, f01), std::min(f10, f11));
                const double hi = std::max(std::max(f00, f01), std::max(f10, f11));
                return lo < 0.0 && hi > 0.0;
            };
            if (!flips(F00.u, F01.u, F10.u, F11.u) || !flips(F00.v, F01.v, F10.v, F11.v))
                continue;
            const double du = u1 - u0, dv = v1 - v0;
            bool covered = false;
            for (const Vec2& p : found)
                covered = covered || (p.u >= u0 - du && p.u <= u1 + du &&
                                      p.v >= v0 - dv && p.v <= v1 + dv);
            if (covered) continue;
            // try harder from the suspicious cell before giving up
            const double extra[5][2] = {{u0, v0}, {u0, v1}, {u1, v0}, {u1, v1},
                                        {0.5 * (u0 + u1), 0.5 * (v0 + v1)}};
            for (const auto& e : extra) {
                double u = e[0], v = e[1];
                if (newton(m, u, v)) record(u, v);
            }
            for (const Vec2& p : found)
                covered = covered || (p.u >= u0 - du && p.u <= u1 + du &&
                                      p.v >= v0 - dv && p.v <= v1 + dv);
            if (!covered) {
                std::ostringstream msg;
                msg << "brouwer_index: Newton failed near a sign-change cell around ("
                    << 0.5 * (u0 + u1) << ", " << 0.5 * (v0 + v1) << ")";
                throw OracleError(msg.str());
            }
        }

    std::sort(found.begin(), found.end(), [](const Vec2& a, const Vec2& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });

    std::vector<FixedPoint> out;
    for (const Vec2& p : found) {
        double J[2][2];
        jacobian(m, p.u, p.v, J);
        const double det = (1.0 - J[0][0]) * (1.0 - J[1][1]) - J[0][1] * J[1][0];
        if (std::fabs(det) < 1e-8) {
            std::ostringstream msg;
            msg << "brouwer_index: degenerate fixed point at (" << p.u << ", " << p.v
                << "), |det(I - DT)| = " << std::fabs(det);
            throw OracleError(msg.str());
        }
        out.push_back({p.u, p.v, det, det > 0.0 ? 1 : -1});
    }
    return out;
}

// Sum of sign det(I - DT) over the fixed points in the open product
// shell; in the theorem's setting the value is (-1)^k.
inline int brouwer_index(const MapUnderTest& m, int seeds_per_axis = 12) {
    int index = 0;
    for (const FixedPoint& fp : locate_fixed_points(m, seeds_per_axis)) index += fp.sign;
    return index;
}

struct CaseResult {
    std::string name;
    int k = 0;
    int expected_index = 0;
    int computed_index = 0;
    std::vector<FixedPoint> fixed_points;
    bool boundary_pass = false;

    bool pass() const {
        return boundary_pass && computed_index == expected_index && !fixed_points.empty();
    }
};

// The four shipped case families, one per combination of boundary modes.
inline std::vector<MapUnderTest> theorem_case_maps() {
    std::vector<MapUnderTest> maps;
    maps.emplace_back(Expr::parse("0.3"), Expr::parse("0.8"),
                      ConicalShell(0.1, 1.0), ConicalShell(0.5, 1.5),
                      BoundaryMode::A, BoundaryMode::A);
    maps.emplace_back(Expr::parse("0.3"), Expr::parse("v^2"),
                      ConicalShell(0.1, 1.0), ConicalShell(0.5, 1.5),
                      BoundaryMode::A, BoundaryMode::B);
    maps.emplace_back(Expr::parse("u^2"), Expr::parse("0.8"),
                      ConicalShell(0.5, 1.5), ConicalShell(0.5, 1.5),
                      BoundaryMode::B, BoundaryMode::A);
    maps.emplace_back(Expr::parse("u^2"), Expr::parse("v^2"),
                      ConicalShell(0.5, 1.5), ConicalShell(0.5, 1.5),
                      BoundaryMode::B, BoundaryMode::B);
    return maps;
}

// Runs every case family, asserting index = (-1)^k where k counts the
// components in mode A, and that at least one fixed point lies in the
// open product shell.
inline std::vector<CaseResult> verify_theorem_cases(int seeds_per_axis = 12) {
    static const char* names[] = {"(a,a)", "(a,b)", "(b,a)", "(b,b)"};
    std::vector<CaseResult> results;
    int idx = 0;
    for (const MapUnderTest& m : theorem_case_maps()) {
        CaseResult r;
        r.name = names[idx++];
        r.k = m.modeACount();
        r.expected_index = (r.k % 2 == 0) ? 1 : -1;
        r.boundary_pass = check_boundary_conditions(m).pass;
        r.fixed_points = locate_fixed_points(m, seeds_per_axis);
        r.computed_index = 0;
        for (const FixedPoint& fp : r.fixed_points) r.computed_index += fp.sign;
        results.push_back(std::move(r));
    }
    return results;
}

// The retraction of the closed cone ball [0, R1] onto the shell
// [r1, R1]: identity on the shell, and below the inner sphere
//   rho1(v) = r1 * (v + (r1 - v)^2 h1) / |v + (r1 - v)^2 h1|,
// which lands exactly on the inner sphere.
inline double retract_rho1(double v, double r1, double R1, double h1 = 1.0) {
    if (!(r1 > 0.0 && r1 < R1))
        throw std::invalid_argument("retract_rho1: need 0 < r1 < R1");
    if (!(h1 > 0.0 && std::fabs(h1) == 1.0))
        throw std::invalid_argument("retract_rho1: h1 must be the positive unit");
    if (!(v >= 0.0 && v <= R1))
        throw std::invalid_argument("retract_rho1: v must lie in [0, R1]");
    if (v >= r1) return v;
    const double num = v + (r1 - v) * (r1 - v) * h1;
    if (!(std::fabs(num) > 0.0))
        throw OracleError("retract_rho1: zero denominator (cannot occur for h1 = 1, 0 <= v < r1)");
    return r1 * (num / std::fabs(num));   // normalize first so the sphere radius is exact
}

}  // namespace diskfp

#endif  // DISKFP_INDEX_ORACLE_HPP
