#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "diskfp/expr.hpp"
#include "diskfp/grid.hpp"

using namespace diskfp;

namespace {
constexpr double kPi = 3.14159265358979323846;

GridFunction randomField(const Grid& g, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> vals(g.size());
    for (double& x : vals) x = dist(rng);
    return GridFunction(g, std::move(vals));
}
}  // namespace

TEST_CASE("grid construction and node layout") {
    REQUIRE_THROWS_AS(Grid(3, 16), GridError);
    REQUIRE_THROWS_AS(Grid(8, 6), GridError);
    REQUIRE_THROWS_AS(Grid(8, 15), GridError);   // odd Ntheta

    Grid g(8, 16);
    REQUIRE(g.size() == 128);
    REQUIRE(g.radius(0) == Catch::Approx(1.0 / 16));
    // nodes strictly inside the open disk
    REQUIRE(g.radius(g.nr() - 1) == Catch::Approx(1.0 - 1.0 / 16));
    REQUIRE(g.radius(g.nr() - 1) < 1.0);
    REQUIRE(g.theta(0) == 0.0);
    REQUIRE(g.theta(15) < 2 * kPi);
}

TEST_CASE("sample evaluates expressions at the polar nodes") {
    Grid g(16, 32);
    const GridFunction one = sample(Expr::parse("1"), g);
    for (double x : one.values()) REQUIRE(x == 1.0);

    // polar identity x1^2 + x2^2 = r^2
    const GridFunction rsq = sample(Expr::parse("x1^2+x2^2"), g);
    for (int j = 0; j < g.nr(); ++j)
        for (int k = 0; k < g.ntheta(); ++k)
            REQUIRE(rsq.value(j, k) == Catch::Approx(g.radius(j) * g.radius(j)).margin(1e-15));

    // the shipped f along u = v = 0 reduces to 0.2 (1 + r^2 cos^2) * 3
    const Expr f = Expr::parse("0.2*(1+x1^2)*exp(u)*(2+cos(v))");
    const GridFunction z = GridFunction::zeros(g);
    const GridFunction fs = sample(f, g, &z, &z);
    for (int j = 0; j < g.nr(); ++j)
        for (int k = 0; k < g.ntheta(); ++k) {
            const double c = std::cos(g.theta(k));
            const double expect = 0.2 * (1 + g.radius(j) * g.radius(j) * c * c) * 3.0;
            REQUIRE(fs.value(j, k) == Catch::Approx(expect).epsilon(1e-14));
        }
}

TEST_CASE("sample rejects missing or mismatched grid functions") {
    Grid g(16, 32);
    Grid other(8, 32);
    const Expr f = Expr::parse("u+v");
    const GridFunction z = GridFunction::zeros(g);
    const GridFunction zo = GridFunction::zeros(other);
    REQUIRE_THROWS_AS(sample(f, g), GridError);
    REQUIRE_THROWS_AS(sample(f, g, &z), GridError);
    REQUIRE_THROWS_AS(sample(f, g, &zo, &z), GridError);
    // domain errors carry the node location
    try {
        sample(Expr::parse("ln(x1)"), g);
        FAIL("expected an evaluation error");
    } catch (const EvalError& e) {
        REQUIRE(std::string(e.what()).find("node") != std::string::npos);
    }
}

TEST_CASE("norm_inf") {
    Grid g(8, 16);
    REQUIRE(norm_inf(GridFunction::zeros(g)) == 0.0);

    std::vector<double> vals(g.size(), 0.0);
    vals[37] = -2.0;
    REQUIRE(norm_inf(GridFunction(g, vals)) == 2.0);

    // (1 - r^2)/4 peaks on the innermost ring at (1 - (h/2)^2)/4
    Grid g64(64, 128);
    const GridFunction w = sample(Expr::parse("0.25*(1-x1^2-x2^2)"), g64);
    const double h = g64.hr();
    REQUIRE(norm_inf(w) == Catch::Approx((1 - 0.25 * h * h) / 4).epsilon(1e-14));
    REQUIRE(norm_inf(w) < 0.25);
    REQUIRE(norm_inf(w) > 0.25 - 1e-4);
}

TEST_CASE("norm_inf is a norm on node arrays") {
    Grid g(8, 16);
    std::mt19937_64 rng(41);
    for (int it = 0; it < 25; ++it) {
        const GridFunction a = randomField(g, rng, -3.0, 3.0);
        const GridFunction b = randomField(g, rng, -3.0, 3.0);
        std::uniform_real_distribution<double> sc(-4.0, 4.0);
        const double alpha = sc(rng);

        std::vector<double> scaled(g.size()), sum(g.size());
        for (int i = 0; i < g.size(); ++i) {
            scaled[i] = alpha * a[i];
            sum[i] = a[i] + b[i];
        }
        REQUIRE(norm_inf(GridFunction(g, scaled)) == std::fabs(alpha) * norm_inf(a));
        REQUIRE(norm_inf(GridFunction(g, sum)) <= norm_inf(a) + norm_inf(b));
        REQUIRE(norm_inf(a) >= 0.0);
    }
}

TEST_CASE("integrate: midpoint quadrature on the disk") {
    Grid g(64, 128);
    REQUIRE(integrate(sample(Expr::parse("1"), g)) == Catch::Approx(kPi).margin(1e-12));
    // odd in theta
    REQUIRE(integrate(sample(Expr::parse("x2"), g)) == Catch::Approx(0.0).margin(1e-12));

    const double quarter = integrate(sample(Expr::parse("0.25*(1-x1^2-x2^2)"), g));
    REQUIRE(quarter == Catch::Approx(kPi / 8).margin(1e-4));

    Grid g32(32, 64);
    const double coarse = integrate(sample(Expr::parse("0.25*(1-x1^2-x2^2)"), g32));
    const double e64 = std::fabs(quarter - kPi / 8);
    const double e32 = std::fabs(coarse - kPi / 8);
    REQUIRE(e32 / e64 == Catch::Approx(4.0).epsilon(0.15));   // second order
}

TEST_CASE("integrate is linear") {
    Grid g(16, 32);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> sc(-2.0, 2.0);
    for (int it = 0; it < 20; ++it) {
        const GridFunction f = randomField(g, rng, -1.0, 1.0);
        const GridFunction h = randomField(g, rng, -1.0, 1.0);
        const double a = sc(rng), b = sc(rng);
        std::vector<double> combo(g.size());
        for (int i = 0; i < g.size(); ++i) combo[i] = a * f[i] + b * h[i];
        const double lhs = integrate(GridFunction(g, combo));
        const double rhs = a * integrate(f) + b * integrate(h);
        REQUIRE(lhs == Catch::Approx(rhs).margin(1e-12 * std::max(1.0, std::fabs(rhs))));
    }
}

TEST_CASE("greens_mass") {
    REQUIRE(greens_mass(0.0, 2) == 0.25);
    REQUIRE(greens_mass(1.0, 2) == 0.0);
    REQUIRE(greens_mass(1.0, 7) == 0.0);
    REQUIRE(greens_mass(0.0, 3) == Catch::Approx(1.0 / 6).epsilon(1e-15));
    REQUIRE_THROWS_AS(greens_mass(-0.1, 2), GridError);
    REQUIRE_THROWS_AS(greens_mass(1.1, 2), GridError);
    REQUIRE_THROWS_AS(greens_mass(0.5, 0), GridError);

    for (int n = 1; n <= 5; ++n) {
        double prev = greens_mass(0.0, n);
        REQUIRE(prev == Catch::Approx(0.5 / n));
        for (double x = 0.1; x <= 1.0; x += 0.1) {
            const double m = greens_mass(x, n);
            REQUIRE(m < prev);   // strictly decreasing in |x|
            prev = m;
        }
    }
}

TEST_CASE("grid function CSV round trip") {
    Grid g(8, 16);
    std::mt19937_64 rng(7);
    const GridFunction f = randomField(g, rng, -5.0, 5.0);

    std::ostringstream out;
    write_csv(f, out);
    const std::string text = out.str();
    REQUIRE(text.rfind("x,y,value\n", 0) == 0);

    std::istringstream in(text);
    const GridFunction back = read_csv(in, g);
    for (int i = 0; i < g.size(); ++i) REQUIRE(back[i] == f[i]);   // 17 digits are exact

    // wrong grid is rejected
    std::istringstream in2(text);
    Grid g2(8, 32);
    REQUIRE_THROWS_AS(read_csv(in2, g2), GridError);

    std::istringstream bad("no header\n");
    REQUIRE_THROWS_AS(read_csv(bad, g), GridError);
}

TEST_CASE("grid function rejects non-finite values and size mismatch") {
    Grid g(8, 16);
    std::vector<double> vals(g.size(), 0.0);
    vals[3] = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(GridFunction(g, vals), GridError);
    REQUIRE_THROWS_AS(GridFunction(g, std::vector<double>(5, 0.0)), GridError);
}
