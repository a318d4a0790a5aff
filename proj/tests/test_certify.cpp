#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "diskfp/certify.hpp"
#include "diskfp/expr.hpp"
#include "diskfp/grid.hpp"
#include "diskfp/hammerstein.hpp"

using namespace diskfp;

namespace {

ProblemSpec exampleProblem(int nr = 64, int nt = 128) {
    return ProblemSpec{Expr::parse("0.2*(1+x1^2)*exp(u)*(2+cos(v))"),
                       Expr::parse("0.75*(1+x1^2)*(1-v^2)*(2+sin(u))"), nr, nt};
}

BoundSet exampleBounds() {
    return BoundSet(Expr::parse("6*sqrt(e)/5"), Expr::parse("1/5"),
                    Expr::parse("45/8"), Expr::parse("35/24"));
}

LocalizationBox exampleBox() { return LocalizationBox(1.0 / 21, 0.5, 1.0 / 6, 1.5); }

}  // namespace

TEST_CASE("type validation") {
    REQUIRE_THROWS_AS(LocalizationBox(0.5, 0.5, 0.1, 0.2), std::invalid_argument);
    REQUIRE_THROWS_AS(LocalizationBox(0.0, 0.5, 0.1, 0.2), std::invalid_argument);
    REQUIRE_THROWS_AS(LocalizationBox(0.1, 0.5, 0.3, 0.2), std::invalid_argument);
    REQUIRE_THROWS_AS(BoundSet(Expr::parse("u"), Expr::parse("0"), Expr::parse("0"),
                               Expr::parse("0")),
                      std::invalid_argument);
    // bounds sampling negative are rejected inside verify_conditions
    const BoundSet negative(Expr::parse("x1"), Expr::parse("0"), Expr::parse("1"),
                            Expr::parse("1"));
    REQUIRE_THROWS_AS(verify_conditions(exampleProblem(16, 32), exampleBox(), negative, 9),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(verify_conditions(exampleProblem(16, 32), exampleBox(), exampleBounds(), 8),
                      std::invalid_argument);
}

TEST_CASE("the worked example passes all four conditions") {
    const Certificate cert =
        verify_conditions(exampleProblem(), exampleBox(), exampleBounds(), 33);
    REQUIRE(cert.allPass());

    // integral values: constant bounds divided by four, frozen
    REQUIRE(cert.a.integral_value ==
            Catch::Approx(6.0 * std::sqrt(std::exp(1.0)) / 20.0).margin(1e-9));
    REQUIRE(cert.b.integral_value == Catch::Approx(0.05).margin(1e-9));
    REQUIRE(cert.c.integral_value == Catch::Approx(45.0 / 32.0).margin(1e-9));
    REQUIRE(cert.d.integral_value == Catch::Approx(35.0 / 96.0).margin(1e-9));

    // against the documented tuple, 1e-3 tolerance
    REQUIRE(cert.a.integral_value == Catch::Approx(0.494623).margin(1e-3));
    REQUIRE(cert.b.integral_value == Catch::Approx(0.05).margin(1e-3));
    REQUIRE(cert.c.integral_value == Catch::Approx(1.40625).margin(1e-3));
    REQUIRE(cert.d.integral_value == Catch::Approx(0.364583).margin(1e-3));

    // closed-form cross checks exist for the constant bounds
    REQUIRE(cert.a.closed_form.has_value());
    REQUIRE(*cert.a.closed_form == Catch::Approx(6.0 * std::sqrt(std::exp(1.0)) / 20.0));

    // integral margins
    REQUIRE(cert.a.integral_margin == Catch::Approx(0.005383619).margin(1e-6));
    REQUIRE(cert.b.integral_margin == Catch::Approx(1.0 / 20 - 1.0 / 21).margin(1e-9));
    REQUIRE(cert.c.integral_margin == Catch::Approx(0.09375).margin(1e-6));
    REQUIRE(cert.d.integral_margin == Catch::Approx(0.197916667).margin(1e-6));

    // pointwise margins, frozen; d reports its two clauses separately
    REQUIRE(cert.a.pointwise_margin == Catch::Approx(0.030211930).margin(1e-6));
    REQUIRE(cert.b.pointwise_margin == Catch::Approx(0.223503289).margin(1e-6));
    REQUIRE(cert.c.pointwise_margin == Catch::Approx(1.518901660).margin(1e-6));
    REQUIRE(cert.d.clauses.size() == 2);
    REQUIRE(cert.d.clauses[0].margin == Catch::Approx(1.466353682).margin(1e-6));
    REQUIRE(cert.d.clauses[1].margin == Catch::Approx(0.006781744).margin(1e-6));
    REQUIRE(cert.d.pointwise_margin == Catch::Approx(0.006781744).margin(1e-6));

    // witnesses live in the sampled region
    for (const ConditionResult* r : {&cert.a, &cert.b, &cert.c, &cert.d}) {
        REQUIRE(r->witness.x1 * r->witness.x1 + r->witness.x2 * r->witness.x2 < 1.0);
        REQUIRE(r->witness.u >= 0.0);
    }
}

TEST_CASE("shrinking R1 to 0.49 flips condition a") {
    const LocalizationBox box(1.0 / 21, 0.49, 1.0 / 6, 1.5);
    const Certificate cert = verify_conditions(exampleProblem(), box, exampleBounds(), 33);
    REQUIRE_FALSE(cert.a.pass());
    REQUIRE_FALSE(cert.allPass());
    REQUIRE(cert.a.integral_margin == Catch::Approx(-0.0046).margin(3e-4));
    REQUIRE(cert.a.pointwise_pass);   // only the integral part fails
    REQUIRE(cert.b.pass());
    REQUIRE(cert.c.pass());
    REQUIRE(cert.d.pass());
}

TEST_CASE("zero upper bound: integral part passes with value zero") {
    BoundSet bounds(Expr::parse("0"), Expr::parse("1/5"), Expr::parse("45/8"),
                    Expr::parse("35/24"));
    const Certificate cert = verify_conditions(exampleProblem(16, 32), exampleBox(), bounds, 9);
    REQUIRE(cert.a.integral_value == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(cert.a.integral_pass);          // 0 < R1 strictly
    REQUIRE_FALSE(cert.a.pointwise_pass);   // f > 0 is not below the zero bound
    REQUIRE_FALSE(cert.a.pass());
}

TEST_CASE("certificate is monotone in the radii") {
    const ProblemSpec spec = exampleProblem(16, 32);
    const Certificate base = verify_conditions(spec, exampleBox(), exampleBounds(), 17);

    const Certificate bigger_R1 = verify_conditions(
        spec, LocalizationBox(1.0 / 21, 0.6, 1.0 / 6, 1.5), exampleBounds(), 17);
    REQUIRE(bigger_R1.a.integral_margin >= base.a.integral_margin);

    const Certificate bigger_R2 = verify_conditions(
        spec, LocalizationBox(1.0 / 21, 0.5, 1.0 / 6, 1.7), exampleBounds(), 17);
    REQUIRE(bigger_R2.c.integral_margin >= base.c.integral_margin);

    const Certificate smaller_r1 = verify_conditions(
        spec, LocalizationBox(1.0 / 30, 0.5, 1.0 / 6, 1.5), exampleBounds(), 17);
    REQUIRE(smaller_r1.b.integral_margin >= base.b.integral_margin);

    const Certificate smaller_r2 = verify_conditions(
        spec, LocalizationBox(1.0 / 21, 0.5, 1.0 / 8, 1.5), exampleBounds(), 17);
    REQUIRE(smaller_r2.d.integral_margin >= base.d.integral_margin);
}

TEST_CASE("doubling Ns does not flip comfortable passes") {
    const ProblemSpec spec = exampleProblem(32, 64);
    const Certificate c1 = verify_conditions(spec, exampleBox(), exampleBounds(), 33);
    const Certificate c2 = verify_conditions(spec, exampleBox(), exampleBounds(), 66);
    const std::pair<const ConditionResult*, const ConditionResult*> pairs[] = {
        {&c1.a, &c2.a}, {&c1.b, &c2.b}, {&c1.c, &c2.c}, {&c1.d, &c2.d}};
    for (auto [r1, r2] : pairs)
        if (r1->pass() && r1->pointwise_margin > 1e-3) REQUIRE(r2->pass());
}

TEST_CASE("certificate JSON carries the documented schema") {
    const Certificate cert =
        verify_conditions(exampleProblem(16, 32), exampleBox(), exampleBounds(), 9);
    const nlohmann::json j = cert.toJson();
    REQUIRE(j.contains("conditions"));
    REQUIRE(j["Ns"] == 9);
    REQUIRE(j["grid"]["Nr"] == 16);
    REQUIRE(j["grid"]["Ntheta"] == 32);
    for (const char* name : {"a", "b", "c", "d"}) {
        const auto& c = j["conditions"][name];
        REQUIRE(c.contains("status"));
        REQUIRE(c.contains("pointwise_margin"));
        REQUIRE(c.contains("witness"));
        REQUIRE(c.contains("integral_value"));
        REQUIRE(c.contains("radius"));
        REQUIRE(c.contains("integral_margin"));
    }
    REQUIRE(j["conditions"]["d"]["clauses"].size() == 2);
    REQUIRE(j["conditions"]["a"]["status"] == "pass");
}

TEST_CASE("check_solution_in_box") {
    const ProblemSpec spec = exampleProblem();
    const Grid g = spec.makeGrid();
    auto [sol, trace] =
        picard_solve(spec, GridFunction::zeros(g), GridFunction::zeros(g), 1e-10, 100);
    REQUIRE(sol.converged);

    const BoxReport rep = check_solution_in_box(sol, exampleBox());
    REQUIRE(rep.pass);
    REQUIRE(rep.margin_u_lower > 0.09);
    REQUIRE(rep.margin_u_upper > 0.09);
    REQUIRE(rep.margin_v_lower > 0.09);
    REQUIRE(rep.margin_v_upper > 0.09);

    // the zero pair fails the lower bounds
    SolutionPair zero{GridFunction::zeros(g), GridFunction::zeros(g), 0.0, 1, true, 0.0};
    const BoxReport zrep = check_solution_in_box(zero, exampleBox());
    REQUIRE_FALSE(zrep.pass);
    REQUIRE(zrep.margin_u_lower < 0.0);

    // exact tie on ||v|| = r2 fails the strict inequality
    SolutionPair tie{sol.u, GridFunction::constant(g, 1.0 / 6), 0.0, 1, true, 0.0};
    const BoxReport trep = check_solution_in_box(tie, exampleBox());
    REQUIRE_FALSE(trep.pass);
    REQUIRE(trep.margin_v_lower == 0.0);
}

TEST_CASE("expression domain errors surface with a witness") {
    ProblemSpec spec = exampleProblem(16, 32);
    spec.f = Expr::parse("ln(u-1)");   // u - 1 < 0 across the sampled box
    try {
        verify_conditions(spec, exampleBox(), exampleBounds(), 9);
        FAIL("expected an evaluation error");
    } catch (const EvalError& e) {
        REQUIRE(std::string(e.what()).find("witness") != std::string::npos);
    }
}

TEST_CASE("check_nonnegativity") {
    const Grid g(16, 32);
    // the shipped f is strictly positive on its box
    const NonnegativityReport ok =
        check_nonnegativity(Expr::parse("0.2*(1+x1^2)*exp(u)*(2+cos(v))"), g, 0.5, 1.5, 17);
    REQUIRE_FALSE(ok.violation);
    REQUIRE(ok.min_value > 0.2);

    // plain v dips negative near v = -R2
    const NonnegativityReport bad = check_nonnegativity(Expr::parse("v"), g, 0.5, 1.5, 17);
    REQUIRE(bad.violation);
    REQUIRE(bad.min_value < -1.4);
    REQUIRE(bad.witness.v < -1.4);

    // the zero expression sits exactly on the edge: no violation
    const NonnegativityReport zero = check_nonnegativity(Expr::parse("0"), g, 0.5, 1.5, 17);
    REQUIRE_FALSE(zero.violation);
    REQUIRE(zero.min_value == 0.0);
}
