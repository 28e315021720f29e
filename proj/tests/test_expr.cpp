#include <doctest.h>

#include <cmath>
#include <random>

#include "eql/datasets.hpp"
#include "eql/expr.hpp"
#include "support.hpp"

using namespace eql;

namespace {

Expr x(int i) { return Expr::variable(i); }
Expr c(double v) { return Expr::constant(v); }

std::vector<double> probe(std::mt19937_64& rng, int n, double r = 2.0) {
    std::uniform_real_distribution<double> u(-r, r);
    std::vector<double> p(n);
    for (double& v : p) v = u(rng);
    return p;
}

}  // namespace

TEST_SUITE("expr") {

TEST_CASE("evaluation examples") {
    const double a[2] = {0.5, 0.0};
    CHECK(evaluate(division_expr(), a) == doctest::Approx(1.0));
    const double b[4] = {0, 0, 1, 1};
    CHECK(evaluate(formula_expr("F3"), b) == doctest::Approx(0.0));
    const double z[4] = {0, 0, 0, 0};
    CHECK(evaluate(cartpend_exprs()[2], z) == doctest::Approx(0.0));
}

TEST_CASE("division by zero names the subtree") {
    const Expr e = c(1.0) + x(0) / (x(1) - x(1));
    const double p[2] = {1.0, 3.0};
    try {
        (void)evaluate(e, p);
        FAIL("expected EvalError");
    } catch (const EvalError& err) {
        CHECK(err.where() == "/1");
    }
}

TEST_CASE("simplify examples") {
    CHECK(render(c(0.0) * Expr::sin(x(0)) + c(3.0)) == "3");
    CHECK(structurally_equal(simplify((c(2.0) * x(0)) / c(1.0)), simplify(c(2.0) * x(0))));
    CHECK(render((c(2.0) * x(0)) / c(1.0)) == "2*x1");
    CHECK(render(Expr::sin(c(eqltest::kPi) * x(0) + c(0.0))) == "sin(3.1416*x1)");
    CHECK(render(x(0) * x(0) * c(3.0)) == "3*x1^2");
    CHECK(render(x(1) + x(0) + x(1)) == "x1 + 2*x2");
    CHECK(render(x(0) - x(0)) == "0");
    CHECK(render(Expr::sin(c(-2.0) * x(0))) == "-sin(2*x1)");
    CHECK(render(Expr::cos(c(-2.0) * x(0))) == "cos(2*x1)");
}

TEST_CASE("render examples") {
    CHECK(render(division_expr()) == "sin(3.1416*x1)/(x2^2 + 1)");
    CHECK(render(c(0.0)) == "0");
    CHECK(render(x(2) * x(3)) == "x3*x4");
    CHECK(render(c(-1.0) * x(0)) == "-x1");
    CHECK(render(c(0.5) * x(0) - c(0.25)) == "0.5*x1 - 0.25");
}

TEST_CASE("denominators are scaled to a unit constant term") {
    const Expr e = (c(2.0) * Expr::sin(x(0))) / (c(2.0) * Expr::pow(x(1), 2) + c(2.0));
    CHECK(render(e) == "sin(x1)/(x2^2 + 1)");
}

TEST_CASE("coefficient display") {
    CHECK(format_coefficient(3.14159265) == "3.1416");
    CHECK(format_coefficient(2.0) == "2");
    CHECK(format_coefficient(-0.5) == "-0.5");
    CHECK(format_coefficient(0.00001234) == "1.234e-05");
    CHECK(format_coefficient(0.0) == "0");
}

TEST_CASE("simplify preserves values") {
    std::mt19937_64 rng(17);
    int checked = 0;
    for (int k = 0; k < 100; ++k) {
        const Expr e = eqltest::random_expr(rng, 3, 4);
        const Expr s = simplify(e);
        for (int i = 0; i < 10; ++i) {
            const auto p = probe(rng, 3);
            const double before = evaluate(e, p);
            const double after = evaluate(s, p);
            CHECK(std::abs(before - after) <= 1e-9 * std::max(1.0, std::abs(before)));
            ++checked;
        }
    }
    CHECK(checked == 1000);
}

TEST_CASE("simplify is idempotent") {
    std::mt19937_64 rng(23);
    for (int k = 0; k < 200; ++k) {
        const Expr s = simplify(eqltest::random_expr(rng, 3, 4));
        CHECK(structurally_equal(simplify(s), s));
    }
}

TEST_CASE("render and parse reach a fixed point") {
    std::mt19937_64 rng(29);
    for (int k = 0; k < 100; ++k) {
        const std::string once = render(eqltest::random_expr(rng, 4, 4));
        const std::string twice = render(parse(once));
        CHECK_MESSAGE(twice == once, once);
    }
    for (int h : {2, 3}) {
        for (int seed = 0; seed < 20; ++seed) {
            const std::string once = render(gen_random_expression(h, seed).expr);
            CHECK(render(parse(once)) == once);
        }
    }
}

TEST_CASE("parser accepts ordinary infix input") {
    const Expr e = parse("2*x1^2 - sin(3*x2)/(1 + x1*x1) + -0.5");
    const double p[2] = {0.3, -0.7};
    const double want = 2 * 0.09 - std::sin(-2.1) / (1 + 0.09) - 0.5;
    CHECK(evaluate(e, p) == doctest::Approx(want));
    CHECK_THROWS_AS(parse("sin(x1"), ParseError);
    CHECK_THROWS_AS(parse("x0"), ParseError);
    CHECK_THROWS_AS(parse("1 +"), ParseError);
    CHECK_THROWS_AS(parse("tan(x1)"), ParseError);
}

TEST_CASE("JSON round trip") {
    std::mt19937_64 rng(31);
    for (int k = 0; k < 50; ++k) {
        const Expr e = eqltest::random_expr(rng, 3, 4);
        CHECK(structurally_equal(from_json(to_json(e)), e));
    }
    const auto j = to_json(Expr::pow(x(1), 3));
    CHECK(j.at("type") == "pow");
    CHECK(j.at("exponent") == 3);
    CHECK(j.at("children").size() == 1);
}

TEST_CASE("structure queries") {
    const Expr e = Expr::sin(x(0)) + x(3) * c(2.0);
    CHECK(e.arity() == 4);
    CHECK(e.tree_size() == 6);
}

}  // TEST_SUITE
