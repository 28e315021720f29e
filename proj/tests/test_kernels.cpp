#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "eql/kernels.hpp"
#include "support.hpp"

using namespace eql;

TEST_SUITE("kernels") {

TEST_CASE("division above and below the threshold") {
    CHECK(div_forward(1.0, 2.0, 1e-4) == doctest::Approx(0.5));
    CHECK(div_forward(1.0, 1e-4, 1e-4) == 0.0);
    CHECK(div_forward(3.0, -2.0, 1e-4) == 0.0);
    const DivGrad g = div_forward_grad(3.0, 2.0, 0.5);
    CHECK(g.value == doctest::Approx(1.5));
    CHECK(g.d_num == doctest::Approx(0.5));
    CHECK(g.d_den == doctest::Approx(-0.75));
    const DivGrad z = div_forward_grad(3.0, 0.1, 0.5);
    CHECK(z.value == 0.0);
    CHECK(z.d_num == 0.0);
    CHECK(z.d_den == 0.0);
}

TEST_CASE("division penalty and its subgradient") {
    CHECK(div_penalty(0.5, 1.0) == doctest::Approx(0.5));
    CHECK(div_penalty(2.0, 1.0) == 0.0);
    CHECK(div_penalty(-1.0, 0.5) == doctest::Approx(1.5));
    CHECK(div_penalty_grad(0.5, 1.0) == -1.0);
    CHECK(div_penalty_grad(1.0, 1.0) == 0.0);
    CHECK(div_penalty_grad(1.5, 1.0) == 0.0);
}

TEST_CASE("bound penalty") {
    CHECK(bound_penalty(12.0, 10.0) == doctest::Approx(2.0));
    CHECK(bound_penalty(-13.0, 10.0) == doctest::Approx(3.0));
    CHECK(bound_penalty(5.0, 10.0) == 0.0);
    CHECK(bound_penalty_grad(12.0, 10.0) == 1.0);
    CHECK(bound_penalty_grad(-12.0, 10.0) == -1.0);
    CHECK(bound_penalty_grad(3.0, 10.0) == 0.0);
}

TEST_CASE("unit values and derivatives") {
    const double z[2] = {0.7, -1.3};
    CHECK(unit_forward(UnitKind::identity, z) == 0.7);
    CHECK(unit_forward(UnitKind::sine, z) == doctest::Approx(std::sin(0.7)));
    CHECK(unit_forward(UnitKind::cosine, z) == doctest::Approx(std::cos(0.7)));
    CHECK(unit_forward(UnitKind::product, z) == doctest::Approx(-0.91));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3, 3);
    for (auto kind : {UnitKind::identity, UnitKind::sine, UnitKind::cosine, UnitKind::product}) {
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<double> p{u(rng), u(rng)};
            std::vector<double> g(2, 0.0);
            unit_gradient(kind, p, g);
            auto f = [&](std::span<const double> q) { return unit_forward(kind, q); };
            auto n = eqltest::numeric_gradient(f, p);
            if (kind != UnitKind::product) {
                g.resize(1);
                n.resize(1);
            }
            CHECK(eqltest::relative_error(g, n) < 1e-6);
        }
    }
}

TEST_CASE("linear map") {
    const double W[6] = {1, 2, 3, 4, 5, 6};
    const double b[2] = {0.5, -1};
    const double x[3] = {1, 0, -1};
    double out[2];
    linear_forward(W, b, x, out);
    CHECK(out[0] == doctest::Approx(1 - 3 + 0.5));
    CHECK(out[1] == doctest::Approx(4 - 6 - 1));
}

TEST_CASE("one Adam step by hand") {
    std::vector<double> w{1.0};
    const std::vector<double> g{1.0};
    AdamState st(1);
    adam_update(w, g, st);
    // m_hat = 1, v_hat = 1, step = lr / (1 + eps)
    CHECK(std::abs(w[0] - (1.0 - 0.001 / (1.0 + 1e-4))) < 1e-12);
    CHECK(std::abs(w[0] - 0.999) < 1e-6);
    CHECK(st.step == 1);
}

TEST_CASE("Adam recurrence over several steps") {
    std::vector<double> w{0.3, -0.2};
    AdamState st(2);
    double m[2] = {0, 0}, v[2] = {0, 0}, ref[2] = {0.3, -0.2};
    for (int t = 1; t <= 5; ++t) {
        const std::vector<double> g{0.1 * t, -0.5 + t};
        adam_update(w, g, st);
        for (int i = 0; i < 2; ++i) {
            m[i] = 0.9 * m[i] + 0.1 * g[i];
            v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
            const double mh = m[i] / (1 - std::pow(0.9, t));
            const double vh = v[i] / (1 - std::pow(0.999, t));
            ref[i] -= 0.001 * mh / (std::sqrt(vh) + 1e-4);
        }
    }
    CHECK(w[0] == doctest::Approx(ref[0]).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(ref[1]).epsilon(1e-12));
}

TEST_CASE("frozen parameters stay zero and keep their moments") {
    std::vector<double> w{0.5, 0.0, 0.25};
    const std::vector<std::uint8_t> frozen{0, 1, 0};
    AdamState st(3);
    for (int t = 0; t < 10; ++t) adam_update(w, std::vector<double>{1.0, 1.0, -1.0}, st, frozen);
    CHECK(w[1] == 0.0);
    CHECK(st.first_moment[1] == 0.0);
    CHECK(st.second_moment[1] == 0.0);
    CHECK(w[0] < 0.5);
    CHECK(w[2] > 0.25);
}

TEST_CASE("non-finite gradient is rejected before any update") {
    std::vector<double> w{1.0, 2.0};
    AdamState st(2);
    const std::vector<double> g{0.5, std::numeric_limits<double>::quiet_NaN()};
    try {
        adam_update(w, g, st);
        FAIL("expected NonFiniteGradient");
    } catch (const NonFiniteGradient& e) {
        CHECK(e.index() == 1);
    }
    CHECK(w[0] == 1.0);
    CHECK(w[1] == 2.0);
    CHECK(st.step == 0);
}

TEST_CASE("Adam is bit-deterministic") {
    auto run = [] {
        std::vector<double> w{0.1, 0.2, 0.3};
        AdamState st(3);
        for (int t = 0; t < 100; ++t) adam_update(w, std::vector<double>{std::sin(t), std::cos(t), 0.01 * t}, st);
        return w;
    };
    CHECK(run() == run());
}

TEST_CASE("gradient checker flags a wrong gradient") {
    auto f = [](std::span<const double> p) { return p[0] * p[0] + 3 * p[1]; };
    auto good = [](std::span<const double> p) { return std::vector<double>{2 * p[0], 3.0}; };
    auto bad = [](std::span<const double> p) { return std::vector<double>{2 * p[0], 2.0}; };
    const std::vector<double> p{0.7, -0.4};
    CHECK(grad_check(f, good, p) < 1e-6);
    CHECK(grad_check(f, bad, p) > 0.1);
}

}  // TEST_SUITE
