#include <doctest.h>

#include <cmath>
#include <random>

#include "eql/datasets.hpp"
#include "eql/extract.hpp"
#include "support.hpp"

using namespace eql;

namespace {

// One unit per unary block and a single product unit.
Network tiny(int inputs) { return Network(Architecture{2, inputs, 1, 3, 1}); }

}  // namespace

TEST_SUITE("extract") {

TEST_CASE("hand-built division network") {
    Network net = tiny(2);
    net.weight(0, 1, 0) = eqltest::kPi;  // sine unit reads pi*x1
    net.weight(0, 3, 1) = 1.0;           // product unit reads x2 * x2
    net.weight(0, 4, 1) = 1.0;
    net.weight(1, 0, 1) = 1.0;  // numerator: sine unit
    net.weight(1, 1, 3) = 1.0;  // denominator: product + 1
    net.bias(1, 1) = 1.0;
    const auto e = extract(net);
    REQUIRE(e.size() == 1);
    CHECK(render(e[0]) == "sin(3.1416*x1)/(x2^2 + 1)");
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> p{u(rng), u(rng)};
        CHECK(evaluate(e[0], p) == doctest::Approx(evaluate(division_expr(), p)).epsilon(1e-12));
    }
}

TEST_CASE("all-zero network extracts to zero") {
    CHECK(render(extract(tiny(2))[0]) == "0");
}

TEST_CASE("affine network") {
    Network net = tiny(1);
    net.weight(0, 0, 0) = 1.0;
    net.weight(1, 0, 0) = 2.0;
    net.bias(1, 0) = 0.5;
    net.bias(1, 1) = 1.0;
    CHECK(render(extract(net)[0]) == "2*x1 + 0.5");
}

TEST_CASE("small parameters are dropped") {
    Network net = tiny(1);
    net.weight(0, 0, 0) = 1.0;
    net.weight(1, 0, 0) = 2.0;
    net.bias(1, 0) = 0.0005;
    net.bias(1, 1) = 1.0;
    CHECK(render(extract(net)[0]) == "2*x1");
    CHECK(render(extract(net, 1e-4)[0]) == "2*x1 + 0.0005");
}

TEST_CASE("masked weights never appear") {
    Network net = tiny(1);
    net.weight(0, 0, 0) = 1.0;
    net.weight(1, 0, 0) = 2.0;
    net.bias(1, 1) = 1.0;
    net.weight(1, 0, 1) = 0.0004;
    net = apply_l0_mask(net);
    CHECK(render(extract(net, 0.0)[0]) == "2*x1");
}

TEST_CASE("extracted expressions reproduce sparse networks") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int k = 0; k < 20; ++k) {
        const int layers = 2 + k % 2;
        const Network net = eqltest::random_sparse_network(layers, 4, 2, 1000 + k);
        const auto exprs = extract(net, 0.0);
        REQUIRE(exprs.size() == 2);
        int probes = 0;
        double worst = 0.0;
        while (probes < 1000) {
            std::vector<double> p{u(rng), u(rng), u(rng), u(rng)};
            std::vector<double> dens;
            (void)eqltest::reference_forward(net, p, &dens);
            if (dens[0] <= 1e-2 || dens[1] <= 1e-2) continue;
            const auto y = predict(net, p);
            for (int j = 0; j < 2; ++j) worst = std::max(worst, std::abs(evaluate(exprs[j], p) - y[j]));
            ++probes;
        }
        CHECK_MESSAGE(worst < 1e-6, "network " << k << " worst " << worst);
    }
}

}  // TEST_SUITE
