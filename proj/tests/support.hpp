#pragma once

// Helpers shared by the unit and acceptance tests. Everything here is written
// independently of the library internals so it can serve as an oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <tuple>
#include <vector>

#include "eql/expr.hpp"
#include "eql/network.hpp"
#include "eql/selection.hpp"

namespace eqltest {

inline constexpr double kPi = std::numbers::pi;

/// Central differences of f at p.
inline std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& f,
                                            std::span<const double> p, double h = 1e-6) {
    std::vector<double> x(p.begin(), p.end()), g(p.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f(x);
        x[i] = keep - h;
        const double down = f(x);
        x[i] = keep;
        g[i] = (up - down) / (2 * h);
    }
    return g;
}

/// max_i |a_i - n_i| / max(|a_i|, |n_i|, floor)
inline double relative_error(std::span<const double> a, std::span<const double> n, double floor = 1e-3) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double scale = std::max({std::abs(a[i]), std::abs(n[i]), floor});
        worst = std::max(worst, std::abs(a[i] - n[i]) / scale);
    }
    return worst;
}

/// Straightforward re-implementation of the network forward pass with
/// true division (no threshold). Also reports the denominators.
inline std::vector<double> reference_forward(const eql::Network& net, std::span<const double> x,
                                             std::vector<double>* denominators = nullptr) {
    const auto& a = net.architecture();
    std::vector<double> in(x.begin(), x.end());
    for (int l = 0; l < net.layer_count(); ++l) {
        const auto& s = net.shape(l);
        std::vector<double> z(s.rows);
        for (int r = 0; r < s.rows; ++r) {
            double acc = net.bias(l, r);
            for (int c = 0; c < s.cols; ++c) acc += net.weight(l, r, c) * in[c];
            z[r] = acc;
        }
        if (l == net.layer_count() - 1) {
            std::vector<double> out(a.outputs);
            if (denominators) denominators->assign(a.outputs, 0.0);
            for (int j = 0; j < a.outputs; ++j) {
                out[j] = z[2 * j] / z[2 * j + 1];
                if (denominators) (*denominators)[j] = z[2 * j + 1];
            }
            return out;
        }
        std::vector<double> y(a.unary + a.product);
        const int block = a.unary / 3;
        for (int i = 0; i < a.unary; ++i) {
            y[i] = i < block ? z[i] : i < 2 * block ? std::sin(z[i]) : std::cos(z[i]);
        }
        for (int k = 0; k < a.product; ++k) y[a.unary + k] = z[a.unary + 2 * k] * z[a.unary + 2 * k + 1];
        in = std::move(y);
    }
    return {};
}

/// Sparse network in the style of the random-expression benchmarks: every
/// preactivation reads two random inputs with weights of magnitude [0.5, 2],
/// all other weights are masked. Denominator rows get a positive bias so
/// that most probe points are admissible.
inline eql::Network random_sparse_network(int layers, int inputs, int outputs, std::uint64_t seed,
                                          int unary = 30, int product = 10) {
    eql::Architecture arch{layers, inputs, outputs, unary, product};
    eql::Network net(arch);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mag(0.5, 2.0);
    std::bernoulli_distribution coin(0.5);
    auto draw = [&] { return coin(rng) ? mag(rng) : -mag(rng); };
    auto mask = net.mask();
    for (int l = 0; l < net.layer_count(); ++l) {
        const auto& s = net.shape(l);
        std::uniform_int_distribution<int> pick(0, s.cols - 1);
        const bool last = l == net.layer_count() - 1;
        for (int r = 0; r < s.rows; ++r) {
            for (int c = 0; c < s.cols; ++c) mask[s.weight_offset + static_cast<std::size_t>(r) * s.cols + c] = 1;
            const int c1 = pick(rng);
            int c2 = pick(rng);
            if (s.cols > 1) {
                while (c2 == c1) c2 = pick(rng);
            }
            for (int c : {c1, c2}) {
                net.weight(l, r, c) = last && r % 2 == 1 ? 0.25 * draw() : draw();
                mask[s.weight_offset + static_cast<std::size_t>(r) * s.cols + c] = 0;
            }
            net.bias(l, r) = last && r % 2 == 1 ? 3.0 + mag(rng) : draw();
        }
    }
    net.set_l0_applied(true);
    return net;
}

/// Random expression over `vars` variables using every operator.
inline eql::Expr random_expr(std::mt19937_64& rng, int vars, int depth) {
    using eql::Expr;
    std::uniform_int_distribution<int> kind(0, depth <= 0 ? 1 : 8);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    std::uniform_int_distribution<int> var(0, vars - 1);
    switch (kind(rng)) {
        case 0: return Expr::constant(std::round(coef(rng) * 100.0) / 100.0);
        case 1: return Expr::variable(var(rng));
        case 2: return random_expr(rng, vars, depth - 1) + random_expr(rng, vars, depth - 1);
        case 3: return Expr::mul({Expr::constant(coef(rng)), random_expr(rng, vars, depth - 1)});
        case 4: return random_expr(rng, vars, depth - 1) * random_expr(rng, vars, depth - 1);
        case 5: return Expr::sin(random_expr(rng, vars, depth - 1));
        case 6: return Expr::cos(random_expr(rng, vars, depth - 1));
        case 7: return Expr::pow(random_expr(rng, vars, depth - 1), 2);
        default:
            // Denominator bounded away from zero.
            return Expr::div(random_expr(rng, vars, depth - 1),
                             Expr::add({Expr::pow(random_expr(rng, vars, depth - 1), 2), Expr::constant(1.5)}));
    }
}

/// 2..30 candidates with random metrics; about one in ten failed.
inline std::vector<eql::CandidateMetrics> random_candidates(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(2, 30);
    std::uniform_real_distribution<double> err(0.001, 2.0);
    std::uniform_int_distribution<int> sp(0, 40);
    std::uniform_int_distribution<int> lam(-60, -35);
    std::bernoulli_distribution failed(0.1);
    std::vector<eql::CandidateMetrics> out(count(rng));
    int seed = 0;
    for (auto& c : out) {
        c.lambda = std::pow(10.0, lam(rng) / 10.0);
        c.layers = 2 + seed % 3;
        c.seed = seed++;
        c.v_int = err(rng);
        c.v_ex = err(rng);
        c.sparsity = sp(rng);
        if (failed(rng)) {
            c.failed = true;
            c.v_int = std::numeric_limits<double>::infinity();
            c.v_ex = std::numeric_limits<double>::infinity();
            c.sparsity = std::numeric_limits<double>::infinity();
        }
    }
    return out;
}

/// Min-max normalization written out directly.
inline std::vector<double> oracle_normalize(const std::vector<double>& v) {
    double lo = std::numeric_limits<double>::infinity(), hi = -std::numeric_limits<double>::infinity();
    for (double x : v) {
        if (std::isfinite(x)) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }
    std::vector<double> out;
    for (double x : v) {
        if (!std::isfinite(x)) out.push_back(1.0);
        else if (hi - lo <= 0.0) out.push_back(0.0);
        else out.push_back((x - lo) / (hi - lo));
    }
    return out;
}

/// Brute-force argmin of the selection score with the documented tie-break.
inline std::size_t oracle_select(const std::vector<eql::CandidateMetrics>& cs, const eql::SelectionWeights& w) {
    std::vector<double> vi, sp, ve;
    for (const auto& c : cs) {
        vi.push_back(c.v_int);
        sp.push_back(c.sparsity);
        ve.push_back(c.v_ex.value_or(std::numeric_limits<double>::infinity()));
    }
    const auto nvi = oracle_normalize(vi), nsp = oracle_normalize(sp), nve = oracle_normalize(ve);
    std::size_t best = 0;
    auto key = [&](std::size_t i) {
        const double score = w.alpha * nvi[i] * nvi[i] + w.beta * nsp[i] * nsp[i] + w.gamma * nve[i] * nve[i];
        return std::make_tuple(score, cs[i].sparsity, cs[i].lambda, cs[i].seed, cs[i].layers);
    };
    for (std::size_t i = 1; i < cs.size(); ++i) {
        if (key(i) < key(best)) best = i;
    }
    return best;
}

}  // namespace eqltest
