#include "eql/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace eql {

const char* unit_name(UnitKind kind) {
    switch (kind) {
        case UnitKind::identity: return "id";
        case UnitKind::sine: return "sin";
        case UnitKind::cosine: return "cos";
        case UnitKind::product: return "mult";
    }
    return "?";
}

double unit_forward(UnitKind kind, std::span<const double> inputs) {
    switch (kind) {
        case UnitKind::identity: return inputs[0];
        case UnitKind::sine: return std::sin(inputs[0]);
        case UnitKind::cosine: return std::cos(inputs[0]);
        case UnitKind::product: return inputs[0] * inputs[1];
    }
    return 0.0;
}

void unit_gradient(UnitKind kind, std::span<const double> inputs, std::span<double> grad) {
    switch (kind) {
        case UnitKind::identity: grad[0] = 1.0; break;
        case UnitKind::sine: grad[0] = std::cos(inputs[0]); break;
        case UnitKind::cosine: grad[0] = -std::sin(inputs[0]); break;
        case UnitKind::product:
            grad[0] = inputs[1];
            grad[1] = inputs[0];
            break;
    }
}

void linear_forward(std::span<const double> weights, std::span<const double> bias,
                    std::span<const double> input, std::span<double> out) {
    const std::size_t rows = out.size();
    const std::size_t cols = input.size();
    assert(weights.size() == rows * cols && bias.size() == rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* w = weights.data() + r * cols;
        double acc = bias[r];
        for (std::size_t c = 0; c < cols; ++c) acc += w[c] * input[c];
        out[r] = acc;
    }
}

NonFiniteGradient::NonFiniteGradient(std::size_t index)
    : std::runtime_error("non-finite gradient at parameter " + std::to_string(index)),
      index_(index) {}

void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state,
                 std::span<const std::uint8_t> frozen) {
    const std::size_t n = params.size();
    if (grads.size() != n || state.first_moment.size() != n || state.second_moment.size() != n ||
        (!frozen.empty() && frozen.size() != n)) {
        throw std::invalid_argument("adam_update: size mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(grads[i])) throw NonFiniteGradient(i);
    }

    const AdamConfig& cfg = state.config;
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    double* m = state.first_moment.data();
    double* v = state.second_moment.data();

    for (std::size_t i = 0; i < n; ++i) {
        if (!frozen.empty() && frozen[i]) {
            params[i] = 0.0;
            continue;
        }
        const double g = grads[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

double grad_check(const ScalarFunction& f, const GradientFunction& grad,
                  std::span<const double> point, double epsilon, double floor) {
    std::vector<double> x(point.begin(), point.end());
    const std::vector<double> analytic = grad(x);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + epsilon;
        const double fp = f(x);
        x[i] = orig - epsilon;
        const double fm = f(x);
        x[i] = orig;
        const double numeric = (fp - fm) / (2.0 * epsilon);
        const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
    }
    return worst;
}

}  // namespace eql
