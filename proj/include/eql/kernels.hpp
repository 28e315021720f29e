#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eql {

/// Threshold used by division units outside of training.
inline constexpr double kEvalTheta = 1e-4;

// ---------------------------------------------------------------------------
// Division unit and penalties
// ---------------------------------------------------------------------------

struct DivGrad {
    double value = 0.0;
    double d_num = 0.0;
    double d_den = 0.0;
};

/// Regularized division: a/b for b > theta, otherwise 0 with zero gradient.
inline double div_forward(double a, double b, double theta) {
    return b > theta ? a / b : 0.0;
}

inline DivGrad div_forward_grad(double a, double b, double theta) {
    if (!(b > theta)) return {};
    const double inv = 1.0 / b;
    return {a * inv, inv, -a * inv * inv};
}

/// Penalty for denominators at or below the threshold.
inline double div_penalty(double b, double theta) {
    return b < theta ? theta - b : 0.0;
}

/// Subgradient of div_penalty; 0 at the kink.
inline double div_penalty_grad(double b, double theta) {
    return b < theta ? -1.0 : 0.0;
}

inline double bound_penalty(double y, double bound) {
    double p = 0.0;
    if (y > bound) p += y - bound;
    if (-y > bound) p += -y - bound;
    return p;
}

inline double bound_penalty_grad(double y, double bound) {
    if (y > bound) return 1.0;
    if (y < -bound) return -1.0;
    return 0.0;
}

// ---------------------------------------------------------------------------
// Hidden units
// ---------------------------------------------------------------------------

enum class UnitKind : std::uint8_t { identity, sine, cosine, product };

const char* unit_name(UnitKind kind);

/// Evaluates a unit. Unary kinds read inputs[0]; product reads inputs[0..1].
double unit_forward(UnitKind kind, std::span<const double> inputs);

/// Writes the partial derivatives of the unit w.r.t. each input into grad.
void unit_gradient(UnitKind kind, std::span<const double> inputs, std::span<double> grad);

/// Dense affine map z = W y + w0, W stored row-major (rows x cols).
void linear_forward(std::span<const double> weights, std::span<const double> bias,
                    std::span<const double> input, std::span<double> out);

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamConfig {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-4;
};

struct AdamState {
    AdamConfig config;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::int64_t step = 0;

    AdamState() = default;
    explicit AdamState(std::size_t size, AdamConfig cfg = {})
        : config(cfg), first_moment(size, 0.0), second_moment(size, 0.0) {}
};

class NonFiniteGradient : public std::runtime_error {
public:
    explicit NonFiniteGradient(std::size_t index);
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// One bias-corrected Adam step. Entries with frozen[i] != 0 are forced to 0
/// and their moments are left untouched. Throws NonFiniteGradient before
/// modifying anything if a gradient component is NaN or infinite.
void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state,
                 std::span<const std::uint8_t> frozen = {});

// ---------------------------------------------------------------------------
// Finite-difference gradient checking
// ---------------------------------------------------------------------------

using ScalarFunction = std::function<double(std::span<const double>)>;
using GradientFunction = std::function<std::vector<double>(std::span<const double>)>;

/// Worst relative error between the analytic gradient and central
/// differences: max_i |a_i - n_i| / max(|a_i|, |n_i|, floor). Components
/// smaller than floor are compared absolutely against it.
double grad_check(const ScalarFunction& f, const GradientFunction& grad,
                  std::span<const double> point, double epsilon = 1e-6, double floor = 1e-3);

}  // namespace eql
