#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eql/errors.hpp"
#include "eql/kernels.hpp"
#include "eql/matrix.hpp"

namespace eql {

/// Layout of an EQL network with division units in the output layer.
///
/// `layers` counts linear maps, so there are `layers - 1` hidden layers. Each
/// hidden layer emits `unary + 2 * product` preactivations: the first `unary`
/// feed identity, sin and cos units in equal contiguous blocks, the rest feed
/// product units in consecutive pairs. The output map emits `2 * outputs`
/// preactivations consumed as (numerator, denominator) pairs.
struct Architecture {
    int layers = 2;
    int inputs = 1;
    int outputs = 1;
    int unary = 30;
    int product = 10;

    int hidden_preactivations() const { return unary + 2 * product; }
    int hidden_width() const { return unary + product; }
    int hidden_layers() const { return layers - 1; }

    UnitKind unary_kind(int index) const;

    /// Throws std::invalid_argument on an unsupported layout.
    void validate() const;

    bool operator==(const Architecture&) const = default;
};

/// Offsets of one linear map inside the flat parameter vector.
struct LayerShape {
    int rows = 0;
    int cols = 0;
    std::size_t weight_offset = 0;
    std::size_t bias_offset = 0;
    bool operator==(const LayerShape&) const = default;
};

class Network {
public:
    Network() = default;
    /// All-zero network.
    explicit Network(const Architecture& arch);

    /// Weights ~ N(0, 1/fan_in), zero biases, empty mask.
    static Network build(const Architecture& arch, std::uint64_t seed);

    const Architecture& architecture() const { return arch_; }
    int layer_count() const { return static_cast<int>(shapes_.size()); }
    const LayerShape& shape(int layer) const { return shapes_[layer]; }

    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }
    std::size_t parameter_count() const { return params_.size(); }

    /// 1 for entries of weight matrices, 0 for biases.
    std::span<const std::uint8_t> weight_flags() const { return is_weight_; }
    /// 1 for weights frozen at zero by the L0 step.
    std::span<const std::uint8_t> mask() const { return mask_; }
    std::span<std::uint8_t> mask() { return mask_; }

    /// True once apply_l0_mask has run on this network.
    bool l0_applied() const { return l0_applied_; }
    void set_l0_applied(bool v) { l0_applied_ = v; }

    double& weight(int layer, int row, int col) {
        const auto& s = shapes_[layer];
        return params_[s.weight_offset + static_cast<std::size_t>(row) * s.cols + col];
    }
    double weight(int layer, int row, int col) const {
        const auto& s = shapes_[layer];
        return params_[s.weight_offset + static_cast<std::size_t>(row) * s.cols + col];
    }
    double& bias(int layer, int row) { return params_[shapes_[layer].bias_offset + row]; }
    double bias(int layer, int row) const { return params_[shapes_[layer].bias_offset + row]; }

    bool masked(int layer, int row, int col) const {
        const auto& s = shapes_[layer];
        return mask_[s.weight_offset + static_cast<std::size_t>(row) * s.cols + col] != 0;
    }

    std::span<const double> weights(int layer) const {
        const auto& s = shapes_[layer];
        return {params_.data() + s.weight_offset, static_cast<std::size_t>(s.rows) * s.cols};
    }
    std::span<const double> biases(int layer) const {
        const auto& s = shapes_[layer];
        return {params_.data() + s.bias_offset, static_cast<std::size_t>(s.rows)};
    }

    std::size_t masked_count() const;
    /// Sum of |w| over all weight matrices (biases excluded).
    double l1_norm() const;

    bool operator==(const Network&) const = default;

private:
    Architecture arch_;
    std::vector<LayerShape> shapes_;
    std::vector<double> params_;
    std::vector<std::uint8_t> is_weight_;
    std::vector<std::uint8_t> mask_;
    bool l0_applied_ = false;
};

/// Signals a parameter blow-up during evaluation.
class NonFiniteActivation : public std::runtime_error {
public:
    explicit NonFiniteActivation(int layer);
    /// 1-based index of the linear map whose output went non-finite.
    int layer() const noexcept { return layer_; }

private:
    int layer_;
};

/// Per-sample intermediate values. Reused across calls as a workspace.
struct ForwardTrace {
    std::vector<std::vector<double>> preactivations;  // one per linear map
    std::vector<std::vector<double>> activations;     // one per hidden layer
    std::vector<std::vector<double>> unit_slopes;     // d(activation)/d(preact) for unary units
    std::vector<double> denominators;
    std::vector<double> outputs;
};

/// Evaluates the network on one input. Throws NonFiniteActivation.
void forward(const Network& net, std::span<const double> x, double theta, ForwardTrace& trace);
ForwardTrace forward(const Network& net, std::span<const double> x, double theta);
std::vector<double> predict(const Network& net, std::span<const double> x, double theta = kEvalTheta);

struct LossTerms {
    double mse = 0.0;
    double l1 = 0.0;
    double penalty = 0.0;
    double total() const { return mse + l1 + penalty; }
};

/// Mean squared error + lambda * sum |W|_1 + penalty_scale * sum of division
/// penalties over all samples and denominators.
LossTerms loss(const Network& net, const Matrix& inputs, const Matrix& targets, double lambda,
               double theta, double penalty_scale = 1.0);

/// Same as loss() restricted to `rows`, accumulating d(loss)/d(params) into
/// `grad` (which must be sized to the parameter count and is zeroed first).
LossTerms loss_gradient(const Network& net, const Matrix& inputs, const Matrix& targets,
                        std::span<const std::size_t> rows, double lambda, double theta,
                        double penalty_scale, std::span<double> grad, ForwardTrace& ws);

/// Division penalty plus output-bound penalty on unlabeled inputs, each
/// summed over samples and outputs and multiplied by `scale`.
LossTerms penalty_loss(const Network& net, const Matrix& inputs, double theta, double bound = 10.0,
                       double scale = 1.0);

LossTerms penalty_loss_gradient(const Network& net, const Matrix& inputs,
                                std::span<const std::size_t> rows, double theta, double bound,
                                double scale, std::span<double> grad, ForwardTrace& ws);

/// Zeroes and freezes every weight with |w| < tolerance. Biases are untouched.
void apply_l0_mask_inplace(Network& net, double tolerance = 0.001);
Network apply_l0_mask(Network net, double tolerance = 0.001);

/// Number of hidden units with a nonzero incoming weight and a path of
/// nonzero weights to an output. Before masking, weights with |w| < 0.001
/// count as zero; after masking, exactly the unmasked weights are live.
int sparsity(const Network& net);

// Serialization -------------------------------------------------------------

inline constexpr int kNetworkFormatVersion = 1;

void write_network(std::ostream& out, const Network& net);
Network read_network(std::istream& in);
void save_network(const std::string& path, const Network& net);
Network load_network(const std::string& path);

}  // namespace eql
