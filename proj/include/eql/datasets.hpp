#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eql/expr.hpp"
#include "eql/matrix.hpp"

namespace eql {

/// Axis-aligned hypercube.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    static Box cube(int dim, double half_width);
    std::size_t dim() const { return lo.size(); }
    bool contains(std::span<const double> x) const;
    bool operator==(const Box&) const = default;
};

struct Split {
    Matrix inputs;
    Matrix targets;
    std::size_t size() const { return inputs.rows; }
};

struct Dataset {
    std::string name;
    int input_dim = 0;
    int output_dim = 0;
    Split train;
    Split validation;        // interpolation validation (10% of generated training points)
    Split test_interp;       // noiseless, training domain
    Split test_extrap;       // noiseless, extrapolation domain minus training domain
    Split validation_extrap; // noisy, few points in the extrapolation domain (may be empty)
    Box train_box;
    Box extrap_box;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::vector<Expr> truth;  // one expression per output; may be empty for recorded data

    /// Largest |target| over train and validation splits.
    double max_abs_target() const;
};

struct SampleOptions {
    std::size_t n_train = 10000;  // before the 90/10 split
    std::size_t n_test_interp = 5000;
    std::size_t n_test_extrap = 5000;
    std::size_t n_validation_extrap = 40;
    double sigma = 0.01;
    std::uint64_t seed = 0;
};

/// Samples a dataset from ground-truth expressions. Training-domain points are
/// uniform in `train_box`; extrapolation points are uniform in `extrap_box`
/// and rejected while inside `train_box`. Points whose evaluation fails are
/// redrawn. Noise (standard deviation sigma) is added to the train,
/// validation and extrapolation-validation targets only.
Dataset sample_from_expr(const std::vector<Expr>& truth, const Box& train_box, const Box& extrap_box,
                         const SampleOptions& opts);

// Benchmark tasks -----------------------------------------------------------

/// sin(pi x1) / (x2^2 + 1) on [-1,1]^2, extrapolation in [-2,2]^2.
Expr division_expr();
Dataset gen_division_task(std::size_t n = 10000, double sigma = 0.01, std::uint64_t seed = 0);

/// F1..F4 on [-1,1]^4, extrapolation in [-2,2]^4. Name is "F1".."F4".
Expr formula_expr(const std::string& name);
Dataset gen_formula(const std::string& name, std::size_t n = 10000, double sigma = 0.01, std::uint64_t seed = 0);

/// Cart-pendulum derivative field: 4 inputs, 4 outputs.
std::vector<Expr> cartpend_exprs();
Dataset gen_cartpend(std::size_t n = 10000, double sigma = 0.01, std::uint64_t seed = 0);

struct RandomExpression {
    Expr expr;
    int hidden_layers = 0;
    int inputs = 4;
    std::uint64_t seed = 0;              // seed actually used (after degenerate resampling)
    std::vector<double> sampled;         // every sampled weight and bias, before the pi factor
    std::vector<double> trig_weights;    // input weights of sin/cos units, after the pi factor
};

/// Random sparse EQL-style expression without divisions. Each unit reads two
/// randomly chosen inputs of the previous layer, the output reads two units
/// of the last hidden layer. Weights and biases are uniform in [0.5, 2] with
/// a random sign; weights into sin and cos units are multiplied by pi.
RandomExpression gen_random_expression(int hidden_layers, std::uint64_t seed, int inputs = 4);

/// RE{2,3}-{1..4}: a random expression on [-1,1]^4, extrapolation in [-2,2]^4.
Dataset gen_random_expression_task(const std::string& name, std::size_t n = 10000, double sigma = 0.01,
                                   std::uint64_t seed = 0);

/// Any of: division, F1..F4, RE2-1..RE3-4, cartpend. Throws std::invalid_argument.
Dataset gen_task(const std::string& name, std::size_t n = 10000, double sigma = 0.01, std::uint64_t seed = 0);
bool is_known_task(const std::string& name);
std::vector<std::string> known_tasks();

/// sqrt(mean_i ||y_i||^2) computed from the ground-truth expressions at the
/// split's inputs; the error of a model that always predicts 0.
double constant_zero_rms(const std::vector<Expr>& truth, const Matrix& inputs);

// Persistence ---------------------------------------------------------------

/// Writes train.csv, validation.csv, test_interp.csv, test_extrap.csv,
/// validation_extrap.csv and manifest.json into `dir` (created if needed).
void write_dataset(const std::string& dir, const Dataset& ds);
Dataset read_dataset(const std::string& dir);

/// CSV with a header row; `names` label the columns of inputs then targets.
void write_csv(const std::string& path, const Split& split, const std::vector<std::string>& input_names,
               const std::vector<std::string>& target_names);
Split read_csv(const std::string& path, int input_dim);

}  // namespace eql
