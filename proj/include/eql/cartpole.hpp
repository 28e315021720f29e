#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "eql/datasets.hpp"
#include "eql/network.hpp"

namespace eql {

/// theta = 0 is upright, pi hangs down; theta is never wrapped.
struct CartPoleState {
    double x = 0.0;
    double x_dot = 0.0;
    double theta = 0.0;
    double theta_dot = 0.0;

    std::array<double, 4> to_array() const { return {x, x_dot, theta, theta_dot}; }
    static CartPoleState from_array(const std::array<double, 4>& s) { return {s[0], s[1], s[2], s[3]}; }
    bool finite() const;
};

struct CartPoleParams {
    double gravity = 9.81;
    double mass_cart = 1.0;
    double mass_pole = 0.1;
    double half_length = 0.5;
    double force_mag = 10.0;  // force = force_mag * action, action in [-1, 1]
    double dt = 0.02;
};

using Derivative = std::array<double, 4>;

/// Continuous-time dynamics f(s, a) = ds/dt.
Derivative cartpole_derivative(const CartPoleState& s, double action, const CartPoleParams& p = {});
/// One explicit Euler step. The action is clamped to [-1, 1].
CartPoleState env_step(const CartPoleState& s, double action, const CartPoleParams& p = {});
/// Total mechanical energy (uniform rod pole, zero potential at the pivot height).
double cartpole_energy(const CartPoleState& s, const CartPoleParams& p = {});
/// Hanging state theta = pi + N(0, 0.01).
CartPoleState initial_state(std::mt19937_64& rng);

/// 0.1 x^2 + 0.1 x_dot^2 - cos(theta) + 0.02 theta_dot^2.
struct CostWeights {
    double x = 0.1;
    double x_dot = 0.1;
    double theta = 1.0;
    double theta_dot = 0.02;
};
double control_cost(const CartPoleState& s, const CostWeights& w = {});

// Data collection ---------------------------------------------------------------

struct Transition {
    CartPoleState state;
    double action = 0.0;
    Derivative state_dot{};  // (s' - s) / dt
};

struct RolloutSet {
    std::vector<std::vector<Transition>> training;  // K - 1 rollouts
    std::vector<Transition> validation;             // one rollout with the wider action noise
};

struct RolloutOptions {
    int rollouts = 2;  // K
    int steps = 1000;
    double sigma_train = 0.15;
    double sigma_validation = 0.25;
    std::uint64_t seed = 0;
};

/// Throws std::invalid_argument when K < 2 or steps < 1.
RolloutSet collect_rollouts(const RolloutOptions& opts, const CartPoleParams& p = {});

/// Forward-model dataset: inputs (x, x_dot, theta, theta_dot, a), targets
/// ds/dt. Training transitions are shuffled and split 90/10 into train and
/// validation; the validation rollout becomes the extrapolation validation
/// and extrapolation test set. The extrapolation box doubles the training
/// box around its centre and covers theta in [-pi, 3pi] and a in [-1, 1].
Dataset rollout_dataset(const RolloutSet& rollouts, std::uint64_t seed);

void write_trajectory_csv(const std::string& path, const std::vector<Transition>& rows);
std::vector<Transition> read_trajectory_csv(const std::string& path);

// Forward models -----------------------------------------------------------------

class DynamicsModel {
public:
    virtual ~DynamicsModel() = default;
    /// Must be safe to call concurrently.
    virtual Derivative derivative(const CartPoleState& s, double action) const = 0;
};

class TrueDynamics : public DynamicsModel {
public:
    explicit TrueDynamics(CartPoleParams p = {}) : p_(p) {}
    Derivative derivative(const CartPoleState& s, double action) const override {
        return cartpole_derivative(s, action, p_);
    }

private:
    CartPoleParams p_;
};

/// Trained network with 5 inputs and 4 outputs, evaluated like predict() at
/// theta = 1e-4. Zero weights are skipped. Non-finite outputs propagate.
class NetworkDynamics : public DynamicsModel {
public:
    explicit NetworkDynamics(const Network& net);
    Derivative derivative(const CartPoleState& s, double action) const override;

private:
    struct Row {
        std::vector<std::pair<int, double>> terms;
        double bias = 0.0;
    };
    Architecture arch_;
    std::vector<std::vector<Row>> layers_;
};

// Random-shooting MPC ------------------------------------------------------------

struct MpcConfig {
    int n_rollouts = 1000;
    int horizon = 60;
    double action_sigma = 0.5;  // shooting actions ~ N(0, sigma), clipped to [-1, 1]
    CostWeights weights;
    double dt = 0.02;
    int jobs = 1;
};

struct MpcDecision {
    double action = 0.0;
    std::size_t chosen = 0;
    std::vector<double> costs;  // accumulated cost per sampled sequence
    std::vector<double> first_actions;
};

/// Samples n_rollouts action sequences, simulates each with Euler steps of the
/// model and returns the first action of the sequence with the lowest cost
/// accumulated over the horizon. A non-finite prediction scores +inf.
/// Throws std::invalid_argument on n_rollouts < 1 or horizon < 1.
MpcDecision mpc_action(const DynamicsModel& model, const CartPoleState& s, const MpcConfig& cfg,
                       std::mt19937_64& rng);

/// Same, over explicitly given sequences (each of length horizon).
MpcDecision mpc_choose(const DynamicsModel& model, const CartPoleState& s,
                       const std::vector<std::vector<double>>& sequences, const MpcConfig& cfg);

struct EpisodeOptions {
    int steps = 1000;
    std::uint64_t seed = 0;
    double state_noise = 0.0;   // std of noise on observed states
    double action_noise = 0.0;  // std of noise on executed actions
};

struct EpisodeStep {
    int t = 0;
    CartPoleState state;  // after the step
    double action = 0.0;
    double cost = 0.0;
    double reward_so_far = 0.0;
};

struct EpisodeResult {
    double reward = 0.0;  // sum over steps of cos(theta_t)
    std::vector<EpisodeStep> log;
};

EpisodeResult run_episode(const DynamicsModel& model, const MpcConfig& cfg, const EpisodeOptions& opts,
                          const CartPoleParams& p = {});

void write_episode_csv(const std::string& path, const EpisodeResult& episode);

}  // namespace eql
