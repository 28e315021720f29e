#include "eql/cartpole.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "eql/kernels.hpp"

namespace eql {

namespace {

constexpr double kPi = std::numbers::pi;

double clamp_action(double a) { return std::clamp(a, -1.0, 1.0); }

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id};
    return std::mt19937_64(seq);
}

CartPoleState euler(const CartPoleState& s, const Derivative& d, double dt) {
    return {s.x + dt * d[0], s.x_dot + dt * d[1], s.theta + dt * d[2], s.theta_dot + dt * d[3]};
}

}  // namespace

bool CartPoleState::finite() const {
    return std::isfinite(x) && std::isfinite(x_dot) && std::isfinite(theta) && std::isfinite(theta_dot);
}

Derivative cartpole_derivative(const CartPoleState& s, double action, const CartPoleParams& p) {
    const double force = p.force_mag * clamp_action(action);
    const double total_mass = p.mass_cart + p.mass_pole;
    const double pml = p.mass_pole * p.half_length;
    const double sin_t = std::sin(s.theta);
    const double cos_t = std::cos(s.theta);
    const double temp = (force + pml * s.theta_dot * s.theta_dot * sin_t) / total_mass;
    const double theta_acc =
        (p.gravity * sin_t - cos_t * temp) /
        (p.half_length * (4.0 / 3.0 - p.mass_pole * cos_t * cos_t / total_mass));
    const double x_acc = temp - pml * theta_acc * cos_t / total_mass;
    return {s.x_dot, x_acc, s.theta_dot, theta_acc};
}

CartPoleState env_step(const CartPoleState& s, double action, const CartPoleParams& p) {
    return euler(s, cartpole_derivative(s, action, p), p.dt);
}

double cartpole_energy(const CartPoleState& s, const CartPoleParams& p) {
    const double m = p.mass_pole;
    const double l = p.half_length;
    const double kinetic = 0.5 * (p.mass_cart + m) * s.x_dot * s.x_dot +
                           m * l * s.x_dot * s.theta_dot * std::cos(s.theta) +
                           (2.0 / 3.0) * m * l * l * s.theta_dot * s.theta_dot;
    return kinetic + m * p.gravity * l * std::cos(s.theta);
}

CartPoleState initial_state(std::mt19937_64& rng) {
    return {0.0, 0.0, kPi + std::normal_distribution<double>(0.0, 0.01)(rng), 0.0};
}

double control_cost(const CartPoleState& s, const CostWeights& w) {
    return w.x * s.x * s.x + w.x_dot * s.x_dot * s.x_dot - w.theta * std::cos(s.theta) +
           w.theta_dot * s.theta_dot * s.theta_dot;
}

// Data collection -----------------------------------------------------------------

namespace {

std::vector<Transition> random_rollout(int steps, double sigma, std::mt19937_64& rng, const CartPoleParams& p) {
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<Transition> out;
    out.reserve(steps);
    CartPoleState s = initial_state(rng);
    for (int t = 0; t < steps; ++t) {
        const double a = clamp_action(noise(rng));
        const CartPoleState next = env_step(s, a, p);
        const auto s0 = s.to_array();
        const auto s1 = next.to_array();
        Transition tr{s, a, {}};
        for (int i = 0; i < 4; ++i) tr.state_dot[i] = (s1[i] - s0[i]) / p.dt;
        out.push_back(tr);
        s = next;
    }
    return out;
}

std::array<double, 5> input_row(const Transition& t) {
    return {t.state.x, t.state.x_dot, t.state.theta, t.state.theta_dot, t.action};
}

Split to_split(const std::vector<Transition>& rows) {
    Split s;
    s.inputs = Matrix(0, 5);
    s.targets = Matrix(0, 4);
    for (const auto& t : rows) {
        const auto in = input_row(t);
        s.inputs.append(in);
        s.targets.append(t.state_dot);
    }
    return s;
}

}  // namespace

RolloutSet collect_rollouts(const RolloutOptions& opts, const CartPoleParams& p) {
    if (opts.rollouts < 2) throw std::invalid_argument("collect_rollouts: K must be at least 2");
    if (opts.steps < 1) throw std::invalid_argument("collect_rollouts: steps must be positive");
    RolloutSet set;
    for (int k = 0; k < opts.rollouts - 1; ++k) {
        auto rng = stream(opts.seed, static_cast<std::uint32_t>(k));
        set.training.push_back(random_rollout(opts.steps, opts.sigma_train, rng, p));
    }
    auto rng = stream(opts.seed, 1000u);
    set.validation = random_rollout(opts.steps, opts.sigma_validation, rng, p);
    return set;
}

Dataset rollout_dataset(const RolloutSet& rollouts, std::uint64_t seed) {
    std::vector<Transition> all;
    for (const auto& r : rollouts.training) all.insert(all.end(), r.begin(), r.end());
    if (all.empty()) throw std::invalid_argument("rollout_dataset: no training transitions");
    auto rng = stream(seed, 2000u);
    std::shuffle(all.begin(), all.end(), rng);
    const std::size_t n_train = all.size() - all.size() / 10;

    Dataset ds;
    ds.name = "cartpole-rollouts";
    ds.input_dim = 5;
    ds.output_dim = 4;
    ds.seed = seed;
    ds.train = to_split({all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train)});
    ds.validation = to_split({all.begin() + static_cast<std::ptrdiff_t>(n_train), all.end()});
    ds.test_interp = ds.validation;
    ds.validation_extrap = to_split(rollouts.validation);
    ds.test_extrap = ds.validation_extrap;

    ds.train_box.lo.assign(5, std::numeric_limits<double>::infinity());
    ds.train_box.hi.assign(5, -std::numeric_limits<double>::infinity());
    for (const auto& t : all) {
        const auto in = input_row(t);
        for (int i = 0; i < 5; ++i) {
            ds.train_box.lo[i] = std::min(ds.train_box.lo[i], in[i]);
            ds.train_box.hi[i] = std::max(ds.train_box.hi[i], in[i]);
        }
    }
    ds.extrap_box = ds.train_box;
    for (int i = 0; i < 5; ++i) {
        const double mid = 0.5 * (ds.train_box.lo[i] + ds.train_box.hi[i]);
        const double half = std::max(ds.train_box.hi[i] - ds.train_box.lo[i], 1e-3);
        ds.extrap_box.lo[i] = mid - half;
        ds.extrap_box.hi[i] = mid + half;
    }
    ds.extrap_box.lo[2] = std::min(ds.extrap_box.lo[2], -kPi);
    ds.extrap_box.hi[2] = std::max(ds.extrap_box.hi[2], 3.0 * kPi);
    ds.extrap_box.lo[4] = std::min(ds.extrap_box.lo[4], -1.0);
    ds.extrap_box.hi[4] = std::max(ds.extrap_box.hi[4], 1.0);
    return ds;
}

void write_trajectory_csv(const std::string& path, const std::vector<Transition>& rows) {
    write_csv(path, to_split(rows), {"s1", "s2", "s3", "s4", "a"}, {"ds1", "ds2", "ds3", "ds4"});
}

std::vector<Transition> read_trajectory_csv(const std::string& path) {
    const Split s = read_csv(path, 5);
    if (s.targets.cols != 4) throw FormatError(path + ": expected 9 columns");
    std::vector<Transition> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto in = s.inputs.row(i);
        const auto d = s.targets.row(i);
        out.push_back({{in[0], in[1], in[2], in[3]}, in[4], {d[0], d[1], d[2], d[3]}});
    }
    return out;
}

// Forward models --------------------------------------------------------------------

NetworkDynamics::NetworkDynamics(const Network& net) : arch_(net.architecture()) {
    if (arch_.inputs != 5 || arch_.outputs != 4) {
        throw std::invalid_argument("dynamics network must map 5 inputs to 4 outputs");
    }
    for (int l = 0; l < net.layer_count(); ++l) {
        const LayerShape& s = net.shape(l);
        std::vector<Row> rows(s.rows);
        for (int r = 0; r < s.rows; ++r) {
            rows[r].bias = net.bias(l, r);
            for (int c = 0; c < s.cols; ++c) {
                const double w = net.weight(l, r, c);
                if (w != 0.0) rows[r].terms.emplace_back(c, w);
            }
        }
        layers_.push_back(std::move(rows));
    }
}

Derivative NetworkDynamics::derivative(const CartPoleState& s, double action) const {
    thread_local std::vector<double> in, z, y;
    in.assign({s.x, s.x_dot, s.theta, s.theta_dot, action});
    const int L = static_cast<int>(layers_.size());
    const int block = arch_.unary / 3;
    for (int l = 0; l < L; ++l) {
        const auto& rows = layers_[l];
        z.resize(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            double acc = 0.0;
            for (const auto& [c, w] : rows[r].terms) acc += w * in[c];
            z[r] = acc + rows[r].bias;
        }
        if (l == L - 1) break;
        y.resize(arch_.hidden_width());
        for (int i = 0; i < block; ++i) y[i] = z[i];
        for (int i = block; i < 2 * block; ++i) y[i] = std::sin(z[i]);
        for (int i = 2 * block; i < arch_.unary; ++i) y[i] = std::cos(z[i]);
        for (int k = 0; k < arch_.product; ++k) y[arch_.unary + k] = z[arch_.unary + 2 * k] * z[arch_.unary + 2 * k + 1];
        std::swap(in, y);
    }
    Derivative d{};
    for (int j = 0; j < 4; ++j) d[j] = div_forward(z[2 * j], z[2 * j + 1], kEvalTheta);
    return d;
}

// MPC ---------------------------------------------------------------------------------

MpcDecision mpc_choose(const DynamicsModel& model, const CartPoleState& s,
                       const std::vector<std::vector<double>>& sequences, const MpcConfig& cfg) {
    if (sequences.empty()) throw std::invalid_argument("mpc: no action sequences");
    const std::size_t n = sequences.size();
    MpcDecision out;
    out.costs.assign(n, 0.0);
    out.first_actions.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (sequences[i].empty()) throw std::invalid_argument("mpc: empty action sequence");
        out.first_actions[i] = sequences[i].front();
    }

    auto score = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            CartPoleState x = s;
            double cost = 0.0;
            for (double a : sequences[i]) {
                x = euler(x, model.derivative(x, a), cfg.dt);
                if (!x.finite()) {
                    cost = std::numeric_limits<double>::infinity();
                    break;
                }
                cost += control_cost(x, cfg.weights);
            }
            out.costs[i] = std::isfinite(cost) ? cost : std::numeric_limits<double>::infinity();
        }
    };
    const std::size_t jobs = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(cfg.jobs, 1)), 1, n);
    if (jobs == 1) {
        score(0, n);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(score, n * j / jobs, n * (j + 1) / jobs);
        for (auto& t : pool) t.join();
    }

    out.chosen = static_cast<std::size_t>(std::min_element(out.costs.begin(), out.costs.end()) - out.costs.begin());
    out.action = out.first_actions[out.chosen];
    return out;
}

MpcDecision mpc_action(const DynamicsModel& model, const CartPoleState& s, const MpcConfig& cfg,
                       std::mt19937_64& rng) {
    if (cfg.n_rollouts < 1) throw std::invalid_argument("mpc: n_rollouts must be positive");
    if (cfg.horizon < 1) throw std::invalid_argument("mpc: horizon must be positive");
    std::normal_distribution<double> noise(0.0, cfg.action_sigma);
    std::vector<std::vector<double>> seqs(cfg.n_rollouts, std::vector<double>(cfg.horizon));
    for (auto& seq : seqs) {
        for (double& a : seq) a = clamp_action(noise(rng));
    }
    return mpc_choose(model, s, seqs, cfg);
}

EpisodeResult run_episode(const DynamicsModel& model, const MpcConfig& cfg, const EpisodeOptions& opts,
                          const CartPoleParams& p) {
    auto env_rng = stream(opts.seed, 0u);
    auto mpc_rng = stream(opts.seed, 1u);
    auto noise_rng = stream(opts.seed, 2u);
    std::normal_distribution<double> unit(0.0, 1.0);

    EpisodeResult result;
    CartPoleState s = initial_state(env_rng);
    for (int t = 0; t < opts.steps; ++t) {
        CartPoleState observed = s;
        if (opts.state_noise > 0.0) {
            observed.x += opts.state_noise * unit(noise_rng);
            observed.x_dot += opts.state_noise * unit(noise_rng);
            observed.theta += opts.state_noise * unit(noise_rng);
            observed.theta_dot += opts.state_noise * unit(noise_rng);
        }
        double a = mpc_action(model, observed, cfg, mpc_rng).action;
        if (opts.action_noise > 0.0) a = clamp_action(a + opts.action_noise * unit(noise_rng));
        s = env_step(s, a, p);
        result.reward += std::cos(s.theta);
        result.log.push_back({t, s, a, control_cost(s, cfg.weights), result.reward});
    }
    return result;
}

void write_episode_csv(const std::string& path, const EpisodeResult& episode) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "t,x,x_dot,theta,theta_dot,action,cost,reward\n";
    out.precision(17);
    for (const auto& e : episode.log) {
        out << e.t << ',' << e.state.x << ',' << e.state.x_dot << ',' << e.state.theta << ',' << e.state.theta_dot
            << ',' << e.action << ',' << e.cost << ',' << e.reward_so_far << '\n';
    }
}

}  // namespace eql
