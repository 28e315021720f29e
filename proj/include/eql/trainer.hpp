#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eql/datasets.hpp"
#include "eql/kernels.hpp"
#include "eql/network.hpp"

namespace eql {

/// Epoch plan: unregularized until t1, L1 until t2, then L0-masked with no L1.
struct Schedule {
    int total_epochs = 10000;
    int t1 = 2500;
    int t2 = 9500;
    int penalty_interval = 50;
    int batch_size = 20;

    /// Division threshold used in epoch t.
    double theta(int epoch) const;
    double lambda_at(int epoch, double lambda) const { return epoch >= t1 && epoch < t2 ? lambda : 0.0; }
    /// Every penalty_interval-th epoch (epochs 49, 99, ... by default).
    bool is_penalty_epoch(int epoch) const {
        return penalty_interval > 0 && (epoch + 1) % penalty_interval == 0;
    }
};

inline constexpr int kFullEpochsPerLayer = 10000;
inline constexpr int kDeskEpochsPerLayer = 2000;

struct ScheduleOverrides {
    std::optional<int> total_epochs;      // T directly
    std::optional<int> epochs_per_layer;  // T = value * (L - 1)
    std::optional<int> penalty_interval;
    std::optional<int> batch_size;
};

/// T = (L-1) * 2000 unless overridden (kFullEpochsPerLayer gives (L-1) * 10000);
/// t1 = T/4, t2 = 19T/20. Throws
/// std::invalid_argument when the result violates 0 < t1 < t2 < T.
Schedule make_schedule(int layers, const ScheduleOverrides& overrides = {});

/// Metrics of one trained instance; also the row type of the ledger.
struct CandidateMetrics {
    double lambda = 0.0;
    int layers = 2;
    int seed = 0;
    double v_int = 0.0;
    std::optional<double> v_ex;
    double sparsity = 0.0;  // +inf for failed runs
    double final_loss = 0.0;
    double wall_seconds = 0.0;
    bool failed = false;
    std::string network_path;
};

struct Candidate {
    Network network;
    CandidateMetrics metrics;
    std::uint64_t init_seed = 0;
    std::string failure;
    int epochs_run = 0;
    std::size_t masked_weights = 0;
};

struct TrainConfig {
    double lambda = 0.0;
    Schedule schedule;
    std::uint64_t seed = 0;   // shuffling and penalty-epoch sampling
    int seed_index = 0;       // recorded in the candidate
    double bound = 0.0;       // output bound B; <= 0 picks max(10, 3 * max|y_train|)
    std::optional<double> penalty_scale;  // default: N_train / batch_size
    AdamConfig adam;
};

struct EpochReport {
    int epoch = 0;
    double theta = 0.0;
    double lambda = 0.0;  // L1 strength actually applied in this epoch
    bool penalty_epoch = false;
    double mean_loss = 0.0;
};

class TrainObserver {
public:
    virtual ~TrainObserver() = default;
    virtual void on_epoch_end(const EpochReport&, const Network&) {}
    virtual void on_l0_mask(const Network& /*before*/, const Network& /*after*/) {}
};

/// Output bound used by penalty epochs when TrainConfig::bound is unset.
double default_bound(const Dataset& data);

/// Runs the full schedule on a private copy of `net`. Divergence produces a
/// failed candidate (v_int = s = +inf) instead of an exception.
Candidate train(Network net, const Dataset& data, const TrainConfig& cfg, TrainObserver* observer = nullptr);

/// sqrt(mean_i ||net(x_i) - y_i||^2). Throws std::invalid_argument on an empty split.
double evaluate(const Network& net, const Split& split, double theta = kEvalTheta);

/// lambda in 10^{-6, -5.9, ..., -3.5}.
std::vector<double> default_lambda_grid();

struct GridSpec {
    std::vector<double> lambdas;
    std::vector<int> depths;
    int seeds = 1;
    std::uint64_t master_seed = 0;
    ScheduleOverrides overrides;
    int jobs = 1;
    double bound = 0.0;
    int unary = 30;
    int product = 10;
};

/// Trains one candidate per (lambda, depth, seed) in that nesting order. The
/// result order and every candidate's content are independent of `jobs`.
std::vector<Candidate> run_grid(const Dataset& data, const GridSpec& spec,
                                const std::function<void(const Candidate&)>& on_done = {});

// Ledger ----------------------------------------------------------------------

inline constexpr int kLedgerVersion = 1;

/// CSV: a "# eql-ledger v1" line, a header, one row per candidate.
void write_ledger(const std::string& path, const std::vector<CandidateMetrics>& rows);
/// Throws FormatError on a mismatched version line or malformed row and
/// std::runtime_error when the file cannot be read.
std::vector<CandidateMetrics> read_ledger(const std::string& path);

}  // namespace eql
