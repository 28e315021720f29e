#include "eql/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace eql {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::mt19937_64 stream(std::initializer_list<std::uint64_t> parts) {
    std::vector<std::uint32_t> words;
    for (auto p : parts) {
        words.push_back(static_cast<std::uint32_t>(p));
        words.push_back(static_cast<std::uint32_t>(p >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

}  // namespace

double Schedule::theta(int epoch) const { return 1.0 / std::sqrt(static_cast<double>(epoch) + 1.0); }

Schedule make_schedule(int layers, const ScheduleOverrides& o) {
    if (layers < 2) throw std::invalid_argument("schedule: need at least 2 layers");
    Schedule s;
    s.total_epochs = (layers - 1) * kDeskEpochsPerLayer;
    if (o.epochs_per_layer) s.total_epochs = (layers - 1) * *o.epochs_per_layer;
    if (o.total_epochs) s.total_epochs = *o.total_epochs;
    s.t1 = s.total_epochs / 4;
    s.t2 = s.total_epochs * 19 / 20;
    if (o.penalty_interval) s.penalty_interval = *o.penalty_interval;
    if (o.batch_size) s.batch_size = *o.batch_size;
    if (!(0 < s.t1 && s.t1 < s.t2 && s.t2 < s.total_epochs)) {
        throw std::invalid_argument("schedule: need 0 < t1 < t2 < T (T=" + std::to_string(s.total_epochs) + ")");
    }
    if (s.batch_size < 1) throw std::invalid_argument("schedule: batch size must be positive");
    if (s.penalty_interval < 0) throw std::invalid_argument("schedule: penalty interval must be nonnegative");
    return s;
}

double default_bound(const Dataset& data) { return std::max(10.0, 3.0 * data.max_abs_target()); }

double evaluate(const Network& net, const Split& split, double theta) {
    if (split.size() == 0) throw std::invalid_argument("evaluate: empty split");
    ForwardTrace t;
    double acc = 0.0;
    for (std::size_t i = 0; i < split.size(); ++i) {
        forward(net, split.inputs.row(i), theta, t);
        const auto y = split.targets.row(i);
        for (std::size_t j = 0; j < y.size(); ++j) {
            const double e = t.outputs[j] - y[j];
            acc += e * e;
        }
    }
    return std::sqrt(acc / static_cast<double>(split.size()));
}

Candidate train(Network net, const Dataset& data, const TrainConfig& cfg, TrainObserver* observer) {
    const auto started = std::chrono::steady_clock::now();
    const Schedule& sch = cfg.schedule;
    const std::size_t n = data.train.size();
    if (n == 0 || data.validation.size() == 0) {
        throw std::invalid_argument("train: dataset needs train and validation splits");
    }
    if (net.architecture().inputs != data.input_dim || net.architecture().outputs != data.output_dim) {
        throw std::invalid_argument("train: network and dataset dimensions differ");
    }

    Candidate cand;
    cand.metrics.lambda = cfg.lambda;
    cand.metrics.layers = net.architecture().layers;
    cand.metrics.seed = cfg.seed_index;

    const double bound = cfg.bound > 0.0 ? cfg.bound : default_bound(data);
    const std::size_t batch = static_cast<std::size_t>(sch.batch_size);
    const double penalty_scale =
        cfg.penalty_scale ? *cfg.penalty_scale : static_cast<double>(n) / static_cast<double>(batch);

    AdamState adam(net.parameter_count(), cfg.adam);
    std::vector<double> grad(net.parameter_count());
    ForwardTrace ws;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::vector<std::size_t> identity = order;
    auto shuffle_rng = stream({cfg.seed, 1});
    auto penalty_rng = stream({cfg.seed, 2});
    Matrix unlabeled(n, static_cast<std::size_t>(data.input_dim));
    std::vector<std::uniform_real_distribution<double>> test_range;
    for (std::size_t i = 0; i < data.extrap_box.dim(); ++i) {
        test_range.emplace_back(data.extrap_box.lo[i], data.extrap_box.hi[i]);
    }

    double last_loss = 0.0;
    try {
        for (int t = 0; t < sch.total_epochs; ++t) {
            if (t == sch.t2) {
                if (observer) {
                    const Network before = net;
                    apply_l0_mask_inplace(net);
                    observer->on_l0_mask(before, net);
                } else {
                    apply_l0_mask_inplace(net);
                }
            }
            EpochReport rep;
            rep.epoch = t;
            rep.theta = sch.theta(t);
            rep.penalty_epoch = sch.is_penalty_epoch(t);
            rep.lambda = rep.penalty_epoch ? 0.0 : sch.lambda_at(t, cfg.lambda);

            double loss_sum = 0.0;
            std::size_t steps = 0;
            if (rep.penalty_epoch) {
                // Unlabeled inputs over the whole test range; labels are never read.
                for (std::size_t i = 0; i < n; ++i) {
                    auto row = unlabeled.row(i);
                    for (std::size_t k = 0; k < row.size(); ++k) row[k] = test_range[k](penalty_rng);
                }
                for (std::size_t start = 0; start < n; start += batch) {
                    const std::size_t len = std::min(batch, n - start);
                    const std::span<const std::size_t> rows(identity.data() + start, len);
                    const LossTerms lt =
                        penalty_loss_gradient(net, unlabeled, rows, rep.theta, bound, penalty_scale, grad, ws);
                    adam_update(net.parameters(), grad, adam, net.mask());
                    loss_sum += lt.total();
                    ++steps;
                }
            } else {
                std::shuffle(order.begin(), order.end(), shuffle_rng);
                for (std::size_t start = 0; start < n; start += batch) {
                    const std::size_t len = std::min(batch, n - start);
                    const std::span<const std::size_t> rows(order.data() + start, len);
                    const LossTerms lt = loss_gradient(net, data.train.inputs, data.train.targets, rows, rep.lambda,
                                                       rep.theta, penalty_scale, grad, ws);
                    adam_update(net.parameters(), grad, adam, net.mask());
                    loss_sum += lt.total();
                    ++steps;
                }
            }
            rep.mean_loss = loss_sum / static_cast<double>(steps);
            if (!std::isfinite(rep.mean_loss)) throw NonFiniteActivation(net.layer_count());
            if (!rep.penalty_epoch) last_loss = rep.mean_loss;
            cand.epochs_run = t + 1;
            if (observer) observer->on_epoch_end(rep, net);
        }
        if (sch.t2 >= sch.total_epochs) apply_l0_mask_inplace(net);

        cand.metrics.v_int = evaluate(net, data.validation, kEvalTheta);
        if (data.validation_extrap.size() > 0) cand.metrics.v_ex = evaluate(net, data.validation_extrap, kEvalTheta);
        cand.metrics.sparsity = sparsity(net);
        cand.metrics.final_loss = last_loss;
        if (!std::isfinite(cand.metrics.v_int) || (cand.metrics.v_ex && !std::isfinite(*cand.metrics.v_ex))) {
            throw NonFiniteActivation(net.layer_count());
        }
    } catch (const std::runtime_error& e) {
        // NonFiniteGradient / NonFiniteActivation: keep the run, mark it unusable.
        cand.failure = e.what();
        cand.metrics.failed = true;
        cand.metrics.v_int = kInf;
        if (data.validation_extrap.size() > 0) cand.metrics.v_ex = kInf;
        cand.metrics.sparsity = kInf;
        cand.metrics.final_loss = kInf;
    }
    cand.masked_weights = net.masked_count();
    cand.network = std::move(net);
    cand.metrics.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return cand;
}

std::vector<double> default_lambda_grid() {
    std::vector<double> out;
    for (int k = -60; k <= -35; ++k) out.push_back(std::pow(10.0, k / 10.0));
    return out;
}

std::vector<Candidate> run_grid(const Dataset& data, const GridSpec& spec,
                                const std::function<void(const Candidate&)>& on_done) {
    if (spec.lambdas.empty()) throw std::invalid_argument("grid: empty lambda grid");
    if (spec.depths.empty()) throw std::invalid_argument("grid: empty depth grid");
    if (spec.seeds < 1) throw std::invalid_argument("grid: need at least one seed");

    struct Job {
        std::size_t li, di;
        int si;
    };
    std::vector<Job> jobs;
    for (std::size_t li = 0; li < spec.lambdas.size(); ++li)
        for (std::size_t di = 0; di < spec.depths.size(); ++di)
            for (int si = 0; si < spec.seeds; ++si) jobs.push_back({li, di, si});

    // Validate schedules up front so a bad override fails before any work.
    for (int depth : spec.depths) make_schedule(depth, spec.overrides);

    std::vector<Candidate> results(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex done_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= jobs.size()) return;
            const Job& j = jobs[k];
            const int depth = spec.depths[j.di];
            auto rng = stream({spec.master_seed, j.li, static_cast<std::uint64_t>(depth),
                               static_cast<std::uint64_t>(j.si)});
            const std::uint64_t init_seed = rng();
            Architecture arch;
            arch.layers = depth;
            arch.inputs = data.input_dim;
            arch.outputs = data.output_dim;
            arch.unary = spec.unary;
            arch.product = spec.product;
            TrainConfig cfg;
            cfg.lambda = spec.lambdas[j.li];
            cfg.schedule = make_schedule(depth, spec.overrides);
            cfg.seed = rng();
            cfg.seed_index = j.si;
            cfg.bound = spec.bound;
            Candidate c = train(Network::build(arch, init_seed), data, cfg);
            c.init_seed = init_seed;
            results[k] = std::move(c);
            if (on_done) {
                std::lock_guard lock(done_mutex);
                on_done(results[k]);
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(spec.jobs, static_cast<int>(jobs.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return results;
}

// ---------------------------------------------------------------------------
// Ledger
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

double parse_double(const std::string& s) {
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
    return v;
}

const char* kLedgerHeader = "lambda,layers,seed,v_int,v_ex,sparsity,final_loss,wall_seconds,failed,network";

}  // namespace

void write_ledger(const std::string& path, const std::vector<CandidateMetrics>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "# eql-ledger v" << kLedgerVersion << '\n' << kLedgerHeader << '\n';
    for (const auto& r : rows) {
        out << fmt_double(r.lambda) << ',' << r.layers << ',' << r.seed << ',' << fmt_double(r.v_int) << ','
            << (r.v_ex ? fmt_double(*r.v_ex) : "") << ',' << fmt_double(r.sparsity) << ','
            << fmt_double(r.final_loss) << ',' << fmt_double(r.wall_seconds) << ',' << (r.failed ? 1 : 0) << ','
            << r.network_path << '\n';
    }
}

std::vector<CandidateMetrics> read_ledger(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::string line;
    const std::string want = "# eql-ledger v" + std::to_string(kLedgerVersion);
    if (!std::getline(in, line) || line != want) {
        throw FormatError(path + ": ledger version mismatch (expected '" + want + "')");
    }
    if (!std::getline(in, line) || line != kLedgerHeader) throw FormatError(path + ": unexpected ledger header");
    std::vector<CandidateMetrics> rows;
    std::size_t lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (cells.size() != 10) throw FormatError(path + ":" + std::to_string(lineno) + ": expected 10 columns");
        try {
            CandidateMetrics r;
            r.lambda = parse_double(cells[0]);
            r.layers = std::stoi(cells[1]);
            r.seed = std::stoi(cells[2]);
            r.v_int = parse_double(cells[3]);
            if (!cells[4].empty()) r.v_ex = parse_double(cells[4]);
            r.sparsity = parse_double(cells[5]);
            r.final_loss = parse_double(cells[6]);
            r.wall_seconds = parse_double(cells[7]);
            r.failed = cells[8] == "1";
            r.network_path = cells[9];
            rows.push_back(std::move(r));
        } catch (const std::logic_error& e) {
            throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

}  // namespace eql
