// Command-line driver: data generation, grid training, model selection,
// expression extraction, evaluation and cart-pole control.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eql/cartpole.hpp"
#include "eql/datasets.hpp"
#include "eql/errors.hpp"
#include "eql/extract.hpp"
#include "eql/network.hpp"
#include "eql/selection.hpp"
#include "eql/trainer.hpp"

namespace fs = std::filesystem;
using namespace eql;

namespace {

enum Exit : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kUnknownTask = 3,
    kIo = 4,
    kFormat = 5,
    kSelection = 6,
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownTask : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SelectionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Relative output paths land under $EQL_OUTPUT_DIR when it is set.
std::string output_path(const std::string& p) {
    const char* root = std::getenv("EQL_OUTPUT_DIR");
    if (!root || !*root || fs::path(p).is_absolute()) return p;
    return (fs::path(root) / p).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir);
    const fs::path probe = fs::path(dir) / ".eql-write-test";
    std::ofstream f(probe);
    if (!f) throw IoError("directory not writable: " + dir);
    f.close();
    fs::remove(probe, ec);
}

void ensure_parent(const std::string& file) {
    const fs::path parent = fs::path(file).parent_path();
    if (!parent.empty()) ensure_dir(parent.string());
}

void require_file(const std::string& path) {
    if (!fs::exists(path)) throw IoError("no such file: " + path);
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Accepts plain numbers and decimal exponents such as 1e-4.5.
double parse_number(const std::string& text) {
    const auto e = text.find_first_of("eE");
    try {
        if (e != std::string::npos && text.find('.', e) != std::string::npos) {
            return std::stod(text.substr(0, e)) * std::pow(10.0, std::stod(text.substr(e + 1)));
        }
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::logic_error&) {
        throw UsageError("not a number: '" + text + "'");
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_lambdas(const std::string& text) {
    if (text == "default") return default_lambda_grid();
    std::vector<double> out;
    for (const auto& s : split_list(text)) out.push_back(parse_number(s));
    if (out.empty()) throw UsageError("empty lambda grid");
    return out;
}

std::vector<int> parse_depths(const std::string& text) {
    std::vector<int> out;
    for (const auto& s : split_list(text)) {
        const double v = parse_number(s);
        if (v != std::floor(v)) throw UsageError("depth must be an integer: '" + s + "'");
        out.push_back(static_cast<int>(v));
    }
    if (out.empty()) throw UsageError("empty depth list");
    return out;
}

// Grid options --------------------------------------------------------------------

struct GridOptions {
    std::string lambda_grid = "default";
    std::string depths = "2,3,4";
    int seeds = 1;
    int epochs = 0;            // total T; 0 = use epochs_per_layer
    int epochs_per_layer = 0;  // 0 = desk default of 2000
    int penalty_interval = 50;
    int batch_size = 20;
    int jobs = 1;
    std::uint64_t seed = 0;
    double bound = 0.0;
    std::string config;
};

void add_grid_flags(CLI::App* cmd, GridOptions& g) {
    cmd->add_option("--lambda-grid", g.lambda_grid, "comma-separated lambdas, or 'default'");
    cmd->add_option("--depths", g.depths, "comma-separated layer counts");
    cmd->add_option("--seeds", g.seeds, "instances per (lambda, depth)");
    cmd->add_option("--epochs", g.epochs, "total epochs T (overrides the per-layer default)");
    cmd->add_option("--epochs-per-layer", g.epochs_per_layer, "T = value * (L - 1)");
    cmd->add_option("--penalty-interval", g.penalty_interval, "every n-th epoch is a penalty epoch");
    cmd->add_option("--batch-size", g.batch_size, "minibatch size");
    cmd->add_option("--jobs", g.jobs, "parallel training jobs");
    cmd->add_option("--seed", g.seed, "master seed");
    cmd->add_option("--bound", g.bound, "output bound for penalty epochs (0 = automatic)");
    cmd->add_option("--config", g.config, "key=value file; command-line flags take precedence");
}

// Applies config-file keys that were not given on the command line.
void apply_config(CLI::App* cmd, GridOptions& g) {
    if (g.config.empty()) return;
    require_file(g.config);
    std::ifstream in(g.config);
    if (!in) throw IoError("cannot read " + g.config);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line.erase(0, line.find_first_not_of(" \t\r"));
        line.erase(line.find_last_not_of(" \t\r") + 1);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(g.config + ":" + std::to_string(lineno) + ": expected key=value");
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        key.erase(key.find_last_not_of(" \t") + 1);
        value.erase(0, value.find_first_not_of(" \t"));
        std::replace(key.begin(), key.end(), '_', '-');
        if (key == "config") throw UsageError(g.config + ": unknown config key 'config'");
        CLI::Option* opt = nullptr;
        try {
            opt = cmd->get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw UsageError(g.config + ":" + std::to_string(lineno) + ": unknown config key '" + key + "'");
        }
        if (opt->count() > 0) continue;
        try {
            opt->add_result(value);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw UsageError(g.config + ": bad value for '" + key + "': " + e.what());
        }
    }
}

GridSpec make_grid_spec(const GridOptions& g) {
    GridSpec spec;
    spec.lambdas = parse_lambdas(g.lambda_grid);
    spec.depths = parse_depths(g.depths);
    spec.seeds = g.seeds;
    spec.master_seed = g.seed;
    spec.jobs = g.jobs;
    spec.bound = g.bound;
    if (g.epochs > 0) spec.overrides.total_epochs = g.epochs;
    if (g.epochs_per_layer > 0) spec.overrides.epochs_per_layer = g.epochs_per_layer;
    spec.overrides.penalty_interval = g.penalty_interval;
    spec.overrides.batch_size = g.batch_size;
    if (spec.seeds < 1) throw UsageError("--seeds must be at least 1");
    for (int d : spec.depths) {
        if (d < 2 || d > 4) throw UsageError("depths must be 2, 3 or 4");
        try {
            make_schedule(d, spec.overrides);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    return spec;
}

// Trains the grid, writes nets/ and ledger.csv into `out_dir`, returns the rows.
std::vector<CandidateMetrics> run_grid_to_dir(const Dataset& data, const GridSpec& spec, const std::string& out_dir) {
    ensure_dir(out_dir);
    ensure_dir((fs::path(out_dir) / "nets").string());
    std::size_t finished = 0;
    const std::size_t total = spec.lambdas.size() * spec.depths.size() * static_cast<std::size_t>(spec.seeds);
    auto progress = [&](const Candidate& c) {
        ++finished;
        std::cerr << "[" << finished << "/" << total << "] lambda=" << num(c.metrics.lambda)
                  << " L=" << c.metrics.layers << " seed=" << c.metrics.seed << " v_int=" << num(c.metrics.v_int)
                  << " s=" << num(c.metrics.sparsity) << (c.metrics.failed ? " FAILED: " + c.failure : "") << '\n';
    };
    auto candidates = run_grid(data, spec, progress);
    std::vector<CandidateMetrics> rows;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "cand_%04zu.eql", i);
        const std::string rel = (fs::path("nets") / name).string();
        save_network((fs::path(out_dir) / rel).string(), candidates[i].network);
        candidates[i].metrics.network_path = rel;
        rows.push_back(candidates[i].metrics);
    }
    write_ledger((fs::path(out_dir) / "ledger.csv").string(), rows);
    return rows;
}

std::string describe(const CandidateMetrics& c) {
    std::ostringstream os;
    os << "lambda=" << num(c.lambda) << " layers=" << c.layers << " seed=" << c.seed << " v_int=" << num(c.v_int);
    if (c.v_ex) os << " v_ex=" << num(*c.v_ex);
    os << " s=" << num(c.sparsity);
    return os.str();
}

// Commands ------------------------------------------------------------------------

struct GenDataOptions {
    std::string task;
    std::uint64_t seed = 0;
    double sigma = 0.01;
    std::size_t n = 10000;
    std::string out;
};

int cmd_gen_data(const GenDataOptions& o) {
    if (!is_known_task(o.task)) throw UnknownTask("unknown task '" + o.task + "'");
    const std::string dir = output_path(o.out.empty() ? "data/" + o.task : o.out);
    ensure_dir(dir);
    const Dataset ds = gen_task(o.task, o.n, o.sigma, o.seed);
    write_dataset(dir, ds);
    std::cout << "wrote " << dir << '\n';
    for (std::size_t j = 0; j < ds.truth.size(); ++j) std::cout << "y" << j + 1 << " = " << render(ds.truth[j]) << '\n';
    return kOk;
}

int cmd_grid(const std::string& dataset_dir, const std::string& out, const GridOptions& g) {
    require_file((fs::path(dataset_dir) / "manifest.json").string());
    const Dataset ds = read_dataset(dataset_dir);
    const GridSpec spec = make_grid_spec(g);
    const std::string dir = output_path(out.empty() ? (fs::path(dataset_dir) / "grid").string() : out);
    const auto rows = run_grid_to_dir(ds, spec, dir);
    std::cout << "ledger " << (fs::path(dir) / "ledger.csv").string() << " (" << rows.size() << " candidates)\n";
    return kOk;
}

struct SelectOptions {
    std::string ledger;
    std::string mode;
    double alpha = -1, beta = -1, gamma = -1;
    std::string report;
};

int cmd_select(const SelectOptions& o) {
    require_file(o.ledger);
    const auto rows = read_ledger(o.ledger);
    if (rows.empty()) throw SelectionMismatch("ledger has no candidates");
    SelectionWeights w;
    if (o.mode == "vint-s") {
        w = SelectionWeights::vint_s();
    } else if (o.mode == "vint-ex") {
        w = SelectionWeights::vint_ex();
    } else {
        throw UsageError("mode must be vint-s or vint-ex");
    }
    if (o.alpha >= 0) w.alpha = o.alpha;
    if (o.beta >= 0) w.beta = o.beta;
    if (o.gamma >= 0) w.gamma = o.gamma;
    if (w.gamma > 0) {
        for (const auto& r : rows) {
            if (!r.v_ex) throw SelectionMismatch("selection with gamma > 0 needs the v_ex column, which is empty");
        }
    }
    const auto result = select(rows, w);
    const auto& best = rows[result.index];
    const fs::path net = fs::path(o.ledger).parent_path() / best.network_path;
    const std::string report =
        output_path(o.report.empty() ? (fs::path(o.ledger).parent_path() / "selection.json").string() : o.report);
    ensure_parent(report);
    write_selection_report(report, rows, w, result);
    std::cout << "selected " << describe(best) << '\n' << "network " << net.string() << '\n';
    return kOk;
}

int cmd_extract(const std::string& net_path, double tolerance, const std::string& json_out) {
    require_file(net_path);
    const Network net = load_network(net_path);
    const auto exprs = extract(net, tolerance);
    nlohmann::json j;
    j["tolerance"] = tolerance;
    j["outputs"] = nlohmann::json::array();
    for (std::size_t k = 0; k < exprs.size(); ++k) {
        const Expr s = simplify(exprs[k]);
        const std::string text = render(s);
        if (exprs.size() == 1) {
            std::cout << text << '\n';
        } else {
            std::cout << "y" << k + 1 << " = " << text << '\n';
        }
        j["outputs"].push_back({{"name", "y" + std::to_string(k + 1)}, {"text", text}, {"tree", to_json(s)}});
    }
    const std::string path = output_path(json_out.empty() ? net_path + ".json" : json_out);
    ensure_parent(path);
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << j.dump(2) << '\n';
    return kOk;
}

int cmd_eval(const std::string& net_path, const std::string& dataset_dir, const std::string& plot, int points) {
    require_file(net_path);
    require_file((fs::path(dataset_dir) / "manifest.json").string());
    const Network net = load_network(net_path);
    const Dataset ds = read_dataset(dataset_dir);
    if (net.architecture().inputs != ds.input_dim || net.architecture().outputs != ds.output_dim) {
        throw FormatError("network and dataset dimensions differ");
    }
    std::cout << "interp_rms " << num(evaluate(net, ds.test_interp)) << '\n'
              << "extrap_rms " << num(evaluate(net, ds.test_extrap)) << '\n';
    if (!plot.empty()) {
        const std::string path = output_path(plot);
        ensure_parent(path);
        std::ofstream f(path);
        if (!f) throw IoError("cannot write " + path);
        double lo = 0.0, hi = 0.0;
        for (std::size_t i = 0; i < ds.extrap_box.dim(); ++i) {
            lo = i ? std::min(lo, ds.extrap_box.lo[i]) : ds.extrap_box.lo[i];
            hi = i ? std::max(hi, ds.extrap_box.hi[i]) : ds.extrap_box.hi[i];
        }
        f << "# x";
        for (int j = 0; j < ds.output_dim; ++j) f << " net_y" << j + 1;
        for (std::size_t j = 0; j < ds.truth.size(); ++j) f << " true_y" << j + 1;
        f << '\n';
        for (int p = 0; p < points; ++p) {
            const double x = lo + (hi - lo) * p / std::max(points - 1, 1);
            const std::vector<double> in(ds.input_dim, x);
            f << num(x);
            try {
                for (double y : predict(net, in)) f << ' ' << num(y);
            } catch (const NonFiniteActivation&) {
                for (int j = 0; j < ds.output_dim; ++j) f << " nan";
            }
            for (const auto& e : ds.truth) {
                try {
                    f << ' ' << num(eql::evaluate(e, in));
                } catch (const EvalError&) {
                    f << " nan";
                }
            }
            f << '\n';
        }
    }
    return kOk;
}

// Control ---------------------------------------------------------------------------

struct CollectOptions {
    int rollouts = 2;
    int steps = 1000;
    std::uint64_t seed = 0;
    std::string out = "data/cartpole";
};

int cmd_control_collect(const CollectOptions& o) {
    if (o.rollouts < 2) throw UsageError("--rollouts must be at least 2");
    if (o.steps < 1) throw UsageError("--steps must be positive");
    const std::string dir = output_path(o.out);
    ensure_dir(dir);
    RolloutOptions ro;
    ro.rollouts = o.rollouts;
    ro.steps = o.steps;
    ro.seed = o.seed;
    const RolloutSet set = collect_rollouts(ro);
    for (std::size_t k = 0; k < set.training.size(); ++k) {
        write_trajectory_csv((fs::path(dir) / ("rollout_train_" + std::to_string(k + 1) + ".csv")).string(),
                             set.training[k]);
    }
    write_trajectory_csv((fs::path(dir) / "rollout_validation.csv").string(), set.validation);
    write_dataset(dir, rollout_dataset(set, o.seed));
    std::cout << "wrote " << set.training.size() << " training rollouts and 1 validation rollout to " << dir << '\n';
    return kOk;
}

int cmd_control_train(const std::string& dir, const std::string& model_out, const GridOptions& g) {
    require_file((fs::path(dir) / "manifest.json").string());
    const Dataset ds = read_dataset(dir);
    if (ds.input_dim != 5 || ds.output_dim != 4) throw FormatError(dir + ": not a cart-pole rollout dataset");
    const GridSpec spec = make_grid_spec(g);
    const std::string grid_dir = output_path((fs::path(dir) / "grid").string());
    const auto rows = run_grid_to_dir(ds, spec, grid_dir);
    const auto result = select(rows, SelectionWeights::vint_ex());
    const auto& best = rows[result.index];
    write_selection_report((fs::path(grid_dir) / "selection.json").string(), rows, SelectionWeights::vint_ex(), result);
    const std::string model = output_path(model_out.empty() ? (fs::path(dir) / "model.eql").string() : model_out);
    ensure_parent(model);
    save_network(model, load_network((fs::path(grid_dir) / best.network_path).string()));
    std::cout << "selected " << describe(best) << '\n' << "model " << model << '\n';
    return kOk;
}

struct RunOptions {
    std::string model;
    bool truth = false;
    int steps = 1000;
    std::uint64_t seed = 0;
    MpcConfig mpc;
    double state_noise = 0.0;
    double action_noise = 0.0;
    std::string log = "episode.csv";
};

int cmd_control_run(const RunOptions& o) {
    if (o.truth == !o.model.empty()) throw UsageError("give either a model file or --truth");
    if (o.mpc.n_rollouts < 1 || o.mpc.horizon < 1) throw UsageError("--samples and --horizon must be positive");
    std::unique_ptr<DynamicsModel> model;
    if (o.truth) {
        model = std::make_unique<TrueDynamics>();
    } else {
        require_file(o.model);
        model = std::make_unique<NetworkDynamics>(load_network(o.model));
    }
    EpisodeOptions eo;
    eo.steps = o.steps;
    eo.seed = o.seed;
    eo.state_noise = o.state_noise;
    eo.action_noise = o.action_noise;
    const EpisodeResult ep = run_episode(*model, o.mpc, eo);
    const std::string log = output_path(o.log);
    ensure_parent(log);
    write_episode_csv(log, ep);
    std::cout << "R = " << num(ep.reward) << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equation learner with division units"};
    app.require_subcommand(1);

    GenDataOptions gen;
    auto* c_gen = app.add_subcommand("gen-data", "generate a benchmark dataset");
    c_gen->add_option("task", gen.task, "division, F1..F4, RE2-1..RE3-4, cartpend")->required();
    c_gen->add_option("--seed", gen.seed, "sampling seed");
    c_gen->add_option("--sigma", gen.sigma, "noise standard deviation");
    c_gen->add_option("--n", gen.n, "points before the train/validation split");
    c_gen->add_option("--out", gen.out, "output directory (default data/<task>)");

    std::string grid_data, grid_out;
    GridOptions grid;
    auto* c_grid = app.add_subcommand("grid", "train a hyperparameter grid");
    c_grid->add_option("dataset", grid_data, "dataset directory")->required();
    c_grid->add_option("--out", grid_out, "output directory (default <dataset>/grid)");
    add_grid_flags(c_grid, grid);

    SelectOptions sel;
    auto* c_sel = app.add_subcommand("select", "pick a candidate from a ledger");
    c_sel->add_option("ledger", sel.ledger, "ledger CSV")->required();
    c_sel->add_option("mode", sel.mode, "vint-s or vint-ex")->required();
    c_sel->add_option("--alpha", sel.alpha, "weight of the interpolation error");
    c_sel->add_option("--beta", sel.beta, "weight of the sparsity");
    c_sel->add_option("--gamma", sel.gamma, "weight of the extrapolation error");
    c_sel->add_option("--report", sel.report, "report path (default next to the ledger)");

    std::string ex_net, ex_json;
    double ex_tol = 1e-3;
    auto* c_ex = app.add_subcommand("extract", "print the learned equations");
    c_ex->add_option("network", ex_net, "network file")->required();
    c_ex->add_option("--tolerance", ex_tol, "drop parameters below this magnitude");
    c_ex->add_option("--json", ex_json, "JSON output path (default <network>.json)");

    std::string ev_net, ev_data, ev_plot;
    int ev_points = 401;
    auto* c_ev = app.add_subcommand("eval", "interpolation and extrapolation RMS");
    c_ev->add_option("network", ev_net, "network file")->required();
    c_ev->add_option("dataset", ev_data, "dataset directory")->required();
    c_ev->add_option("--plot", ev_plot, "gnuplot data along x1 = ... = xn");
    c_ev->add_option("--points", ev_points, "plot resolution")->check(CLI::PositiveNumber);

    auto* c_ctl = app.add_subcommand("control", "cart-pole swing-up");
    c_ctl->require_subcommand(1);

    CollectOptions col;
    auto* c_col = c_ctl->add_subcommand("collect", "random rollouts");
    c_col->add_option("--rollouts", col.rollouts, "K: K-1 training rollouts plus one validation rollout");
    c_col->add_option("--steps", col.steps, "steps per rollout");
    c_col->add_option("--seed", col.seed, "seed");
    c_col->add_option("--out", col.out, "output directory");

    std::string tr_dir, tr_model;
    GridOptions tr;
    tr.lambda_grid = "1e-5,1e-4";
    tr.depths = "2";
    tr.seeds = 2;
    auto* c_tr = c_ctl->add_subcommand("train", "fit a forward model to collected rollouts");
    c_tr->add_option("dataset", tr_dir, "directory written by 'control collect'")->required();
    c_tr->add_option("--out", tr_model, "model path (default <dataset>/model.eql)");
    add_grid_flags(c_tr, tr);

    RunOptions run;
    auto* c_run = c_ctl->add_subcommand("run", "closed-loop MPC episode");
    c_run->add_option("model", run.model, "forward model network file");
    c_run->add_flag("--truth", run.truth, "use the true dynamics as the forward model");
    c_run->add_option("--steps", run.steps, "episode length");
    c_run->add_option("--seed", run.seed, "seed");
    c_run->add_option("--samples", run.mpc.n_rollouts, "action sequences per step");
    c_run->add_option("--horizon", run.mpc.horizon, "look-ahead steps");
    c_run->add_option("--action-sigma", run.mpc.action_sigma, "shooting action standard deviation");
    c_run->add_option("--state-noise", run.state_noise, "observation noise standard deviation");
    c_run->add_option("--action-noise", run.action_noise, "actuation noise standard deviation");
    c_run->add_option("--jobs", run.mpc.jobs, "threads for shooting");
    c_run->add_option("--log", run.log, "episode log CSV (gnuplot-readable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*c_gen) return cmd_gen_data(gen);
        if (*c_grid) {
            apply_config(c_grid, grid);
            return cmd_grid(grid_data, grid_out, grid);
        }
        if (*c_sel) return cmd_select(sel);
        if (*c_ex) return cmd_extract(ex_net, ex_tol, ex_json);
        if (*c_ev) return cmd_eval(ev_net, ev_data, ev_plot, ev_points);
        if (*c_col) return cmd_control_collect(col);
        if (*c_tr) {
            apply_config(c_tr, tr);
            return cmd_control_train(tr_dir, tr_model, tr);
        }
        if (*c_run) return cmd_control_run(run);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const UnknownTask& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUnknownTask;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFormat;
    } catch (const SelectionMismatch& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSelection;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}
