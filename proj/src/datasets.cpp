#include "eql/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "eql/errors.hpp"

namespace eql {

namespace {

constexpr double kPi = std::numbers::pi;

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id};
    return std::mt19937_64(seq);
}

Expr x(int i) { return Expr::variable(i); }
Expr c(double v) { return Expr::constant(v); }

}  // namespace

Box Box::cube(int dim, double half_width) {
    return Box{std::vector<double>(dim, -half_width), std::vector<double>(dim, half_width)};
}

bool Box::contains(std::span<const double> p) const {
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (p[i] < lo[i] || p[i] > hi[i]) return false;
    }
    return true;
}

double Dataset::max_abs_target() const {
    double m = 0.0;
    for (const Split* s : {&train, &validation}) {
        for (double v : s->targets.data) m = std::max(m, std::abs(v));
    }
    return m;
}

Dataset sample_from_expr(const std::vector<Expr>& truth, const Box& train_box, const Box& extrap_box,
                         const SampleOptions& opts) {
    if (truth.empty()) throw std::invalid_argument("sample_from_expr: no expressions");
    if (train_box.dim() != extrap_box.dim()) throw std::invalid_argument("sample_from_expr: box dimensions differ");
    for (std::size_t i = 0; i < train_box.dim(); ++i) {
        if (train_box.lo[i] < extrap_box.lo[i] || train_box.hi[i] > extrap_box.hi[i]) {
            throw std::invalid_argument("sample_from_expr: training box must lie inside the extrapolation box");
        }
    }
    const int n_in = static_cast<int>(train_box.dim());
    const int n_out = static_cast<int>(truth.size());

    Dataset ds;
    ds.input_dim = n_in;
    ds.output_dim = n_out;
    ds.train_box = train_box;
    ds.extrap_box = extrap_box;
    ds.sigma = opts.sigma;
    ds.seed = opts.seed;
    ds.truth = truth;

    std::vector<double> point(n_in), target(n_out);
    // Draws one labeled point; returns false if the expression cannot be
    // evaluated there so the caller can redraw.
    auto label = [&](std::mt19937_64& rng, double sigma) {
        std::normal_distribution<double> noise(0.0, 1.0);
        try {
            for (int j = 0; j < n_out; ++j) target[j] = evaluate(truth[j], point);
        } catch (const EvalError&) {
            return false;
        }
        for (int j = 0; j < n_out; ++j) {
            if (!std::isfinite(target[j])) return false;
        }
        if (sigma > 0.0) {
            for (int j = 0; j < n_out; ++j) target[j] += sigma * noise(rng);
        }
        return true;
    };
    auto draw_inside = [&](std::mt19937_64& rng) {
        for (int i = 0; i < n_in; ++i) {
            point[i] = std::uniform_real_distribution<double>(train_box.lo[i], train_box.hi[i])(rng);
        }
    };
    auto draw_outside = [&](std::mt19937_64& rng) {
        do {
            for (int i = 0; i < n_in; ++i) {
                point[i] = std::uniform_real_distribution<double>(extrap_box.lo[i], extrap_box.hi[i])(rng);
            }
        } while (train_box.contains(point));
    };
    auto fill = [&](Split& split, std::size_t n, std::uint32_t id, bool outside, double sigma) {
        auto rng = stream(opts.seed, id);
        split.inputs = Matrix(0, n_in);
        split.targets = Matrix(0, n_out);
        while (split.size() < n) {
            outside ? draw_outside(rng) : draw_inside(rng);
            if (!label(rng, sigma)) continue;
            split.inputs.append(point);
            split.targets.append(target);
        }
    };

    Split all;
    fill(all, opts.n_train, 1, false, opts.sigma);
    const std::size_t n_train = opts.n_train - opts.n_train / 10;
    ds.train.inputs = Matrix(0, n_in);
    ds.train.targets = Matrix(0, n_out);
    ds.validation.inputs = Matrix(0, n_in);
    ds.validation.targets = Matrix(0, n_out);
    for (std::size_t i = 0; i < all.size(); ++i) {
        Split& dst = i < n_train ? ds.train : ds.validation;
        dst.inputs.append(all.inputs.row(i));
        dst.targets.append(all.targets.row(i));
    }
    fill(ds.test_interp, opts.n_test_interp, 2, false, 0.0);
    fill(ds.test_extrap, opts.n_test_extrap, 3, true, 0.0);
    fill(ds.validation_extrap, opts.n_validation_extrap, 4, true, opts.sigma);
    return ds;
}

// ---------------------------------------------------------------------------
// Benchmarks
// ---------------------------------------------------------------------------

Expr division_expr() {
    return Expr::div(Expr::sin(c(kPi) * x(0)), Expr::add({Expr::pow(x(1), 2), c(1.0)}));
}

Dataset gen_division_task(std::size_t n, double sigma, std::uint64_t seed) {
    SampleOptions o;
    o.n_train = n;
    o.sigma = sigma;
    o.seed = seed;
    Dataset ds = sample_from_expr({division_expr()}, Box::cube(2, 1.0), Box::cube(2, 2.0), o);
    ds.name = "division";
    return ds;
}

Expr formula_expr(const std::string& name) {
    const Expr sin_pi_x1 = Expr::sin(c(kPi) * x(0));
    if (name == "F1") {
        return c(1.0 / 3.0) * Expr::add({sin_pi_x1, Expr::sin(Expr::add({c(2 * kPi) * x(1), c(kPi / 8)})), x(1),
                                         Expr::mul({c(-1.0), x(2), x(3)})});
    }
    if (name == "F2") {
        return c(1.0 / 3.0) * Expr::add({sin_pi_x1, x(1) * Expr::cos(Expr::add({c(2 * kPi) * x(0), c(kPi / 4)})),
                                         x(2), Expr::mul({c(-1.0), Expr::pow(x(3), 2)})});
    }
    if (name == "F3") {
        return c(1.0 / 3.0) * Expr::add({Expr::add({c(1.0), x(1)}) * sin_pi_x1, Expr::mul({x(1), x(2), x(3)})});
    }
    if (name == "F4") {
        return c(0.5) * Expr::add({sin_pi_x1, Expr::cos(Expr::mul({c(2.0), x(1), sin_pi_x1})),
                                   Expr::mul({x(1), x(2), x(3)})});
    }
    throw std::invalid_argument("unknown formula '" + name + "'");
}

Dataset gen_formula(const std::string& name, std::size_t n, double sigma, std::uint64_t seed) {
    SampleOptions o;
    o.n_train = n;
    o.sigma = sigma;
    o.seed = seed;
    Dataset ds = sample_from_expr({formula_expr(name)}, Box::cube(4, 1.0), Box::cube(4, 2.0), o);
    ds.name = name;
    return ds;
}

std::vector<Expr> cartpend_exprs() {
    const Expr s = Expr::sin(x(1));
    const Expr co = Expr::cos(x(1));
    const Expr den = Expr::add({Expr::pow(s, 2), c(1.0)});
    const Expr x4sq = Expr::pow(x(3), 2);
    const Expr y3 = Expr::div(Expr::add({Expr::mul({c(-1.0), x(0)}), Expr::mul({c(-0.01), x(2)}), x4sq * s,
                                         Expr::mul({c(0.1), x(3), co}), Expr::mul({c(9.81), s, co})}),
                              den);
    const Expr y4 = Expr::div(Expr::add({Expr::mul({c(-0.2), x(3)}), Expr::mul({c(-19.62), s}), x(0) * co,
                                         Expr::mul({c(0.01), x(2), co}), Expr::mul({c(-1.0), x4sq, s, co})}),
                              den);
    return {x(2), x(3), y3, y4};
}

Dataset gen_cartpend(std::size_t n, double sigma, std::uint64_t seed) {
    SampleOptions o;
    o.n_train = n;
    o.sigma = sigma;
    o.seed = seed;
    Dataset ds = sample_from_expr(cartpend_exprs(), Box::cube(4, 1.0), Box::cube(4, 2.0), o);
    ds.name = "cartpend";
    return ds;
}

// ---------------------------------------------------------------------------
// Random expressions
// ---------------------------------------------------------------------------

namespace {

struct RandomUnit {
    int kind = 0;  // 0 identity, 1 sin, 2 cos, 3 product
    int in_a = 0, in_b = 0;
    double w_a = 0, w_b = 0, b_a = 0, b_b = 0;
};

RandomExpression sample_random_expression(int hidden_layers, std::uint64_t seed, int inputs) {
    constexpr int kPerType = 10;
    constexpr int kWidth = 4 * kPerType;
    auto rng = stream(seed, 17);
    RandomExpression out;
    out.hidden_layers = hidden_layers;
    out.inputs = inputs;
    out.seed = seed;

    auto draw = [&] {
        const double mag = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
        const double v = std::bernoulli_distribution(0.5)(rng) ? -mag : mag;
        out.sampled.push_back(v);
        return v;
    };
    auto pick_two = [&](int n) {
        const int a = std::uniform_int_distribution<int>(0, n - 1)(rng);
        int b = std::uniform_int_distribution<int>(0, n - 2)(rng);
        if (b >= a) ++b;
        return std::pair{a, b};
    };

    std::vector<std::vector<RandomUnit>> layers(hidden_layers, std::vector<RandomUnit>(kWidth));
    for (int l = 0; l < hidden_layers; ++l) {
        const int fan_in = l == 0 ? inputs : kWidth;
        for (int u = 0; u < kWidth; ++u) {
            RandomUnit& r = layers[l][u];
            r.kind = u / kPerType;
            std::tie(r.in_a, r.in_b) = pick_two(fan_in);
            r.w_a = draw();
            r.w_b = draw();
            r.b_a = draw();
            if (r.kind == 3) r.b_b = draw();
            if (r.kind == 1 || r.kind == 2) {
                r.w_a *= kPi;
                r.w_b *= kPi;
                out.trig_weights.push_back(r.w_a);
                out.trig_weights.push_back(r.w_b);
            }
        }
    }
    const auto [o_a, o_b] = pick_two(kWidth);
    const double ow_a = draw(), ow_b = draw(), ob = draw();

    // Build expressions only for units reachable from the output.
    std::vector<std::vector<std::optional<Expr>>> memo(hidden_layers, std::vector<std::optional<Expr>>(kWidth));
    std::function<Expr(int, int)> unit = [&](int l, int u) -> Expr {
        if (memo[l][u]) return *memo[l][u];
        const RandomUnit& r = layers[l][u];
        auto src = [&](int i) { return l == 0 ? Expr::variable(i) : unit(l - 1, i); };
        Expr e;
        if (r.kind == 3) {
            e = Expr::add({c(r.w_a) * src(r.in_a), c(r.b_a)}) * Expr::add({c(r.w_b) * src(r.in_b), c(r.b_b)});
        } else {
            const Expr z = Expr::add({c(r.w_a) * src(r.in_a), c(r.w_b) * src(r.in_b), c(r.b_a)});
            e = r.kind == 0 ? z : r.kind == 1 ? Expr::sin(z) : Expr::cos(z);
        }
        memo[l][u] = e;
        return e;
    };
    const int last = hidden_layers - 1;
    out.expr = Expr::add({c(ow_a) * unit(last, o_a), c(ow_b) * unit(last, o_b), c(ob)});
    return out;
}

bool degenerate(const Expr& e, int inputs, std::uint64_t seed) {
    auto rng = stream(seed, 99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> p(inputs);
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < 1000; ++i) {
        for (auto& v : p) v = u(rng);
        const double y = evaluate(e, p);
        const double d = y - mean;
        mean += d / (i + 1);
        m2 += d * (y - mean);
    }
    return m2 / 999.0 < 1e-6;
}

}  // namespace

RandomExpression gen_random_expression(int hidden_layers, std::uint64_t seed, int inputs) {
    if (hidden_layers < 1) throw std::invalid_argument("random expression needs at least one hidden layer");
    for (std::uint64_t s = seed;; ++s) {
        RandomExpression re = sample_random_expression(hidden_layers, s, inputs);
        if (!degenerate(re.expr, inputs, s)) return re;
    }
}

namespace {

bool parse_re_name(const std::string& name, int& layers, int& instance) {
    if (name.size() != 5 || name.rfind("RE", 0) != 0 || name[3] != '-') return false;
    layers = name[2] - '0';
    instance = name[4] - '0';
    return (layers == 2 || layers == 3) && instance >= 1 && instance <= 4;
}

}  // namespace

Dataset gen_random_expression_task(const std::string& name, std::size_t n, double sigma, std::uint64_t seed) {
    int layers = 0, instance = 0;
    if (!parse_re_name(name, layers, instance)) throw std::invalid_argument("unknown random-expression task '" + name + "'");
    const std::uint64_t expr_seed = seed * 100 + static_cast<std::uint64_t>(layers * 10 + instance);
    const RandomExpression re = gen_random_expression(layers, expr_seed);
    SampleOptions o;
    o.n_train = n;
    o.sigma = sigma;
    o.seed = seed;
    Dataset ds = sample_from_expr({re.expr}, Box::cube(4, 1.0), Box::cube(4, 2.0), o);
    ds.name = name;
    return ds;
}

std::vector<std::string> known_tasks() {
    std::vector<std::string> out{"division", "F1", "F2", "F3", "F4"};
    for (int l : {2, 3})
        for (int k = 1; k <= 4; ++k) out.push_back("RE" + std::to_string(l) + "-" + std::to_string(k));
    out.push_back("cartpend");
    return out;
}

bool is_known_task(const std::string& name) {
    const auto t = known_tasks();
    return std::find(t.begin(), t.end(), name) != t.end();
}

Dataset gen_task(const std::string& name, std::size_t n, double sigma, std::uint64_t seed) {
    if (name == "division") return gen_division_task(n, sigma, seed);
    if (name == "cartpend") return gen_cartpend(n, sigma, seed);
    if (name.size() == 2 && name[0] == 'F') return gen_formula(name, n, sigma, seed);
    if (name.rfind("RE", 0) == 0) return gen_random_expression_task(name, n, sigma, seed);
    throw std::invalid_argument("unknown task '" + name + "'");
}

double constant_zero_rms(const std::vector<Expr>& truth, const Matrix& inputs) {
    if (inputs.rows == 0) throw std::invalid_argument("constant_zero_rms: empty split");
    double acc = 0.0;
    for (std::size_t i = 0; i < inputs.rows; ++i) {
        for (const auto& e : truth) {
            const double y = evaluate(e, inputs.row(i));
            acc += y * y;
        }
    }
    return std::sqrt(acc / static_cast<double>(inputs.rows));
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> numbered(const std::string& prefix, int n) {
    std::vector<std::string> v;
    for (int i = 1; i <= n; ++i) v.push_back(prefix + std::to_string(i));
    return v;
}

const std::vector<std::pair<std::string, Split Dataset::*>>& split_files() {
    static const std::vector<std::pair<std::string, Split Dataset::*>> files{
        {"train.csv", &Dataset::train},
        {"validation.csv", &Dataset::validation},
        {"test_interp.csv", &Dataset::test_interp},
        {"test_extrap.csv", &Dataset::test_extrap},
        {"validation_extrap.csv", &Dataset::validation_extrap},
    };
    return files;
}

}  // namespace

void write_csv(const std::string& path, const Split& split, const std::vector<std::string>& input_names,
               const std::vector<std::string>& target_names) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    bool first = true;
    for (const auto* names : {&input_names, &target_names}) {
        for (const auto& n : *names) {
            out << (first ? "" : ",") << n;
            first = false;
        }
    }
    out << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < split.size(); ++i) {
        const auto a = split.inputs.row(i);
        const auto b = split.targets.row(i);
        for (std::size_t k = 0; k < a.size(); ++k) out << (k ? "," : "") << a[k];
        for (double v : b) out << ',' << v;
        out << '\n';
    }
}

Split read_csv(const std::string& path, int input_dim) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": missing header");
    const auto cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',') + 1);
    if (cols <= static_cast<std::size_t>(input_dim)) throw FormatError(path + ": too few columns");
    Split s;
    s.inputs = Matrix(0, input_dim);
    s.targets = Matrix(0, cols - input_dim);
    std::vector<double> row;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        row.clear();
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || end != cell.data() + cell.size()) {
                throw FormatError(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
            row.push_back(v);
        }
        if (row.size() != cols) throw FormatError(path + ":" + std::to_string(lineno) + ": ragged row");
        s.inputs.append(std::span<const double>(row).first(input_dim));
        s.targets.append(std::span<const double>(row).subspan(input_dim));
    }
    return s;
}

void write_dataset(const std::string& dir, const Dataset& ds) {
    std::filesystem::create_directories(dir);
    const auto xs = numbered("x", ds.input_dim);
    const auto ys = numbered("y", ds.output_dim);
    for (const auto& [file, member] : split_files()) {
        write_csv((std::filesystem::path(dir) / file).string(), ds.*member, xs, ys);
    }
    nlohmann::json m;
    m["format"] = "eql-dataset";
    m["version"] = 1;
    m["name"] = ds.name;
    m["inputs"] = ds.input_dim;
    m["outputs"] = ds.output_dim;
    m["sigma"] = ds.sigma;
    m["seed"] = ds.seed;
    m["train_box"] = {{"lo", ds.train_box.lo}, {"hi", ds.train_box.hi}};
    m["extrap_box"] = {{"lo", ds.extrap_box.lo}, {"hi", ds.extrap_box.hi}};
    m["sizes"] = {{"train", ds.train.size()},
                  {"validation", ds.validation.size()},
                  {"test_interp", ds.test_interp.size()},
                  {"test_extrap", ds.test_extrap.size()},
                  {"validation_extrap", ds.validation_extrap.size()}};
    m["expressions"] = nlohmann::json::array();
    m["expression_trees"] = nlohmann::json::array();
    for (const auto& e : ds.truth) {
        m["expressions"].push_back(render(e));
        m["expression_trees"].push_back(to_json(e));
    }
    std::ofstream out((std::filesystem::path(dir) / "manifest.json").string());
    if (!out) throw IoError("cannot write manifest in " + dir);
    out << m.dump(2) << '\n';
}

Dataset read_dataset(const std::string& dir) {
    const auto manifest = std::filesystem::path(dir) / "manifest.json";
    std::ifstream in(manifest);
    if (!in) throw IoError("cannot read " + manifest.string());
    const nlohmann::json m = nlohmann::json::parse(in);
    if (m.value("format", "") != "eql-dataset" || m.value("version", 0) != 1) {
        throw FormatError(manifest.string() + ": not a version-1 dataset manifest");
    }
    Dataset ds;
    ds.name = m.at("name").get<std::string>();
    ds.input_dim = m.at("inputs").get<int>();
    ds.output_dim = m.at("outputs").get<int>();
    ds.sigma = m.at("sigma").get<double>();
    ds.seed = m.at("seed").get<std::uint64_t>();
    ds.train_box = Box{m.at("train_box").at("lo").get<std::vector<double>>(),
                       m.at("train_box").at("hi").get<std::vector<double>>()};
    ds.extrap_box = Box{m.at("extrap_box").at("lo").get<std::vector<double>>(),
                        m.at("extrap_box").at("hi").get<std::vector<double>>()};
    if (m.contains("expression_trees")) {
        for (const auto& t : m.at("expression_trees")) ds.truth.push_back(from_json(t));
    }
    for (const auto& [file, member] : split_files()) {
        const auto path = std::filesystem::path(dir) / file;
        if (!std::filesystem::exists(path)) continue;
        ds.*member = read_csv(path.string(), ds.input_dim);
    }
    return ds;
}

}  // namespace eql
