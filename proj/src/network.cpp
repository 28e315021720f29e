#include "eql/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace eql {

UnitKind Architecture::unary_kind(int index) const {
    const int block = unary / 3;
    if (index < block) return UnitKind::identity;
    if (index < 2 * block) return UnitKind::sine;
    return UnitKind::cosine;
}

void Architecture::validate() const {
    if (layers < 2 || layers > 4) throw std::invalid_argument("layer count must be 2, 3 or 4");
    if (inputs < 1) throw std::invalid_argument("input dimension must be positive");
    if (outputs < 1) throw std::invalid_argument("output dimension must be positive");
    if (unary < 0 || unary % 3 != 0) throw std::invalid_argument("unary unit count must be a multiple of 3");
    if (product < 0) throw std::invalid_argument("product unit count must be nonnegative");
    if (hidden_width() == 0) throw std::invalid_argument("hidden layers need at least one unit");
}

Network::Network(const Architecture& arch) : arch_(arch) {
    arch_.validate();
    std::size_t offset = 0;
    int cols = arch_.inputs;
    for (int l = 0; l < arch_.layers; ++l) {
        const bool last = l == arch_.layers - 1;
        LayerShape s;
        s.rows = last ? 2 * arch_.outputs : arch_.hidden_preactivations();
        s.cols = cols;
        s.weight_offset = offset;
        offset += static_cast<std::size_t>(s.rows) * s.cols;
        s.bias_offset = offset;
        offset += s.rows;
        shapes_.push_back(s);
        cols = arch_.hidden_width();
    }
    params_.assign(offset, 0.0);
    mask_.assign(offset, 0);
    is_weight_.assign(offset, 0);
    for (const auto& s : shapes_) {
        std::fill_n(is_weight_.begin() + static_cast<std::ptrdiff_t>(s.weight_offset),
                    static_cast<std::size_t>(s.rows) * s.cols, std::uint8_t{1});
    }
}

Network Network::build(const Architecture& arch, std::uint64_t seed) {
    Network net(arch);
    std::mt19937_64 rng(seed);
    for (const auto& s : net.shapes_) {
        std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(s.cols)));
        const std::size_t n = static_cast<std::size_t>(s.rows) * s.cols;
        for (std::size_t i = 0; i < n; ++i) net.params_[s.weight_offset + i] = dist(rng);
    }
    return net;
}

std::size_t Network::masked_count() const {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

double Network::l1_norm() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (is_weight_[i]) acc += std::abs(params_[i]);
    }
    return acc;
}

NonFiniteActivation::NonFiniteActivation(int layer)
    : std::runtime_error("non-finite activation in layer " + std::to_string(layer)), layer_(layer) {}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

namespace {

void prepare(const Network& net, ForwardTrace& t) {
    const Architecture& a = net.architecture();
    const int L = net.layer_count();
    if (static_cast<int>(t.preactivations.size()) == L && t.outputs.size() == static_cast<std::size_t>(a.outputs)) {
        return;
    }
    t.preactivations.resize(L);
    for (int l = 0; l < L; ++l) t.preactivations[l].assign(net.shape(l).rows, 0.0);
    t.activations.assign(L - 1, std::vector<double>(a.hidden_width(), 0.0));
    t.unit_slopes.assign(L - 1, std::vector<double>(a.unary, 0.0));
    t.denominators.assign(a.outputs, 0.0);
    t.outputs.assign(a.outputs, 0.0);
}

bool all_finite(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * 0.0;
    return acc == 0.0;
}

// Fills the trace. When `slopes` is set, unary unit derivatives are stored too.
void run_forward(const Network& net, std::span<const double> x, double theta, ForwardTrace& t, bool slopes) {
    const Architecture& a = net.architecture();
    const int L = net.layer_count();
    std::span<const double> input = x;
    const int block = a.unary / 3;
    for (int l = 0; l < L; ++l) {
        auto& z = t.preactivations[l];
        linear_forward(net.weights(l), net.biases(l), input, z);
        if (l == L - 1) break;
        if (!all_finite(z)) throw NonFiniteActivation(l + 1);
        auto& y = t.activations[l];
        auto& d = t.unit_slopes[l];
        for (int i = 0; i < block; ++i) {
            y[i] = z[i];
            d[i] = 1.0;
        }
        for (int i = block; i < 2 * block; ++i) {
            y[i] = std::sin(z[i]);
            if (slopes) d[i] = std::cos(z[i]);
        }
        for (int i = 2 * block; i < a.unary; ++i) {
            y[i] = std::cos(z[i]);
            if (slopes) d[i] = -std::sin(z[i]);
        }
        for (int k = 0; k < a.product; ++k) {
            y[a.unary + k] = z[a.unary + 2 * k] * z[a.unary + 2 * k + 1];
        }
        input = y;
    }
    const auto& zo = t.preactivations[L - 1];
    for (int j = 0; j < a.outputs; ++j) {
        t.denominators[j] = zo[2 * j + 1];
        t.outputs[j] = div_forward(zo[2 * j], zo[2 * j + 1], theta);
    }
    if (!all_finite(zo) || !all_finite(t.outputs)) throw NonFiniteActivation(L);
}

// Backpropagates d(loss)/d(output preactivations), stored in `dz_out`, into
// `grad`. `scratch` holds two buffers sized to the widest layer.
void run_backward(const Network& net, std::span<const double> x, const ForwardTrace& t,
                  std::vector<double>& dz, std::vector<double>& dy, std::span<double> grad) {
    const Architecture& a = net.architecture();
    const int L = net.layer_count();
    for (int l = L - 1; l >= 0; --l) {
        const LayerShape& s = net.shape(l);
        std::span<const double> input = l == 0 ? x : std::span<const double>(t.activations[l - 1]);
        double* gw = grad.data() + s.weight_offset;
        double* gb = grad.data() + s.bias_offset;
        for (int r = 0; r < s.rows; ++r) {
            const double g = dz[r];
            gb[r] += g;
            if (g == 0.0) continue;
            double* row = gw + static_cast<std::size_t>(r) * s.cols;
            for (int c = 0; c < s.cols; ++c) row[c] += g * input[c];
        }
        if (l == 0) break;

        // dy = W^T dz
        std::fill_n(dy.begin(), s.cols, 0.0);
        const auto W = net.weights(l);
        for (int r = 0; r < s.rows; ++r) {
            const double g = dz[r];
            if (g == 0.0) continue;
            const double* row = W.data() + static_cast<std::size_t>(r) * s.cols;
            for (int c = 0; c < s.cols; ++c) dy[c] += g * row[c];
        }
        // Through the hidden units of layer l-1.
        const auto& z = t.preactivations[l - 1];
        const auto& d = t.unit_slopes[l - 1];
        for (int i = 0; i < a.unary; ++i) dz[i] = dy[i] * d[i];
        for (int k = 0; k < a.product; ++k) {
            const double g = dy[a.unary + k];
            dz[a.unary + 2 * k] = g * z[a.unary + 2 * k + 1];
            dz[a.unary + 2 * k + 1] = g * z[a.unary + 2 * k];
        }
    }
}

std::size_t widest(const Network& net) {
    std::size_t w = 0;
    for (int l = 0; l < net.layer_count(); ++l) {
        w = std::max<std::size_t>(w, net.shape(l).rows);
        w = std::max<std::size_t>(w, net.shape(l).cols);
    }
    return w;
}

void add_l1_gradient(const Network& net, double lambda, std::span<double> grad) {
    if (lambda == 0.0) return;
    const auto p = net.parameters();
    const auto w = net.weight_flags();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (w[i] && p[i] != 0.0) grad[i] += p[i] > 0.0 ? lambda : -lambda;
    }
}

}  // namespace

void forward(const Network& net, std::span<const double> x, double theta, ForwardTrace& trace) {
    if (x.size() != static_cast<std::size_t>(net.architecture().inputs)) {
        throw std::invalid_argument("forward: input dimension mismatch");
    }
    prepare(net, trace);
    run_forward(net, x, theta, trace, false);
}

ForwardTrace forward(const Network& net, std::span<const double> x, double theta) {
    ForwardTrace t;
    forward(net, x, theta, t);
    return t;
}

std::vector<double> predict(const Network& net, std::span<const double> x, double theta) {
    return forward(net, x, theta).outputs;
}

LossTerms loss(const Network& net, const Matrix& inputs, const Matrix& targets, double lambda,
               double theta, double penalty_scale) {
    if (inputs.rows == 0) throw std::invalid_argument("loss: empty batch");
    ForwardTrace t;
    prepare(net, t);
    LossTerms out;
    double sq = 0.0;
    for (std::size_t i = 0; i < inputs.rows; ++i) {
        run_forward(net, inputs.row(i), theta, t, false);
        const auto y = targets.row(i);
        for (std::size_t j = 0; j < t.outputs.size(); ++j) {
            const double e = t.outputs[j] - y[j];
            sq += e * e;
            out.penalty += div_penalty(t.denominators[j], theta);
        }
    }
    out.mse = sq / static_cast<double>(inputs.rows);
    out.penalty *= penalty_scale;
    out.l1 = lambda * net.l1_norm();
    return out;
}

LossTerms loss_gradient(const Network& net, const Matrix& inputs, const Matrix& targets,
                        std::span<const std::size_t> rows, double lambda, double theta,
                        double penalty_scale, std::span<double> grad, ForwardTrace& ws) {
    if (rows.empty()) throw std::invalid_argument("loss_gradient: empty batch");
    prepare(net, ws);
    std::fill(grad.begin(), grad.end(), 0.0);
    const std::size_t width = widest(net);
    thread_local std::vector<double> dz, dy;
    dz.resize(width);
    dy.resize(width);

    const int m = net.architecture().outputs;
    const double inv_n = 1.0 / static_cast<double>(rows.size());
    LossTerms out;
    double sq = 0.0;
    for (std::size_t idx : rows) {
        const auto x = inputs.row(idx);
        const auto y = targets.row(idx);
        run_forward(net, x, theta, ws, true);
        const auto& zo = ws.preactivations.back();
        for (int j = 0; j < m; ++j) {
            const double a = zo[2 * j];
            const double b = zo[2 * j + 1];
            const DivGrad dg = div_forward_grad(a, b, theta);
            const double e = dg.value - y[j];
            sq += e * e;
            const double dl_dy = 2.0 * e * inv_n;
            out.penalty += div_penalty(b, theta);
            dz[2 * j] = dl_dy * dg.d_num;
            dz[2 * j + 1] = dl_dy * dg.d_den + penalty_scale * div_penalty_grad(b, theta);
        }
        run_backward(net, x, ws, dz, dy, grad);
    }
    out.mse = sq * inv_n;
    out.penalty *= penalty_scale;
    out.l1 = lambda * net.l1_norm();
    add_l1_gradient(net, lambda, grad);
    return out;
}

LossTerms penalty_loss(const Network& net, const Matrix& inputs, double theta, double bound, double scale) {
    ForwardTrace t;
    prepare(net, t);
    LossTerms out;
    for (std::size_t i = 0; i < inputs.rows; ++i) {
        run_forward(net, inputs.row(i), theta, t, false);
        for (std::size_t j = 0; j < t.outputs.size(); ++j) {
            out.penalty += div_penalty(t.denominators[j], theta) + bound_penalty(t.outputs[j], bound);
        }
    }
    out.penalty *= scale;
    return out;
}

LossTerms penalty_loss_gradient(const Network& net, const Matrix& inputs,
                                std::span<const std::size_t> rows, double theta, double bound,
                                double scale, std::span<double> grad, ForwardTrace& ws) {
    prepare(net, ws);
    std::fill(grad.begin(), grad.end(), 0.0);
    const std::size_t width = widest(net);
    thread_local std::vector<double> dz, dy;
    dz.resize(width);
    dy.resize(width);

    const int m = net.architecture().outputs;
    LossTerms out;
    for (std::size_t idx : rows) {
        const auto x = inputs.row(idx);
        run_forward(net, x, theta, ws, true);
        const auto& zo = ws.preactivations.back();
        bool active = false;
        for (int j = 0; j < m; ++j) {
            const double a = zo[2 * j];
            const double b = zo[2 * j + 1];
            const DivGrad dg = div_forward_grad(a, b, theta);
            out.penalty += div_penalty(b, theta) + bound_penalty(dg.value, bound);
            const double dl_dy = scale * bound_penalty_grad(dg.value, bound);
            dz[2 * j] = dl_dy * dg.d_num;
            dz[2 * j + 1] = dl_dy * dg.d_den + scale * div_penalty_grad(b, theta);
            active = active || dz[2 * j] != 0.0 || dz[2 * j + 1] != 0.0;
        }
        if (active) run_backward(net, x, ws, dz, dy, grad);
    }
    out.penalty *= scale;
    return out;
}

// ---------------------------------------------------------------------------
// L0 mask and sparsity
// ---------------------------------------------------------------------------

void apply_l0_mask_inplace(Network& net, double tolerance) {
    auto p = net.parameters();
    auto mask = net.mask();
    const auto w = net.weight_flags();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (w[i] && std::abs(p[i]) < tolerance) {
            p[i] = 0.0;
            mask[i] = 1;
        }
    }
    net.set_l0_applied(true);
}

Network apply_l0_mask(Network net, double tolerance) {
    apply_l0_mask_inplace(net, tolerance);
    return net;
}

int sparsity(const Network& net) {
    const Architecture& a = net.architecture();
    const int L = net.layer_count();
    const bool after_mask = net.l0_applied();
    auto live = [&](int l, int r, int c) {
        if (after_mask) return !net.masked(l, r, c) && net.weight(l, r, c) != 0.0;
        return std::abs(net.weight(l, r, c)) >= 0.001;
    };
    auto owner = [&](int row) { return row < a.unary ? row : a.unary + (row - a.unary) / 2; };

    // reaches[h][unit]: hidden layer h has a live path to an output.
    const int H = L - 1;
    const int width = a.hidden_width();
    std::vector<std::vector<char>> reaches(H, std::vector<char>(width, 0));
    for (int h = H - 1; h >= 0; --h) {
        const int next = h + 1;  // linear map reading hidden layer h
        const LayerShape& s = net.shape(next);
        for (int r = 0; r < s.rows; ++r) {
            const bool row_reaches = next == L - 1 || reaches[next][owner(r)];
            if (!row_reaches) continue;
            for (int c = 0; c < s.cols; ++c) {
                if (live(next, r, c)) reaches[h][c] = 1;
            }
        }
    }

    int count = 0;
    for (int h = 0; h < H; ++h) {
        const LayerShape& s = net.shape(h);
        std::vector<char> incoming(width, 0);
        for (int r = 0; r < s.rows; ++r) {
            for (int c = 0; c < s.cols; ++c) {
                if (live(h, r, c)) {
                    incoming[owner(r)] = 1;
                    break;
                }
            }
        }
        for (int u = 0; u < width; ++u) count += incoming[u] && reaches[h][u];
    }
    return count;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

void write_network(std::ostream& out, const Network& net) {
    const Architecture& a = net.architecture();
    out << "eql-network " << kNetworkFormatVersion << '\n';
    out << "layers " << a.layers << '\n'
        << "inputs " << a.inputs << '\n'
        << "outputs " << a.outputs << '\n'
        << "unary " << a.unary << '\n'
        << "product " << a.product << '\n'
        << "l0_applied " << (net.l0_applied() ? 1 : 0) << '\n';
    out << std::setprecision(17);
    for (int l = 0; l < net.layer_count(); ++l) {
        const LayerShape& s = net.shape(l);
        out << "layer " << l + 1 << ' ' << s.rows << ' ' << s.cols << '\n';
        out << "weights\n";
        for (int r = 0; r < s.rows; ++r) {
            for (int c = 0; c < s.cols; ++c) out << (c ? " " : "") << net.weight(l, r, c);
            out << '\n';
        }
        out << "bias\n";
        for (int r = 0; r < s.rows; ++r) out << (r ? " " : "") << net.bias(l, r);
        out << '\n';
        out << "mask\n";
        for (int r = 0; r < s.rows; ++r) {
            for (int c = 0; c < s.cols; ++c) out << (net.masked(l, r, c) ? '1' : '0');
            out << '\n';
        }
    }
    out << "end\n";
}

namespace {

void expect_token(std::istream& in, const std::string& want) {
    std::string tok;
    if (!(in >> tok) || tok != want) {
        throw FormatError("network file: expected '" + want + "', found '" + tok + "'");
    }
}

int read_int(std::istream& in, const std::string& key) {
    expect_token(in, key);
    int v = 0;
    if (!(in >> v)) throw FormatError("network file: bad value for '" + key + "'");
    return v;
}

double read_double(std::istream& in) {
    std::string tok;
    if (!(in >> tok)) throw FormatError("network file: truncated");
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw FormatError("network file: bad number '" + tok + "'");
        return v;
    } catch (const std::logic_error&) {
        throw FormatError("network file: bad number '" + tok + "'");
    }
}

}  // namespace

Network read_network(std::istream& in) {
    expect_token(in, "eql-network");
    int version = 0;
    if (!(in >> version)) throw FormatError("network file: missing version");
    if (version != kNetworkFormatVersion) {
        throw FormatError("network file: unsupported version " + std::to_string(version));
    }
    Architecture a;
    a.layers = read_int(in, "layers");
    a.inputs = read_int(in, "inputs");
    a.outputs = read_int(in, "outputs");
    a.unary = read_int(in, "unary");
    a.product = read_int(in, "product");
    const int l0 = read_int(in, "l0_applied");
    try {
        a.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("network file: ") + e.what());
    }
    Network net(a);
    net.set_l0_applied(l0 != 0);
    for (int l = 0; l < net.layer_count(); ++l) {
        const LayerShape& s = net.shape(l);
        expect_token(in, "layer");
        int idx = 0, rows = 0, cols = 0;
        if (!(in >> idx >> rows >> cols) || idx != l + 1 || rows != s.rows || cols != s.cols) {
            throw FormatError("network file: layer header mismatch at layer " + std::to_string(l + 1));
        }
        expect_token(in, "weights");
        for (int r = 0; r < s.rows; ++r)
            for (int c = 0; c < s.cols; ++c) net.weight(l, r, c) = read_double(in);
        expect_token(in, "bias");
        for (int r = 0; r < s.rows; ++r) net.bias(l, r) = read_double(in);
        expect_token(in, "mask");
        auto mask = net.mask();
        for (int r = 0; r < s.rows; ++r) {
            std::string bits;
            if (!(in >> bits) || bits.size() != static_cast<std::size_t>(s.cols)) {
                throw FormatError("network file: bad mask row");
            }
            for (int c = 0; c < s.cols; ++c) {
                if (bits[c] != '0' && bits[c] != '1') throw FormatError("network file: bad mask bit");
                mask[s.weight_offset + static_cast<std::size_t>(r) * s.cols + c] = bits[c] == '1';
            }
        }
    }
    expect_token(in, "end");
    return net;
}

void save_network(const std::string& path, const Network& net) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    write_network(out, net);
}

Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    return read_network(in);
}

}  // namespace eql
