#include "eql/extract.hpp"

#include <cmath>

namespace eql {

namespace {

bool kept(double v, double tol) { return v != 0.0 && std::abs(v) >= tol; }

// Affine combination of the previous layer's expressions. Inputs that are
// exactly zero contribute nothing; constant inputs fold into the bias.
Expr affine(const Network& net, int layer, int row, const std::vector<Expr>& in, double tol) {
    std::vector<Expr> terms;
    double bias = kept(net.bias(layer, row), tol) ? net.bias(layer, row) : 0.0;
    for (int c = 0; c < static_cast<int>(in.size()); ++c) {
        const double w = net.weight(layer, row, c);
        if (net.masked(layer, row, c) || !kept(w, tol)) continue;
        if (in[c].is_constant()) {
            bias += w * in[c].value();
            continue;
        }
        terms.push_back(w == 1.0 ? in[c] : Expr::mul({Expr::constant(w), in[c]}));
    }
    if (bias != 0.0 || terms.empty()) terms.push_back(Expr::constant(bias));
    return Expr::add(std::move(terms));
}

}  // namespace

std::vector<Expr> extract(const Network& net, double weight_tolerance) {
    const auto& arch = net.architecture();
    std::vector<Expr> current;
    for (int i = 0; i < arch.inputs; ++i) current.push_back(Expr::variable(i));

    for (int l = 0; l + 1 < net.layer_count(); ++l) {
        std::vector<Expr> next;
        next.reserve(arch.hidden_width());
        for (int u = 0; u < arch.unary; ++u) {
            Expr z = affine(net, l, u, current, weight_tolerance);
            switch (arch.unary_kind(u)) {
                case UnitKind::identity:
                    next.push_back(z);
                    break;
                case UnitKind::sine:
                    next.push_back(z.is_constant() ? Expr::constant(std::sin(z.value())) : Expr::sin(z));
                    break;
                case UnitKind::cosine:
                    next.push_back(z.is_constant() ? Expr::constant(std::cos(z.value())) : Expr::cos(z));
                    break;
                case UnitKind::product:
                    break;
            }
        }
        for (int p = 0; p < arch.product; ++p) {
            Expr a = affine(net, l, arch.unary + 2 * p, current, weight_tolerance);
            Expr b = affine(net, l, arch.unary + 2 * p + 1, current, weight_tolerance);
            if (a.is_constant() && b.is_constant()) {
                next.push_back(Expr::constant(a.value() * b.value()));
            } else if (a.is_constant(0.0) || b.is_constant(0.0)) {
                next.push_back(Expr::constant(0.0));
            } else {
                next.push_back(Expr::mul({a, b}));
            }
        }
        current = std::move(next);
    }

    const int last = net.layer_count() - 1;
    std::vector<Expr> outputs;
    for (int j = 0; j < arch.outputs; ++j) {
        Expr num = affine(net, last, 2 * j, current, weight_tolerance);
        Expr den = affine(net, last, 2 * j + 1, current, weight_tolerance);
        outputs.push_back(Expr::div(num, den));
    }
    return outputs;
}

}  // namespace eql
