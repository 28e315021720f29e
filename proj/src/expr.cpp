#include "eql/expr.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <cmath>
#include <cstdio>
#include <map>
#include <unordered_map>

namespace eql {

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

Expr Expr::constant(double v) {
    return Expr(std::make_shared<const Node>(Node{Op::constant, v, 0, {}}));
}

Expr Expr::variable(int index) {
    return Expr(std::make_shared<const Node>(Node{Op::variable, 0.0, index, {}}));
}

Expr Expr::add(std::vector<Expr> terms) {
    if (terms.empty()) return constant(0.0);
    if (terms.size() == 1) return terms.front();
    return Expr(std::make_shared<const Node>(Node{Op::add, 0.0, 0, std::move(terms)}));
}

Expr Expr::mul(std::vector<Expr> factors) {
    if (factors.empty()) return constant(1.0);
    if (factors.size() == 1) return factors.front();
    return Expr(std::make_shared<const Node>(Node{Op::mul, 0.0, 0, std::move(factors)}));
}

Expr Expr::div(Expr num, Expr den) {
    return Expr(std::make_shared<const Node>(Node{Op::div, 0.0, 0, {std::move(num), std::move(den)}}));
}

Expr Expr::sin(Expr arg) {
    return Expr(std::make_shared<const Node>(Node{Op::sin, 0.0, 0, {std::move(arg)}}));
}

Expr Expr::cos(Expr arg) {
    return Expr(std::make_shared<const Node>(Node{Op::cos, 0.0, 0, {std::move(arg)}}));
}

Expr Expr::pow(Expr base, int exponent) {
    return Expr(std::make_shared<const Node>(Node{Op::pow, 0.0, exponent, {std::move(base)}}));
}

std::size_t Expr::tree_size() const {
    std::size_t n = 1;
    for (const auto& a : args()) n += a.tree_size();
    return n;
}

int Expr::arity() const {
    if (op() == Op::variable) return index() + 1;
    int n = 0;
    for (const auto& a : args()) n = std::max(n, a.arity());
    return n;
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::add({a, b}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::mul({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::div(a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::add({a, Expr::mul({Expr::constant(-1.0), b})}); }

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.id() == b.id()) return true;
    if (a.op() != b.op() || a.args().size() != b.args().size()) return false;
    switch (a.op()) {
        case Op::constant:
            if (a.value() != b.value()) return false;
            break;
        case Op::variable:
        case Op::pow:
            if (a.index() != b.index()) return false;
            break;
        default: break;
    }
    for (std::size_t i = 0; i < a.args().size(); ++i) {
        if (!structurally_equal(a.args()[i], b.args()[i])) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

std::string path_string(const std::vector<int>& path) {
    if (path.empty()) return "/";
    std::string s;
    for (int p : path) s += "/" + std::to_string(p);
    return s;
}

double eval_at(const Expr& e, std::span<const double> x, std::vector<int>& path) {
    auto child = [&](std::size_t i) {
        path.push_back(static_cast<int>(i));
        const double v = eval_at(e.args()[i], x, path);
        path.pop_back();
        return v;
    };
    switch (e.op()) {
        case Op::constant: return e.value();
        case Op::variable:
            if (e.index() < 0 || static_cast<std::size_t>(e.index()) >= x.size()) {
                throw EvalError("variable x" + std::to_string(e.index() + 1) + " out of range", path_string(path));
            }
            return x[e.index()];
        case Op::add: {
            double s = 0.0;
            for (std::size_t i = 0; i < e.args().size(); ++i) s += child(i);
            return s;
        }
        case Op::mul: {
            double p = 1.0;
            for (std::size_t i = 0; i < e.args().size(); ++i) p *= child(i);
            return p;
        }
        case Op::div: {
            const double num = child(0);
            const double den = child(1);
            if (den == 0.0) throw EvalError("division by zero", path_string(path));
            return num / den;
        }
        case Op::sin: return std::sin(child(0));
        case Op::cos: return std::cos(child(0));
        case Op::pow: return std::pow(child(0), e.index());
    }
    return 0.0;
}

}  // namespace

double evaluate(const Expr& e, std::span<const double> x) {
    std::vector<int> path;
    return eval_at(e, x, path);
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

std::string format_coefficient(double v) {
    char buf[64];
    const double rounded = std::round(v * 1e4) / 1e4;
    if (rounded == 0.0 && v != 0.0) {
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return buf;
    }
    std::snprintf(buf, sizeof buf, "%.4f", rounded);
    std::string s = buf;
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    if (s == "-0") s = "0";
    return s;
}

namespace {

bool is_negative_term(const Expr& e) {
    switch (e.op()) {
        case Op::constant: return e.value() < 0.0;
        case Op::mul: return !e.args().empty() && e.args()[0].is_constant() && e.args()[0].value() < 0.0;
        case Op::div: return is_negative_term(e.args()[0]);
        default: return false;
    }
}

Expr negate_term(const Expr& e) {
    switch (e.op()) {
        case Op::constant: return Expr::constant(-e.value());
        case Op::mul: {
            const double c = -e.args()[0].value();
            std::vector<Expr> rest(e.args().begin() + 1, e.args().end());
            if (c != 1.0) rest.insert(rest.begin(), Expr::constant(c));
            return Expr::mul(std::move(rest));
        }
        case Op::div: return Expr::div(negate_term(e.args()[0]), e.args()[1]);
        default: return e;
    }
}

std::string print(const Expr& e);

std::string print_factor(const Expr& f) {
    const bool wrap = f.op() == Op::add || f.op() == Op::div || f.op() == Op::mul ||
                      (f.is_constant() && f.value() < 0.0);
    return wrap ? "(" + print(f) + ")" : print(f);
}

std::string print(const Expr& e) {
    switch (e.op()) {
        case Op::constant: return format_coefficient(e.value());
        case Op::variable: return "x" + std::to_string(e.index() + 1);
        case Op::sin: return "sin(" + print(e.args()[0]) + ")";
        case Op::cos: return "cos(" + print(e.args()[0]) + ")";
        case Op::pow: {
            const Expr& b = e.args()[0];
            const bool bare = b.op() == Op::variable || b.op() == Op::sin || b.op() == Op::cos ||
                              (b.is_constant() && b.value() >= 0.0);
            return (bare ? print(b) : "(" + print(b) + ")") + "^" + std::to_string(e.index());
        }
        case Op::add: {
            std::string s;
            for (std::size_t i = 0; i < e.args().size(); ++i) {
                const Expr& t = e.args()[i];
                const bool neg = is_negative_term(t);
                const Expr body = neg ? negate_term(t) : t;
                std::string txt = body.op() == Op::add ? "(" + print(body) + ")" : print(body);
                if (i == 0) {
                    s += neg ? "-" + txt : txt;
                } else {
                    s += (neg ? " - " : " + ") + txt;
                }
            }
            return s;
        }
        case Op::mul: {
            std::string s;
            std::size_t start = 0;
            if (!e.args().empty() && e.args()[0].is_constant() && e.args().size() > 1) {
                const std::string c = format_coefficient(e.args()[0].value());
                if (c == "-1") {
                    s = "-";
                } else if (c != "1") {
                    s = c + "*";
                }
                start = 1;
            }
            for (std::size_t i = start; i < e.args().size(); ++i) {
                if (i > start) s += "*";
                s += print_factor(e.args()[i]);
            }
            return s;
        }
        case Op::div: {
            const Expr& n = e.args()[0];
            const Expr& d = e.args()[1];
            const std::string ns = n.op() == Op::add ? "(" + print(n) + ")" : print(n);
            const bool wrap_d = d.op() == Op::add || d.op() == Op::mul || d.op() == Op::div ||
                                (d.is_constant() && d.value() < 0.0);
            return ns + "/" + (wrap_d ? "(" + print(d) + ")" : print(d));
        }
    }
    return "?";
}

// Exact text used to group like terms; keeps full precision.
std::string exact_key(const Expr& e) {
    char buf[40];
    switch (e.op()) {
        case Op::constant:
            std::snprintf(buf, sizeof buf, "%.17g", e.value());
            return buf;
        case Op::variable: return "x" + std::to_string(e.index());
        default: break;
    }
    static const char* names[] = {"c", "v", "add", "mul", "div", "sin", "cos", "pow"};
    std::string s = names[static_cast<int>(e.op())];
    if (e.op() == Op::pow) s += std::to_string(e.index());
    s += "(";
    for (std::size_t i = 0; i < e.args().size(); ++i) {
        if (i) s += ",";
        s += exact_key(e.args()[i]);
    }
    return s + ")";
}

int min_variable(const Expr& e) {
    if (e.op() == Op::variable) return e.index();
    int m = INT_MAX;
    for (const auto& a : e.args()) m = std::min(m, min_variable(a));
    return m;
}

// Canonical ordering: lowest variable index first, then display text (which
// puts cos before sin before plain variables).
void canonical_sort(std::vector<Expr>& items) {
    std::vector<std::pair<std::pair<int, std::string>, Expr>> keyed;
    keyed.reserve(items.size());
    for (auto& it : items) keyed.push_back({{min_variable(it), print(it)}, it});
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < items.size(); ++i) items[i] = keyed[i].second;
}

// ---------------------------------------------------------------------------
// Simplification
// ---------------------------------------------------------------------------

constexpr std::size_t kExpandLimit = 64;

class Simplifier {
public:
    Expr run(const Expr& e) {
        if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
        Expr out = dispatch(e);
        memo_.emplace(e.id(), out);
        keep_.push_back(e);
        return out;
    }

    Expr make_add(std::vector<Expr> terms);
    Expr make_mul(std::vector<Expr> factors);
    Expr make_div(const Expr& num, const Expr& den);
    Expr make_pow(const Expr& base, int k);
    Expr scale_down(const Expr& e, double c);

private:
    Expr dispatch(const Expr& e) {
        switch (e.op()) {
            case Op::constant:
            case Op::variable: return e;
            case Op::sin:
            case Op::cos: {
                Expr a = run(e.args()[0]);
                if (a.is_constant()) {
                    return Expr::constant(e.op() == Op::sin ? std::sin(a.value()) : std::cos(a.value()));
                }
                // sin(-u) = -sin(u), cos(-u) = cos(u): keep the leading coefficient positive.
                const Expr& lead = a.op() == Op::add ? a.args().front() : a;
                if (split_coefficient(lead).first < 0.0) {
                    const Expr flipped = scale_down(a, -1.0);
                    if (e.op() == Op::cos) return Expr::cos(flipped);
                    return make_mul({Expr::constant(-1.0), Expr::sin(flipped)});
                }
                return e.op() == Op::sin ? Expr::sin(a) : Expr::cos(a);
            }
            case Op::pow: return make_pow(run(e.args()[0]), e.index());
            case Op::div: return make_div(run(e.args()[0]), run(e.args()[1]));
            case Op::add: {
                std::vector<Expr> terms;
                for (const auto& a : e.args()) terms.push_back(run(a));
                return make_add(std::move(terms));
            }
            case Op::mul: {
                std::vector<Expr> factors;
                for (const auto& a : e.args()) factors.push_back(run(a));
                return make_mul(std::move(factors));
            }
        }
        return e;
    }

    // term == coeff * monomial
    static std::pair<double, Expr> split_coefficient(const Expr& t) {
        if (t.op() == Op::mul && t.args()[0].is_constant()) {
            std::vector<Expr> rest(t.args().begin() + 1, t.args().end());
            return {t.args()[0].value(), Expr::mul(std::move(rest))};
        }
        if (t.op() == Op::div) {
            const Expr& num = t.args()[0];
            if (num.is_constant()) return {num.value(), Expr::div(Expr::constant(1.0), t.args()[1])};
            auto [c, rest] = split_coefficient(num);
            return {c, Expr::div(rest, t.args()[1])};
        }
        return {1.0, t};
    }

    static Expr with_coefficient(double c, const Expr& mono) {
        if (c == 1.0) return mono;
        if (mono.is_constant(1.0)) return Expr::constant(c);
        if (mono.op() == Op::div) return Expr::div(with_coefficient(c, mono.args()[0]), mono.args()[1]);
        std::vector<Expr> f{Expr::constant(c)};
        if (mono.op() == Op::mul) {
            f.insert(f.end(), mono.args().begin(), mono.args().end());
        } else {
            f.push_back(mono);
        }
        return Expr::mul(std::move(f));
    }

    std::unordered_map<const Expr::Node*, Expr> memo_;
    std::vector<Expr> keep_;  // keeps memo keys alive
};

Expr Simplifier::make_pow(const Expr& base, int k) {
    if (k == 0) return Expr::constant(1.0);
    if (k == 1) return base;
    if (base.is_constant()) return Expr::constant(std::pow(base.value(), k));
    if (base.op() == Op::pow) return make_pow(base.args()[0], base.index() * k);
    return Expr::pow(base, k);
}

Expr Simplifier::make_div(const Expr& num, const Expr& den) {
    if (num.is_constant(0.0)) return Expr::constant(0.0);
    if (den.is_constant()) {
        if (den.value() == 0.0) return Expr::div(num, den);
        if (den.value() == 1.0) return num;
        return make_mul({num, Expr::constant(1.0 / den.value())});
    }
    // Scale so the denominator's constant term (or else its leading
    // coefficient) is 1.
    double c = 1.0;
    if (den.op() == Op::add) {
        c = den.args().back().is_constant() ? den.args().back().value() : split_coefficient(den.args().front()).first;
    } else {
        c = split_coefficient(den).first;
    }
    if (c == 1.0 || c == 0.0 || !std::isfinite(c)) return Expr::div(num, den);
    return Expr::div(scale_down(num, c), scale_down(den, c));
}

Expr Simplifier::scale_down(const Expr& e, double c) {
    if (e.is_constant()) return Expr::constant(e.value() / c);
    if (e.op() == Op::add) {
        std::vector<Expr> terms;
        for (const auto& t : e.args()) terms.push_back(scale_down(t, c));
        return make_add(std::move(terms));
    }
    if (e.op() == Op::div) return make_div(scale_down(e.args()[0], c), e.args()[1]);
    auto [k, mono] = split_coefficient(e);
    return with_coefficient(k / c, mono);
}

Expr Simplifier::make_mul(std::vector<Expr> factors) {
    double coeff = 1.0;
    std::vector<Expr> flat;
    for (auto& f : factors) {
        if (f.op() == Op::mul) {
            for (const auto& g : f.args()) {
                if (g.is_constant()) {
                    coeff *= g.value();
                } else {
                    flat.push_back(g);
                }
            }
        } else if (f.is_constant()) {
            coeff *= f.value();
        } else {
            flat.push_back(f);
        }
    }
    if (coeff == 0.0) return Expr::constant(0.0);

    // Merge repeated factors into powers.
    std::vector<std::pair<Expr, int>> groups;
    std::map<std::string, std::size_t> where;
    for (const auto& f : flat) {
        const Expr base = f.op() == Op::pow ? f.args()[0] : f;
        const int k = f.op() == Op::pow ? f.index() : 1;
        const std::string key = exact_key(base);
        if (auto it = where.find(key); it != where.end()) {
            groups[it->second].second += k;
        } else {
            where.emplace(key, groups.size());
            groups.push_back({base, k});
        }
    }
    std::vector<Expr> out;
    for (auto& [b, k] : groups) {
        Expr p = make_pow(b, k);
        if (p.is_constant()) {
            coeff *= p.value();
        } else {
            out.push_back(p);
        }
    }

    // A single quotient absorbs the remaining factors into its numerator.
    const auto n_div = std::count_if(out.begin(), out.end(), [](const Expr& f) { return f.op() == Op::div; });
    if (n_div == 1 && (out.size() > 1 || coeff != 1.0)) {
        auto it = std::find_if(out.begin(), out.end(), [](const Expr& f) { return f.op() == Op::div; });
        const Expr q = *it;
        out.erase(it);
        out.push_back(q.args()[0]);
        out.push_back(Expr::constant(coeff));
        return make_div(make_mul(std::move(out)), q.args()[1]);
    }

    if (out.empty()) return Expr::constant(coeff);

    // Distribute over sums while the expansion stays small.
    if (n_div == 0 && std::any_of(out.begin(), out.end(), [](const Expr& f) { return f.op() == Op::add; })) {
        std::size_t combos = 1;
        for (const auto& f : out) {
            if (f.op() == Op::add) combos *= f.args().size();
        }
        if (combos <= kExpandLimit) {
            std::vector<std::vector<Expr>> products{{Expr::constant(coeff)}};
            for (const auto& f : out) {
                if (f.op() != Op::add) {
                    for (auto& p : products) p.push_back(f);
                    continue;
                }
                std::vector<std::vector<Expr>> grown;
                for (const auto& p : products) {
                    for (const auto& t : f.args()) {
                        grown.push_back(p);
                        grown.back().push_back(t);
                    }
                }
                products = std::move(grown);
            }
            std::vector<Expr> terms;
            for (auto& p : products) terms.push_back(make_mul(std::move(p)));
            return make_add(std::move(terms));
        }
    }

    canonical_sort(out);
    if (coeff != 1.0) out.insert(out.begin(), Expr::constant(coeff));
    return Expr::mul(std::move(out));
}

Expr Simplifier::make_add(std::vector<Expr> terms) {
    double constant = 0.0;
    std::vector<std::pair<Expr, double>> groups;  // monomial, coefficient
    std::map<std::string, std::size_t> where;
    auto push = [&](const Expr& t) {
        if (t.is_constant()) {
            constant += t.value();
            return;
        }
        auto [c, mono] = split_coefficient(t);
        const std::string key = exact_key(mono);
        if (auto it = where.find(key); it != where.end()) {
            groups[it->second].second += c;
        } else {
            where.emplace(key, groups.size());
            groups.push_back({mono, 0.0 + c});
        }
    };
    for (const auto& t : terms) {
        if (t.op() == Op::add) {
            for (const auto& u : t.args()) push(u);
        } else {
            push(t);
        }
    }
    std::vector<Expr> out;
    for (auto& [mono, c] : groups) {
        if (c == 0.0) continue;
        out.push_back(with_coefficient(c, mono));
    }
    if (out.empty()) return Expr::constant(constant);
    // Sort by the monomial so display coefficients never change the order.
    std::vector<std::pair<std::pair<int, std::string>, Expr>> keyed;
    for (auto& t : out) {
        const Expr mono = split_coefficient(t).second;
        keyed.push_back({{min_variable(mono), print(mono)}, t});
    }
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    out.clear();
    for (auto& k : keyed) out.push_back(k.second);
    if (constant != 0.0) out.push_back(Expr::constant(constant));
    return Expr::add(std::move(out));
}

}  // namespace

Expr simplify(const Expr& e) {
    Simplifier s;
    return s.run(e);
}

std::string render(const Expr& e) { return print(simplify(e)); }

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    Expr parse_all() {
        Expr e = parse_sum();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("parse error at column " + std::to_string(pos_ + 1) + ": " + msg);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr parse_sum() {
        std::vector<Expr> terms{parse_product()};
        for (;;) {
            if (accept('+')) {
                terms.push_back(parse_product());
            } else if (accept('-')) {
                terms.push_back(Expr::mul({Expr::constant(-1.0), parse_product()}));
            } else {
                break;
            }
        }
        return Expr::add(std::move(terms));
    }

    Expr parse_product() {
        Expr acc = parse_unary();
        std::vector<Expr> factors{acc};
        for (;;) {
            if (accept('*')) {
                factors.push_back(parse_unary());
            } else if (accept('/')) {
                Expr den = parse_unary();
                acc = Expr::div(Expr::mul(std::move(factors)), den);
                factors = {acc};
            } else {
                break;
            }
        }
        return Expr::mul(std::move(factors));
    }

    Expr parse_unary() {
        if (accept('-')) return Expr::mul({Expr::constant(-1.0), parse_unary()});
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (accept('^')) {
            skip_ws();
            bool neg = false;
            if (pos_ < s_.size() && s_[pos_] == '-') {
                neg = true;
                ++pos_;
            }
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (start == pos_) fail("expected integer exponent");
            int k = std::stoi(std::string(s_.substr(start, pos_ - start)));
            if (neg) k = -k;
            return Expr::pow(base, k);
        }
        return base;
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (c == 'x') {
            ++pos_;
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (start == pos_) fail("expected variable index");
            const int idx = std::stoi(std::string(s_.substr(start, pos_ - start)));
            if (idx < 1) fail("variable indices start at 1");
            return Expr::variable(idx - 1);
        }
        for (const char* fn : {"sin", "cos"}) {
            if (s_.substr(pos_, 3) == fn) {
                pos_ += 3;
                if (!accept('(')) fail("expected '(' after function name");
                Expr arg = parse_sum();
                if (!accept(')')) fail("expected ')'");
                return fn[0] == 's' ? Expr::sin(arg) : Expr::cos(arg);
            }
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    Expr parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        };
        digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            digits();
        }
        try {
            return Expr::constant(std::stod(std::string(s_.substr(start, pos_ - start))));
        } catch (const std::logic_error&) {
            fail("bad number");
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {
const char* op_name(Op op) {
    switch (op) {
        case Op::constant: return "const";
        case Op::variable: return "var";
        case Op::add: return "add";
        case Op::mul: return "mul";
        case Op::div: return "div";
        case Op::sin: return "sin";
        case Op::cos: return "cos";
        case Op::pow: return "pow";
    }
    return "?";
}
}  // namespace

nlohmann::json to_json(const Expr& e) {
    nlohmann::json j;
    j["type"] = op_name(e.op());
    if (e.op() == Op::constant) j["coefficient"] = e.value();
    if (e.op() == Op::variable) j["index"] = e.index() + 1;
    if (e.op() == Op::pow) j["exponent"] = e.index();
    if (!e.args().empty()) {
        j["children"] = nlohmann::json::array();
        for (const auto& a : e.args()) j["children"].push_back(to_json(a));
    }
    return j;
}

Expr from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    std::vector<Expr> kids;
    if (j.contains("children")) {
        for (const auto& c : j.at("children")) kids.push_back(from_json(c));
    }
    auto need = [&](std::size_t n) {
        if (kids.size() != n) throw ParseError("json expression: '" + type + "' expects " + std::to_string(n) + " children");
    };
    if (type == "const") return Expr::constant(j.at("coefficient").get<double>());
    if (type == "var") return Expr::variable(j.at("index").get<int>() - 1);
    if (type == "add") return Expr::add(std::move(kids));
    if (type == "mul") return Expr::mul(std::move(kids));
    if (type == "div") {
        need(2);
        return Expr::div(kids[0], kids[1]);
    }
    if (type == "sin") {
        need(1);
        return Expr::sin(kids[0]);
    }
    if (type == "cos") {
        need(1);
        return Expr::cos(kids[0]);
    }
    if (type == "pow") {
        need(1);
        return Expr::pow(kids[0], j.at("exponent").get<int>());
    }
    throw ParseError("json expression: unknown node type '" + type + "'");
}

}  // namespace eql
