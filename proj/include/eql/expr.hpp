#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace eql {

enum class Op { constant, variable, add, mul, div, sin, cos, pow };

/// Immutable expression tree. Nodes are shared, so copying is cheap and
/// subtrees produced by network extraction are reused rather than cloned.
class Expr {
public:
    struct Node {
        Op op = Op::constant;
        double value = 0.0;  // constant value
        int index = 0;       // variable index (0-based) or integer exponent
        std::vector<Expr> args;
    };

    Expr() : Expr(constant(0.0)) {}

    static Expr constant(double v);
    static Expr variable(int index);
    static Expr add(std::vector<Expr> terms);
    static Expr mul(std::vector<Expr> factors);
    static Expr div(Expr num, Expr den);
    static Expr sin(Expr arg);
    static Expr cos(Expr arg);
    static Expr pow(Expr base, int exponent);

    Op op() const { return node_->op; }
    double value() const { return node_->value; }
    int index() const { return node_->index; }
    const std::vector<Expr>& args() const { return node_->args; }
    const Node* id() const { return node_.get(); }

    bool is_constant() const { return op() == Op::constant; }
    bool is_constant(double v) const { return op() == Op::constant && value() == v; }

    /// Number of nodes when shared subtrees are expanded.
    std::size_t tree_size() const;
    /// Largest variable index referenced + 1.
    int arity() const;

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);

/// Exact structural comparison (same ops, constants and shape).
bool structurally_equal(const Expr& a, const Expr& b);

/// Raised by evaluate() when a denominator is exactly zero. `where()` is the
/// child-index path from the root, e.g. "/0/1".
class EvalError : public std::runtime_error {
public:
    EvalError(const std::string& what, std::string where)
        : std::runtime_error(what + " at " + where), where_(std::move(where)) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

double evaluate(const Expr& e, std::span<const double> x);

/// Constant folding, flattening, like-term collection and canonical ordering.
/// Preserves the value of the expression up to floating-point rounding.
Expr simplify(const Expr& e);

/// Canonical infix text; simplifies first. Coefficients are shown with at
/// most four decimals.
std::string render(const Expr& e);

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses the text produced by render() (and ordinary infix arithmetic with
/// + - * / ^, sin, cos, numbers and x1..xn).
Expr parse(std::string_view text);

nlohmann::json to_json(const Expr& e);
Expr from_json(const nlohmann::json& j);

/// Coefficient as displayed by render().
std::string format_coefficient(double v);

}  // namespace eql
