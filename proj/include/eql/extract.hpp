#pragma once

#include <vector>

#include "eql/expr.hpp"
#include "eql/network.hpp"

namespace eql {

/// Symbolic form of every network output, composed layer by layer. Weights
/// and biases with magnitude below `weight_tolerance` are dropped (a
/// tolerance of 0 keeps every nonzero parameter); masked weights are always
/// dropped. Output units become plain division num/den.
std::vector<Expr> extract(const Network& net, double weight_tolerance = 1e-3);

}  // namespace eql
