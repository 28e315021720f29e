#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "eql/trainer.hpp"

namespace eql {

/// Weights of the normalized selection score
///   alpha * v_int~^2 + beta * s~^2 + gamma * v_ex~^2.
struct SelectionWeights {
    double alpha = 0.5;
    double beta = 0.5;
    double gamma = 0.0;

    /// Interpolation validation error and sparsity.
    static SelectionWeights vint_s() { return {0.5, 0.5, 0.0}; }
    /// Interpolation and extrapolation validation error; sparsity ignored.
    static SelectionWeights vint_ex() { return {0.5, 0.0, 0.5}; }
};

/// Min-max normalization to [0, 1] over the finite entries. Non-finite
/// entries map to 1; a degenerate range maps every finite entry to 0.
std::vector<double> normalize(std::span<const double> values);

struct SelectionResult {
    std::size_t index = 0;  // position of the winner in the input list
    std::vector<double> scores;
    std::vector<double> v_int_normalized;
    std::vector<double> sparsity_normalized;
    std::vector<double> v_ex_normalized;  // empty when gamma == 0 and no v_ex is present
};

/// Argmin of the selection score. Exact ties go to smaller sparsity, then
/// smaller lambda, then smaller seed, then fewer layers. Throws
/// std::invalid_argument for an empty list, negative weights, or gamma > 0
/// with a candidate lacking v_ex.
SelectionResult select(std::span<const CandidateMetrics> candidates, const SelectionWeights& w);

/// Writes the selection report: the chosen row and every candidate's
/// normalized metrics and score, as JSON.
void write_selection_report(const std::string& path, std::span<const CandidateMetrics> candidates,
                            const SelectionWeights& w, const SelectionResult& result);

}  // namespace eql
