#include "eql/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

namespace eql {

std::vector<double> normalize(std::span<const double> values) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : values) {
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (!std::isfinite(v)) {
            out[i] = 1.0;
        } else if (hi > lo) {
            out[i] = (v - lo) / (hi - lo);
        } else {
            out[i] = 0.0;
        }
    }
    return out;
}

SelectionResult select(std::span<const CandidateMetrics> candidates, const SelectionWeights& w) {
    if (candidates.empty()) throw std::invalid_argument("select: no candidates");
    if (w.alpha < 0 || w.beta < 0 || w.gamma < 0) throw std::invalid_argument("select: weights must be nonnegative");
    const bool use_ex = w.gamma > 0.0;
    if (use_ex) {
        for (const auto& c : candidates) {
            if (!c.v_ex) throw std::invalid_argument("select: gamma > 0 requires v_ex on every candidate");
        }
    }

    std::vector<double> vi, sp, vx;
    for (const auto& c : candidates) {
        vi.push_back(c.v_int);
        sp.push_back(c.sparsity);
        if (c.v_ex) vx.push_back(*c.v_ex);
    }
    SelectionResult r;
    r.v_int_normalized = normalize(vi);
    r.sparsity_normalized = normalize(sp);
    if (vx.size() == candidates.size()) r.v_ex_normalized = normalize(vx);

    r.scores.resize(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double a = r.v_int_normalized[i];
        const double b = r.sparsity_normalized[i];
        double s = w.alpha * a * a + w.beta * b * b;
        if (use_ex) {
            const double g = r.v_ex_normalized[i];
            s += w.gamma * g * g;
        }
        r.scores[i] = s;
    }

    auto key = [&](std::size_t i) {
        const auto& c = candidates[i];
        return std::make_tuple(r.scores[i], c.sparsity, c.lambda, c.seed, c.layers);
    };
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (key(i) < key(best)) best = i;
    }
    r.index = best;
    return r;
}

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json row_json(const CandidateMetrics& c) {
    nlohmann::json j;
    j["lambda"] = c.lambda;
    j["layers"] = c.layers;
    j["seed"] = c.seed;
    j["v_int"] = finite_or_null(c.v_int);
    j["v_ex"] = c.v_ex ? finite_or_null(*c.v_ex) : nlohmann::json(nullptr);
    j["sparsity"] = finite_or_null(c.sparsity);
    j["failed"] = c.failed;
    j["network"] = c.network_path;
    return j;
}

}  // namespace

void write_selection_report(const std::string& path, std::span<const CandidateMetrics> candidates,
                            const SelectionWeights& w, const SelectionResult& result) {
    nlohmann::json rep;
    rep["weights"] = {{"alpha", w.alpha}, {"beta", w.beta}, {"gamma", w.gamma}};
    rep["selected_index"] = result.index;
    rep["selected"] = row_json(candidates[result.index]);
    rep["candidates"] = nlohmann::json::array();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        nlohmann::json row = row_json(candidates[i]);
        row["v_int_normalized"] = result.v_int_normalized[i];
        row["sparsity_normalized"] = result.sparsity_normalized[i];
        if (!result.v_ex_normalized.empty()) row["v_ex_normalized"] = result.v_ex_normalized[i];
        row["score"] = result.scores[i];
        rep["candidates"].push_back(std::move(row));
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << rep.dump(2) << '\n';
}

}  // namespace eql
