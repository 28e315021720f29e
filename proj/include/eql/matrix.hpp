#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace eql {

/// Row-major sample matrix: one row per sample.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool empty() const { return rows == 0; }

    void append(std::span<const double> values) {
        if (rows == 0 && cols == 0) cols = values.size();
        assert(values.size() == cols);
        data.insert(data.end(), values.begin(), values.end());
        ++rows;
    }

    bool operator==(const Matrix&) const = default;
};

}  // namespace eql
