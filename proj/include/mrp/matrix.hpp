#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mrp {

// Dense row-major 2-D array of doubles. For weights, rows are output
// channels and columns input channels; for activations, rows are samples.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values)
        : rows(r), cols(c), data(std::move(values)) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::size_t size() const { return rows * cols; }
    bool empty() const { return size() == 0; }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool operator==(const Matrix& o) const {
        return rows == o.rows && cols == o.cols && data == o.data;
    }
};

std::string shape_string(const Matrix& m);

// Throws validation_error naming the first offending entry, e.g. "w[3][5]".
void require_finite(const Matrix& m, const std::string& name);
void require_nonempty(const Matrix& m, const std::string& name);

} // namespace mrp
