#include "mrp/kernels.hpp"

#include <cmath>
#include <cstddef>

namespace mrp::kernels {

Matrix abs_masked(const Matrix& w, const std::uint8_t* mask) {
    Matrix out(w.rows, w.cols);
    const std::int64_t n = static_cast<std::int64_t>(w.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < n; ++k) {
        out.data[k] = (mask && !mask[k]) ? 0.0 : std::fabs(w.data[k]);
    }
    return out;
}

Matrix scale_cols_abs_masked(const Matrix& w, const std::vector<double>& col_scale,
                             const std::uint8_t* mask) {
    Matrix out(w.rows, w.cols);
    const std::int64_t rows = static_cast<std::int64_t>(w.rows);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < rows; ++i) {
        const std::size_t base = static_cast<std::size_t>(i) * w.cols;
        for (std::size_t j = 0; j < w.cols; ++j) {
            const std::size_t k = base + j;
            out.data[k] = (mask && !mask[k]) ? 0.0 : col_scale[j] * std::fabs(w.data[k]);
        }
    }
    return out;
}

std::vector<double> column_l2_norms(const Matrix& x) {
    std::vector<double> norms(x.cols, 0.0);
    const std::int64_t cols = static_cast<std::int64_t>(x.cols);
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < cols; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) {
            const double v = x.at(i, static_cast<std::size_t>(j));
            acc += v * v;
        }
        norms[static_cast<std::size_t>(j)] = std::sqrt(acc);
    }
    return norms;
}

Matrix matmul_masked_wt(const Matrix& x, const Matrix& w, const std::uint8_t* mask) {
    Matrix y(x.rows, w.rows);
    const std::int64_t n = static_cast<std::int64_t>(x.rows);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const double* xi = x.data.data() + static_cast<std::size_t>(i) * x.cols;
        double* yi = y.data.data() + static_cast<std::size_t>(i) * w.rows;
        for (std::size_t o = 0; o < w.rows; ++o) {
            const double* wo = w.data.data() + o * w.cols;
            const std::uint8_t* mo = mask ? mask + o * w.cols : nullptr;
            double acc = 0.0;
            if (mo) {
                for (std::size_t j = 0; j < w.cols; ++j) {
                    if (mo[j]) acc += xi[j] * wo[j];
                }
            } else {
                for (std::size_t j = 0; j < w.cols; ++j) {
                    acc += xi[j] * wo[j];
                }
            }
            yi[o] = acc;
        }
    }
    return y;
}

void relu_inplace(Matrix& m) {
    const std::int64_t n = static_cast<std::int64_t>(m.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < n; ++k) {
        if (m.data[k] < 0.0) m.data[k] = 0.0;
    }
}

Matrix add(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows, a.cols);
    const std::int64_t n = static_cast<std::int64_t>(a.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < n; ++k) {
        out.data[k] = a.data[k] + b.data[k];
    }
    return out;
}

std::size_t count_above(const double* vals, std::size_t n, double threshold) {
    std::int64_t count = 0;
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) reduction(+ : count)
    for (std::int64_t k = 0; k < nn; ++k) {
        if (vals[k] > threshold) ++count;
    }
    return static_cast<std::size_t>(count);
}

double serial_sum(const double* vals, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += vals[k];
    return acc;
}

} // namespace mrp::kernels
