#include "mrp/ref_kernels.hpp"

#include <cmath>

namespace mrp::ref {

Matrix score_magnitude(const Matrix& w) {
    Matrix out(w.rows, w.cols);
    for (std::size_t i = 0; i < w.rows; ++i) {
        for (std::size_t j = 0; j < w.cols; ++j) {
            out.at(i, j) = std::fabs(w.at(i, j));
        }
    }
    return out;
}

std::vector<double> column_l2_norms(const Matrix& x) {
    std::vector<double> norms(x.cols, 0.0);
    for (std::size_t j = 0; j < x.cols; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) {
            acc += x.at(i, j) * x.at(i, j);
        }
        norms[j] = std::sqrt(acc);
    }
    return norms;
}

Matrix score_wanda(const Matrix& w, const Matrix& x) {
    const std::vector<double> norms = column_l2_norms(x);
    Matrix out(w.rows, w.cols);
    for (std::size_t i = 0; i < w.rows; ++i) {
        for (std::size_t j = 0; j < w.cols; ++j) {
            out.at(i, j) = norms[j] * std::fabs(w.at(i, j));
        }
    }
    return out;
}

double layer_redundancy(const Matrix& scores, double multiplier) {
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.rows; ++i) {
        for (std::size_t j = 0; j < scores.cols; ++j) {
            sum += scores.at(i, j);
        }
    }
    const double mean = sum / static_cast<double>(scores.size());
    const double threshold = multiplier * mean;
    std::size_t outliers = 0;
    for (std::size_t i = 0; i < scores.rows; ++i) {
        for (std::size_t j = 0; j < scores.cols; ++j) {
            if (scores.at(i, j) > threshold) ++outliers;
        }
    }
    return 1.0 - static_cast<double>(outliers) / static_cast<double>(scores.size());
}

Matrix matmul_wt(const Matrix& x, const Matrix& w) {
    Matrix y(x.rows, w.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t o = 0; o < w.rows; ++o) {
            double acc = 0.0;
            for (std::size_t j = 0; j < w.cols; ++j) {
                acc += x.at(i, j) * w.at(o, j);
            }
            y.at(i, o) = acc;
        }
    }
    return y;
}

std::size_t count_above(const std::vector<double>& vals, double threshold) {
    std::size_t count = 0;
    for (double v : vals) {
        if (v > threshold) ++count;
    }
    return count;
}

} // namespace mrp::ref
