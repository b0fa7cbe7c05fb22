#pragma once

#include "mrp/matrix.hpp"
#include "mrp/synthetic.hpp"

#include <cstdint>

namespace mrp_test {

// Deterministic pseudo-random matrices for tests, built on the library's
// counter generator so every expectation is reproducible.
inline mrp::Matrix random_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols,
                                 double lo = -1.0, double hi = 1.0) {
    mrp::Matrix m(rows, cols);
    for (std::size_t k = 0; k < m.size(); ++k) {
        const double u = mrp::unit_uniform(mrp::mix64(seed * 0x9e3779b97f4a7c15ull + k));
        m.data[k] = lo + (hi - lo) * u;
    }
    return m;
}

inline mrp::Matrix random_nonneg_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols,
                                        double hi = 10.0) {
    return random_matrix(seed, rows, cols, 0.0, hi);
}

} // namespace mrp_test
