#pragma once

#include "mrp/matrix.hpp"

#include <vector>

// Serial scalar-loop reference implementations. These are kept deliberately
// naive and independent of mrp::kernels: the test suites diff the two paths
// and the benchmark tool times them against each other. Production code must
// never call into this namespace.

namespace mrp::ref {

Matrix score_magnitude(const Matrix& w);

Matrix score_wanda(const Matrix& w, const Matrix& x);

std::vector<double> column_l2_norms(const Matrix& x);

// Non-outlier ratio of a score matrix: 1 - count(s > multiplier * mean) / n.
double layer_redundancy(const Matrix& scores, double multiplier);

// y = x * transpose(w), no masking.
Matrix matmul_wt(const Matrix& x, const Matrix& w);

std::size_t count_above(const std::vector<double>& vals, double threshold);

} // namespace mrp::ref
