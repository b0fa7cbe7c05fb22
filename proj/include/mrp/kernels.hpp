#pragma once

#include "mrp/matrix.hpp"

#include <cstdint>
#include <vector>

// OpenMP-parallel inner loops shared by the scoring, redundancy and forward
// paths. Every kernel is deterministic for any thread count: floating-point
// accumulation always runs serially inside the output element that owns it,
// and the only reductions are integer counts. Serial scalar-loop twins live
// in mrp::ref for testing and benchmarking.

namespace mrp::kernels {

// out[i][j] = |w[i][j]|, with masked entries forced to exactly zero.
// mask is a keep-bit array of w.size() entries; pass nullptr for no mask.
Matrix abs_masked(const Matrix& w, const std::uint8_t* mask);

// out[i][j] = col_scale[j] * |w[i][j]|, masked entries exactly zero.
Matrix scale_cols_abs_masked(const Matrix& w, const std::vector<double>& col_scale,
                             const std::uint8_t* mask);

// Euclidean norm of each column of x.
std::vector<double> column_l2_norms(const Matrix& x);

// y = x * transpose(w), where masked entries of w read as zero.
// x: N x C_in, w: C_out x C_in, result: N x C_out.
Matrix matmul_masked_wt(const Matrix& x, const Matrix& w, const std::uint8_t* mask);

void relu_inplace(Matrix& m);

// out = a + b elementwise; shapes must already match.
Matrix add(const Matrix& a, const Matrix& b);

// Number of entries strictly greater than threshold (exact integer reduction).
std::size_t count_above(const double* vals, std::size_t n, double threshold);

// Left-to-right sum in storage order. Serial on purpose: the redundancy mean
// must not depend on thread count or scheduling.
double serial_sum(const double* vals, std::size_t n);

} // namespace mrp::kernels
