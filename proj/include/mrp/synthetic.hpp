#pragma once

#include "mrp/model.hpp"

#include <cstdint>

namespace mrp {

// Per-block outlier structure for generated models. Entries are drawn from a
// symmetric zero-mean unit-variance base distribution; a fraction of them is
// multiplied by outlier_scale.
struct BlockOutlierSpec {
    double outlier_fraction = 0.0; // in [0, 1]
    double outlier_scale = 1.0;    // >= 1
};

struct OutlierSpec {
    // One entry per block; empty means no outliers anywhere.
    std::vector<BlockOutlierSpec> blocks;

    static OutlierSpec uniform(std::size_t block_count, double fraction, double scale);
};

// Counter-based generator primitives (splitmix64 finalizer over a keyed
// counter). Pure functions of their arguments, so generation is stateless,
// order-independent and reproducible. The exact scheme is documented in the
// README for cross-language reimplementation.
std::uint64_t mix64(std::uint64_t x);
double unit_uniform(std::uint64_t key); // in [0, 1)

// Deterministic model of block_count residual blocks, each holding two
// dim x dim layers named fc1 and fc2.
BlockStack gen_model(std::uint64_t seed, std::size_t block_count, std::size_t dim,
                     const OutlierSpec& spec);

// Deterministic rows x dim batch; column j is scaled by column_skew[j]
// (empty means all ones).
CalibrationBatch gen_calibration(std::uint64_t seed, std::size_t rows, std::size_t dim,
                                 const std::vector<double>& column_skew);

} // namespace mrp
