#include "mrp/synthetic.hpp"

#include "mrp/errors.hpp"

#include <cmath>

namespace mrp {

namespace {

// Stream tags keep the weight, outlier-choice and calibration draws disjoint.
constexpr std::uint64_t kTagWeight = 0x5745494748545331ull;
constexpr std::uint64_t kTagOutlier = 0x4f55544c49455253ull;
constexpr std::uint64_t kTagCalib = 0x43414c4942524154ull;

// Uniform on (-sqrt(3), sqrt(3)): symmetric, zero mean, unit variance.
constexpr double kHalfWidth = 1.7320508075688772;

std::uint64_t keyed(std::uint64_t seed, std::uint64_t tag, std::uint64_t a, std::uint64_t b,
                    std::uint64_t c) {
    std::uint64_t x = mix64(seed ^ tag);
    x = mix64(x ^ a);
    x = mix64(x ^ b);
    return mix64(x ^ c);
}

double base_draw(std::uint64_t key) {
    return (2.0 * unit_uniform(key) - 1.0) * kHalfWidth;
}

} // namespace

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double unit_uniform(std::uint64_t key) {
    return static_cast<double>(key >> 11) * 0x1.0p-53;
}

OutlierSpec OutlierSpec::uniform(std::size_t block_count, double fraction, double scale) {
    OutlierSpec spec;
    spec.blocks.assign(block_count, BlockOutlierSpec{fraction, scale});
    return spec;
}

BlockStack gen_model(std::uint64_t seed, std::size_t block_count, std::size_t dim,
                     const OutlierSpec& spec) {
    if (block_count < 1) {
        throw validation_error("generated model needs at least one block");
    }
    if (dim < 2) {
        throw validation_error("generated model width must be at least 2");
    }
    if (!spec.blocks.empty() && spec.blocks.size() != block_count) {
        throw validation_error("outlier spec has " + std::to_string(spec.blocks.size()) +
                               " entries for " + std::to_string(block_count) + " blocks");
    }
    for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
        const BlockOutlierSpec& s = spec.blocks[b];
        if (!(s.outlier_fraction >= 0.0 && s.outlier_fraction <= 1.0)) {
            throw validation_error("block " + std::to_string(b) +
                                   " outlier fraction must lie in [0, 1]");
        }
        if (!(s.outlier_scale >= 1.0)) {
            throw validation_error("block " + std::to_string(b) +
                                   " outlier scale must be at least 1");
        }
    }

    BlockStack model;
    model.dim = dim;
    model.blocks.resize(block_count);
    for (std::size_t b = 0; b < block_count; ++b) {
        const BlockOutlierSpec bspec =
            spec.blocks.empty() ? BlockOutlierSpec{} : spec.blocks[b];
        for (std::size_t layer = 0; layer < 2; ++layer) {
            Matrix w(dim, dim);
            for (std::size_t k = 0; k < w.size(); ++k) {
                double v = base_draw(keyed(seed, kTagWeight, b, layer, k));
                if (bspec.outlier_fraction > 0.0 &&
                    unit_uniform(keyed(seed, kTagOutlier, b, layer, k)) <
                        bspec.outlier_fraction) {
                    v *= bspec.outlier_scale;
                }
                w.data[k] = v;
            }
            model.blocks[b].layers.emplace_back(layer == 0 ? "fc1" : "fc2", std::move(w));
        }
    }
    model.validate();
    return model;
}

CalibrationBatch gen_calibration(std::uint64_t seed, std::size_t rows, std::size_t dim,
                                 const std::vector<double>& column_skew) {
    if (rows < 1) {
        throw validation_error("calibration needs at least one row");
    }
    if (dim < 1) {
        throw validation_error("calibration width must be positive");
    }
    if (!column_skew.empty() && column_skew.size() != dim) {
        throw validation_error("skew vector length " + std::to_string(column_skew.size()) +
                               " does not match width " + std::to_string(dim));
    }
    for (std::size_t j = 0; j < column_skew.size(); ++j) {
        if (!(column_skew[j] > 0.0) || !std::isfinite(column_skew[j])) {
            throw validation_error("skew[" + std::to_string(j) + "] must be a positive real");
        }
    }

    CalibrationBatch calib;
    calib.inputs = Matrix(rows, dim);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double skew = column_skew.empty() ? 1.0 : column_skew[j];
            calib.inputs.at(i, j) = base_draw(keyed(seed, kTagCalib, i, j, 0)) * skew;
        }
    }
    calib.provenance = "synth:seed=" + std::to_string(seed);
    return calib;
}

} // namespace mrp
