#include "mrp/errors.hpp"
#include "mrp/kernels.hpp"
#include "mrp/redundancy.hpp"
#include "mrp/synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace mrp;

TEST_CASE("models are bit-identical across runs with the same seed") {
    const OutlierSpec spec = OutlierSpec::uniform(3, 0.1, 8.0);
    const BlockStack a = gen_model(42, 3, 16, spec);
    const BlockStack b = gen_model(42, 3, 16, spec);
    REQUIRE(a.block_count() == b.block_count());
    for (std::size_t i = 0; i < a.block_count(); ++i) {
        for (std::size_t k = 0; k < a.blocks[i].layers.size(); ++k) {
            CHECK(a.blocks[i].layers[k].weights == b.blocks[i].layers[k].weights);
        }
    }

    const BlockStack c = gen_model(43, 3, 16, spec);
    CHECK(a.blocks[0].layers[0].weights != c.blocks[0].layers[0].weights);
}

TEST_CASE("unit outlier scale leaves blocks statistically indistinguishable") {
    const BlockStack model = gen_model(44, 4, 128, OutlierSpec::uniform(4, 0.3, 1.0));
    const RedundancyProfile p =
        model_lrl(model, {}, find_metric("magnitude"), OutlierConfig{});
    CHECK(max_min_gap(p) < 0.05);
}

TEST_CASE("a single outlier-carrying block has strictly the lowest redundancy") {
    OutlierSpec spec;
    spec.blocks = {{0.0, 1.0}, {0.0, 1.0}, {0.05, 20.0}, {0.0, 1.0}};
    const BlockStack model = gen_model(45, 4, 32, spec);
    const RedundancyProfile p =
        model_lrl(model, {}, find_metric("magnitude"), OutlierConfig{});
    for (std::size_t b : {0u, 1u, 3u}) {
        CHECK(p.values[2] < p.values[b]);
    }
}

TEST_CASE("generated models pass the stack invariants") {
    const BlockStack model = gen_model(46, 5, 24, OutlierSpec::uniform(5, 0.2, 3.0));
    CHECK_NOTHROW(model.validate());
    CHECK(model.total_weights() == 5 * 2 * 24 * 24);
    CHECK(model.total_pruned() == 0);
    for (const Block& b : model.blocks) {
        for (const LinearLayer& l : b.layers) {
            for (double v : l.weights.data) {
                CHECK(std::isfinite(v));
            }
        }
    }
}

TEST_CASE("model generation validates its inputs") {
    CHECK_THROWS_AS(gen_model(1, 0, 16, OutlierSpec{}), validation_error);
    CHECK_THROWS_AS(gen_model(1, 2, 1, OutlierSpec{}), validation_error);
    CHECK_THROWS_AS(gen_model(1, 2, 16, OutlierSpec::uniform(3, 0.1, 2.0)), validation_error);
    CHECK_THROWS_AS(gen_model(1, 1, 16, OutlierSpec::uniform(1, -0.1, 2.0)), validation_error);
    CHECK_THROWS_AS(gen_model(1, 1, 16, OutlierSpec::uniform(1, 0.1, 0.5)), validation_error);
}

TEST_CASE("calibration batches are deterministic with near-uniform column norms") {
    const CalibrationBatch a = gen_calibration(47, 128, 64, {});
    const CalibrationBatch b = gen_calibration(47, 128, 64, {});
    CHECK(a.inputs == b.inputs);

    const auto norms = kernels::column_l2_norms(a.inputs);
    const double hi = *std::max_element(norms.begin(), norms.end());
    const double lo = *std::min_element(norms.begin(), norms.end());
    CHECK(hi / lo < 1.5);
}

TEST_CASE("doubling a column's skew doubles its norm exactly") {
    std::vector<double> skew(16, 1.0);
    const CalibrationBatch base = gen_calibration(48, 32, 16, skew);
    skew[5] = 2.0;
    const CalibrationBatch skewed = gen_calibration(48, 32, 16, skew);

    const auto n0 = kernels::column_l2_norms(base.inputs);
    const auto n1 = kernels::column_l2_norms(skewed.inputs);
    CHECK(n1[5] == 2.0 * n0[5]);
    CHECK(n1[4] == n0[4]);
}

TEST_CASE("calibration validates its inputs") {
    CHECK_THROWS_AS(gen_calibration(1, 0, 16, {}), validation_error);
    CHECK_THROWS_AS(gen_calibration(1, 4, 16, std::vector<double>(3, 1.0)), validation_error);
    CHECK_THROWS_AS(gen_calibration(1, 4, 2, {1.0, 0.0}), validation_error);
    CHECK_THROWS_AS(gen_calibration(1, 4, 2, {1.0, -2.0}), validation_error);
}

TEST_CASE("base distribution is symmetric, zero-mean, unit-variance") {
    const CalibrationBatch big = gen_calibration(49, 512, 64, {});
    double mean = 0.0, var = 0.0;
    for (double v : big.inputs.data) mean += v;
    mean /= static_cast<double>(big.inputs.size());
    for (double v : big.inputs.data) var += (v - mean) * (v - mean);
    var /= static_cast<double>(big.inputs.size());
    CHECK(std::fabs(mean) < 0.02);
    CHECK(var == doctest::Approx(1.0).epsilon(0.03));
}
