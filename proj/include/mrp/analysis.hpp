#pragma once

#include "mrp/allocation.hpp"

#include <functional>

namespace mrp {

// Per-block performance degradation when pruning exactly one block at the
// probe ratio.
struct LpsProfile {
    std::vector<double> values;
    std::string metric;
    double probe_ratio = 0.0;
    std::string evaluator;
};

// Named performance functional over (model, calibration).
struct Evaluator {
    std::string name;
    std::function<double(const BlockStack&, const CalibrationBatch&)> eval;
};

// Mean elementwise |dense - pruned| of the stack outputs, normalized by the
// mean |dense| output. Zero iff the outputs are identical.
double evaluate_output_distance(const BlockStack& dense, const BlockStack& pruned,
                                const CalibrationBatch& calib);

// Built-in evaluator measuring output distance against a dense reference.
Evaluator make_output_distance_evaluator(const BlockStack& dense_reference);

// Runs `command <model-file> <calib-file>` with the masked weights applied
// and parses the last whitespace-separated stdout token as the score.
Evaluator make_command_evaluator(const std::string& command);

// For each block: prune only that block to probe_ratio, evaluate, take the
// absolute difference from the unpruned evaluation, restore.
LpsProfile profile_lps(const BlockStack& model, const CalibrationBatch& calib,
                       const MetricDef& metric, double probe_ratio, const Evaluator& evaluator,
                       const Granularity& granularity);

// Fraction of unordered block pairs whose strict sensitivity order flips
// between the two profiles; ties in either profile never count as reversed.
double reversal_rate(const LpsProfile& a, const LpsProfile& b, bool adjacent_only = false);

// Per-block change in the outlier ratio (1 - D) caused by pruning one
// contiguous run of blocks: scores use the original dense weights against
// activations refreshed through the masked model, isolating the shift that
// pruning induces downstream. Plans whose nonzero ratios are not contiguous
// are rejected.
std::vector<double> outlier_shift(const BlockStack& model, const CalibrationBatch& calib,
                                  const MetricDef& metric, const SparsityPlan& prefix_plan,
                                  const OutlierConfig& cfg);

} // namespace mrp
