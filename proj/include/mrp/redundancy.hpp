#pragma once

#include "mrp/metrics.hpp"
#include "mrp/model.hpp"

#include <set>

namespace mrp {

struct OutlierConfig {
    // An entry is an outlier when its score strictly exceeds multiplier times
    // the mean score of the layer population.
    double multiplier = 5.0;
    // Drop masked entries from the population instead of counting their zero
    // scores in the mean and denominator. Study flag; default keeps them.
    bool exclude_masked = false;

    void validate() const;
};

// One non-outlier ratio per block, each in [0, 1].
struct RedundancyProfile {
    std::vector<double> values;
    std::string metric;
    double outlier_multiplier = 5.0;
};

// Non-outlier ratio of a single score matrix.
double layer_redundancy(const ScoreMatrix& scores, const OutlierConfig& cfg);

// Per-block ratios over the concatenated score entries of every linear layer
// in the block. acts holds one input matrix per block; inputs of inner layers
// are recovered by chaining through the block's masked layers.
RedundancyProfile model_lrl(const BlockStack& model, const ActivationSet& acts,
                            const MetricDef& metric, const OutlierConfig& cfg);

double max_min_gap(const RedundancyProfile& p);

// Index of the highest ratio among non-frozen blocks, ties to the lowest
// index. Throws infeasibility_error when every block is frozen.
std::size_t select_most_redundant(const RedundancyProfile& p, const std::set<std::size_t>& frozen);

} // namespace mrp
