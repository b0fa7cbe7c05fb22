#pragma once

#include "mrp/metrics.hpp"
#include "mrp/model.hpp"
#include "mrp/pruning.hpp"
#include "mrp/redundancy.hpp"

#include <utility>
#include <vector>

namespace mrp {

// Per-block pruning ratios plus provenance of the allocator that produced
// them.
struct SparsityPlan {
    std::vector<double> ratios;
    Granularity granularity;
    std::string metric;
    std::string allocator;
    std::string config_hash;
};

// Iterative maximum-redundancy allocation parameters. Defaults follow the
// unstructured 7B-scale recipe: start from 50% uniform sparsity and take
// geometrically decaying steps of at most 0.20 down to 0.05.
struct MrpConfig {
    double initial_ratio = 0.5;
    double target_ratio = 0.7;
    double initial_step = 0.2;
    double min_step = 0.05;
    double decay = 0.95;
    OutlierConfig outlier;
    double max_ratio_cap = 0.99;
    bool refresh_activations = true;

    void validate() const;
};

struct MrpTrace {
    struct Step {
        std::size_t iteration = 0;
        std::size_t block = 0;
        double step = 0.0;              // schedule value used this iteration
        std::vector<double> redundancy; // per-block snapshot before pruning
        // Parameter-weighted mean of the commanded ratios after this action.
        double global_sparsity = 0.0;
    };
    std::vector<Step> steps;
    double achieved_sparsity = 0.0;
};

struct MrpResult {
    SparsityPlan plan;
    MrpTrace trace;
};

SparsityPlan allocate_uniform(std::size_t block_count, double r);

// Erdos-Renyi style allocation: per-block density proportional to
// (C_in + C_out) / (C_in * C_out), water-filled so the parameter-weighted
// mean ratio hits r exactly (pre-rounding). dims are (C_out, C_in) pairs.
SparsityPlan allocate_er(const std::vector<std::pair<std::size_t, std::size_t>>& block_dims,
                         double r);

// Order-preserving affine map of the dense-model redundancy profile onto
// [r - lambda, r + lambda], recentered so the parameter-weighted mean ratio
// is r. More redundant blocks receive higher sparsity. block_params may be
// empty for equal-sized blocks.
SparsityPlan allocate_owl(const RedundancyProfile& dense_lrl,
                          const std::vector<std::size_t>& block_params, double r, double lambda);

// Single global threshold over all scores; reports the per-block ratios the
// top-(1-r) selection implies. Ties break by (score, block, flat index).
SparsityPlan allocate_global(const BlockStack& model, const ActivationSet& acts,
                             const MetricDef& metric, double r);

// Iterative maximum-redundancy allocation: uniform pre-prune to
// cfg.initial_ratio, then repeatedly extend the masks of the currently most
// redundant block by the decaying step until global sparsity reaches
// cfg.target_ratio. Mutates the model's masks (monotone). When static_acts
// is given, no forward pass runs and those activations are used throughout;
// otherwise activations refresh through the masked model each iteration
// unless cfg.refresh_activations is off.
MrpResult allocate_mrp(BlockStack& model, const CalibrationBatch& calib, const MetricDef& metric,
                       const MrpConfig& cfg, const ActivationSet* static_acts = nullptr);

// Fraction of pruned weights over all prunable linear layers.
double measure_global_sparsity(const BlockStack& model);

} // namespace mrp
