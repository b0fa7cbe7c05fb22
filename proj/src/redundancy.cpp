#include "mrp/redundancy.hpp"

#include "mrp/errors.hpp"
#include "mrp/kernels.hpp"
#include "mrp/propagation.hpp"

namespace mrp {

namespace {

double redundancy_of(const std::vector<double>& population, double multiplier) {
    if (population.empty()) {
        throw validation_error("redundancy population is empty");
    }
    const double mean = kernels::serial_sum(population.data(), population.size()) /
                        static_cast<double>(population.size());
    const std::size_t outliers =
        kernels::count_above(population.data(), population.size(), multiplier * mean);
    return 1.0 - static_cast<double>(outliers) / static_cast<double>(population.size());
}

} // namespace

void OutlierConfig::validate() const {
    if (!(multiplier > 0.0)) {
        throw validation_error("outlier multiplier must be positive, got " +
                               std::to_string(multiplier));
    }
}

double layer_redundancy(const ScoreMatrix& scores, const OutlierConfig& cfg) {
    cfg.validate();
    if (scores.values.empty()) {
        throw validation_error("layer_redundancy: empty score matrix");
    }
    const double mean =
        kernels::serial_sum(scores.values.data.data(), scores.values.size()) /
        static_cast<double>(scores.values.size());
    const std::size_t outliers = kernels::count_above(
        scores.values.data.data(), scores.values.size(), cfg.multiplier * mean);
    return 1.0 - static_cast<double>(outliers) / static_cast<double>(scores.values.size());
}

RedundancyProfile model_lrl(const BlockStack& model, const ActivationSet& acts,
                            const MetricDef& metric, const OutlierConfig& cfg) {
    cfg.validate();
    if (metric.needs_activations && acts.size() < model.block_count()) {
        throw validation_error("missing activations for block " + std::to_string(acts.size()));
    }

    RedundancyProfile profile;
    profile.metric = metric.name;
    profile.outlier_multiplier = cfg.multiplier;
    profile.values.reserve(model.block_count());

    for (std::size_t b = 0; b < model.block_count(); ++b) {
        const Block& blk = model.blocks[b];
        std::vector<Matrix> layer_inputs;
        if (metric.needs_activations) {
            if (b < acts.size() && acts[b].empty()) {
                throw validation_error("missing activations for block " + std::to_string(b));
            }
            layer_inputs = block_layer_inputs(blk, acts[b], model.act);
        }

        std::vector<double> population;
        population.reserve(model.block_weights(b));
        for (std::size_t k = 0; k < blk.layers.size(); ++k) {
            const LinearLayer& l = blk.layers[k];
            const Matrix* input = metric.needs_activations ? &layer_inputs[k] : nullptr;
            const Matrix s = metric.score(l.weights, l.mask.keep.data(), input);
            if (cfg.exclude_masked) {
                for (std::size_t i = 0; i < s.size(); ++i) {
                    if (l.mask.keep[i]) population.push_back(s.data[i]);
                }
            } else {
                population.insert(population.end(), s.data.begin(), s.data.end());
            }
        }
        profile.values.push_back(redundancy_of(population, cfg.multiplier));
    }
    return profile;
}

double max_min_gap(const RedundancyProfile& p) {
    if (p.values.empty()) {
        throw validation_error("max_min_gap: empty redundancy profile");
    }
    double lo = p.values[0];
    double hi = p.values[0];
    for (double v : p.values) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
    return hi - lo;
}

std::size_t select_most_redundant(const RedundancyProfile& p, const std::set<std::size_t>& frozen) {
    bool found = false;
    std::size_t best = 0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        if (frozen.count(i)) continue;
        if (!found || p.values[i] > p.values[best]) {
            best = i;
            found = true;
        }
    }
    if (!found) {
        throw infeasibility_error("allocation exhausted: every block is frozen");
    }
    return best;
}

} // namespace mrp
