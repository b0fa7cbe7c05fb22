#include "mrp/allocation.hpp"

#include "mrp/errors.hpp"
#include "mrp/hashing.hpp"
#include "mrp/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace mrp {

namespace {

void require_ratio(double r, const char* what) {
    if (!(r >= 0.0 && r <= 1.0)) {
        throw validation_error(std::string(what) + " must lie in [0, 1], got " +
                               std::to_string(r));
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

// Extends every layer mask of one block to the given ratio under the current
// metric scores. Victims are the lowest-scoring still-unmasked entries.
void extend_block_masks(BlockStack& model, std::size_t b, double ratio, const MetricDef& metric,
                        const ActivationSet& acts) {
    Block& blk = model.blocks[b];
    std::vector<Matrix> layer_inputs;
    if (metric.needs_activations) {
        if (acts.size() <= b) {
            throw validation_error("missing activations for block " + std::to_string(b));
        }
        layer_inputs = block_layer_inputs(blk, acts[b], model.act);
    }
    for (std::size_t k = 0; k < blk.layers.size(); ++k) {
        LinearLayer& layer = blk.layers[k];
        const Matrix* input = metric.needs_activations ? &layer_inputs[k] : nullptr;
        ScoreMatrix s{metric.score(layer.weights, layer.mask.keep.data(), input), metric.name};
        layer.mask = mask_unstructured(s, ratio, layer.mask);
    }
}

} // namespace

void MrpConfig::validate() const {
    require_ratio(initial_ratio, "initial ratio");
    if (initial_ratio >= 1.0) {
        throw validation_error("initial ratio must be below 1");
    }
    if (!(target_ratio >= initial_ratio && target_ratio < 1.0)) {
        throw validation_error("target ratio must lie in [initial ratio, 1), got " +
                               std::to_string(target_ratio));
    }
    if (!(max_ratio_cap > target_ratio && max_ratio_cap <= 1.0)) {
        throw validation_error("max ratio cap must lie in (target ratio, 1], got " +
                               std::to_string(max_ratio_cap));
    }
    if (!(initial_step > 0.0)) {
        throw validation_error("initial step must be positive");
    }
    if (!(min_step > 0.0)) {
        throw validation_error("minimum step must be positive (a zero step cannot converge)");
    }
    if (min_step > initial_step) {
        throw validation_error("minimum step must not exceed the initial step");
    }
    if (!(decay > 0.0 && decay <= 1.0)) {
        throw validation_error("decay must lie in (0, 1], got " + std::to_string(decay));
    }
    outlier.validate();
}

SparsityPlan allocate_uniform(std::size_t block_count, double r) {
    if (block_count == 0) {
        throw validation_error("uniform allocation needs at least one block");
    }
    require_ratio(r, "uniform ratio");
    SparsityPlan plan;
    plan.ratios.assign(block_count, r);
    plan.allocator = "uniform";
    plan.config_hash = fnv1a_hex("uniform|r=" + fmt(r));
    return plan;
}

SparsityPlan allocate_er(const std::vector<std::pair<std::size_t, std::size_t>>& block_dims,
                         double r) {
    if (block_dims.empty()) {
        throw validation_error("er allocation needs at least one block");
    }
    if (!(r >= 0.0 && r < 1.0)) {
        throw validation_error("er target must lie in [0, 1), got " + std::to_string(r));
    }

    const std::size_t n = block_dims.size();
    std::vector<double> params(n), kernel(n), density(n, 1.0);
    double total_params = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        const auto [c_out, c_in] = block_dims[l];
        if (c_out == 0 || c_in == 0) {
            throw validation_error("er block " + std::to_string(l) + " has empty dimensions");
        }
        params[l] = static_cast<double>(c_out) * static_cast<double>(c_in);
        kernel[l] = (static_cast<double>(c_in) + static_cast<double>(c_out)) / params[l];
        total_params += params[l];
    }

    SparsityPlan plan;
    plan.allocator = "er";
    plan.config_hash = fnv1a_hex("er|r=" + fmt(r));
    if (r == 0.0) {
        plan.ratios.assign(n, 0.0);
        return plan;
    }

    // Water-filling: scale the density kernel, clamp saturated blocks at 1,
    // rescale the rest until the kept-parameter budget is met exactly.
    const double target_kept = (1.0 - r) * total_params;
    std::vector<bool> clamped(n, false);
    for (;;) {
        double kept_clamped = 0.0;
        double mass_free = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            if (clamped[l]) {
                kept_clamped += params[l];
            } else {
                mass_free += params[l] * kernel[l];
            }
        }
        if (mass_free <= 0.0) {
            throw infeasibility_error("er allocation infeasible: all blocks saturated below the "
                                      "kept-parameter budget");
        }
        const double scale = (target_kept - kept_clamped) / mass_free;
        bool newly_clamped = false;
        for (std::size_t l = 0; l < n; ++l) {
            if (clamped[l]) continue;
            density[l] = scale * kernel[l];
            if (density[l] >= 1.0) {
                density[l] = 1.0;
                clamped[l] = true;
                newly_clamped = true;
            }
        }
        if (!newly_clamped) break;
    }

    plan.ratios.resize(n);
    for (std::size_t l = 0; l < n; ++l) {
        plan.ratios[l] = std::clamp(1.0 - density[l], 0.0, 1.0);
    }
    return plan;
}

SparsityPlan allocate_owl(const RedundancyProfile& dense_lrl,
                          const std::vector<std::size_t>& block_params, double r, double lambda) {
    const std::size_t n = dense_lrl.values.size();
    if (n == 0) {
        throw validation_error("owl allocation needs a non-empty redundancy profile");
    }
    require_ratio(r, "owl target");
    const double band = std::min(r, 1.0 - r);
    if (!(lambda >= 0.0 && lambda <= band + 1e-12)) {
        throw validation_error("owl lambda must lie in [0, min(r, 1-r)] = [0, " + fmt(band) +
                               "], got " + std::to_string(lambda));
    }
    if (!block_params.empty() && block_params.size() != n) {
        throw validation_error("owl block parameter counts do not match the profile length");
    }

    std::vector<double> weight(n, 1.0);
    double total = static_cast<double>(n);
    if (!block_params.empty()) {
        total = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            weight[l] = static_cast<double>(block_params[l]);
            total += weight[l];
        }
    }

    SparsityPlan plan;
    plan.metric = dense_lrl.metric;
    plan.allocator = "owl";
    plan.config_hash = fnv1a_hex("owl|r=" + fmt(r) + "|lambda=" + fmt(lambda));

    double lo = dense_lrl.values[0], hi = dense_lrl.values[0];
    for (double v : dense_lrl.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    plan.ratios.assign(n, r);
    if (lambda > 0.0 && hi > lo) {
        for (std::size_t l = 0; l < n; ++l) {
            plan.ratios[l] =
                (r - lambda) + (dense_lrl.values[l] - lo) * (2.0 * lambda) / (hi - lo);
        }
    }

    // Recenter to the parameter-weighted target; a clamp at [0, 1] re-opens
    // the shift on the remaining blocks.
    std::vector<bool> fixed(n, false);
    for (int pass = 0; pass < 64; ++pass) {
        double fixed_mass = 0.0, free_mass = 0.0, free_weight = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            if (fixed[l]) {
                fixed_mass += weight[l] * plan.ratios[l];
            } else {
                free_mass += weight[l] * plan.ratios[l];
                free_weight += weight[l];
            }
        }
        if (free_weight == 0.0) break;
        const double shift = (r * total - fixed_mass - free_mass) / free_weight;
        bool newly_fixed = false;
        for (std::size_t l = 0; l < n; ++l) {
            if (fixed[l]) continue;
            plan.ratios[l] += shift;
            if (plan.ratios[l] < 0.0 || plan.ratios[l] > 1.0) {
                plan.ratios[l] = std::clamp(plan.ratios[l], 0.0, 1.0);
                fixed[l] = true;
                newly_fixed = true;
            }
        }
        if (!newly_fixed) break;
    }
    return plan;
}

SparsityPlan allocate_global(const BlockStack& model, const ActivationSet& acts,
                             const MetricDef& metric, double r) {
    if (!(r >= 0.0 && r < 1.0)) {
        throw validation_error("global target must lie in [0, 1), got " + std::to_string(r));
    }
    const std::size_t n_blocks = model.block_count();
    if (n_blocks == 0) {
        throw validation_error("global allocation needs at least one block");
    }

    struct Entry {
        double score;
        std::size_t flat; // model-wide flat index, block-major
    };
    std::vector<Entry> entries;
    entries.reserve(model.total_weights());
    std::vector<std::size_t> block_of_entry;
    std::vector<std::size_t> block_sizes(n_blocks, 0);

    std::size_t flat = 0;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const Block& blk = model.blocks[b];
        std::vector<Matrix> layer_inputs;
        if (metric.needs_activations) {
            if (acts.size() <= b) {
                throw validation_error("missing activations for block " + std::to_string(b));
            }
            layer_inputs = block_layer_inputs(blk, acts[b], model.act);
        }
        for (std::size_t k = 0; k < blk.layers.size(); ++k) {
            const LinearLayer& l = blk.layers[k];
            const Matrix* input = metric.needs_activations ? &layer_inputs[k] : nullptr;
            const Matrix s = metric.score(l.weights, l.mask.keep.data(), input);
            for (double v : s.data) {
                entries.push_back(Entry{v, flat++});
            }
            block_sizes[b] += s.size();
        }
    }
    block_of_entry.reserve(entries.size());
    for (std::size_t b = 0; b < n_blocks; ++b) {
        block_of_entry.insert(block_of_entry.end(), block_sizes[b], b);
    }

    const std::size_t victims = static_cast<std::size_t>(
        std::floor(r * static_cast<double>(entries.size())));
    // Flat index is block-major, so (score, flat) ascending realizes the
    // (score, block index, flat index) tie order.
    if (victims > 0) {
        std::nth_element(entries.begin(), entries.begin() + (victims - 1), entries.end(),
                         [](const Entry& a, const Entry& b) {
                             if (a.score != b.score) return a.score < b.score;
                             return a.flat < b.flat;
                         });
    }

    std::vector<std::size_t> pruned_per_block(n_blocks, 0);
    for (std::size_t v = 0; v < victims; ++v) {
        ++pruned_per_block[block_of_entry[entries[v].flat]];
    }

    SparsityPlan plan;
    plan.metric = metric.name;
    plan.allocator = "global";
    plan.config_hash = fnv1a_hex("global|r=" + fmt(r) + "|metric=" + metric.name);
    plan.ratios.resize(n_blocks);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        plan.ratios[b] =
            static_cast<double>(pruned_per_block[b]) / static_cast<double>(block_sizes[b]);
    }
    return plan;
}

MrpResult allocate_mrp(BlockStack& model, const CalibrationBatch& calib, const MetricDef& metric,
                       const MrpConfig& cfg, const ActivationSet* static_acts) {
    cfg.validate();
    model.validate();
    const std::size_t n_blocks = model.block_count();
    if (n_blocks == 0) {
        throw validation_error("mrp allocation needs at least one block");
    }

    ActivationSet acts;
    if (static_acts) {
        acts = *static_acts;
    } else if (metric.needs_activations) {
        acts = forward_collect(model, calib);
    }

    // Global sparsity is the parameter-weighted mean of the commanded
    // ratios; masks realize each ratio within one weight (floor), so the
    // loop must not chase that rounding deficit.
    const double total_weights = static_cast<double>(model.total_weights());
    auto plan_sparsity = [&](const std::vector<double>& r) {
        double mass = 0.0;
        for (std::size_t b = 0; b < n_blocks; ++b) {
            mass += r[b] * static_cast<double>(model.block_weights(b));
        }
        return mass / total_weights;
    };

    std::vector<double> ratios(n_blocks, cfg.initial_ratio);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        extend_block_masks(model, b, cfg.initial_ratio, metric, acts);
    }
    double global = plan_sparsity(ratios);

    MrpResult result;
    result.plan.metric = metric.name;
    result.plan.allocator = "mrp";
    result.plan.config_hash = fnv1a_hex(
        "mrp|r=" + fmt(cfg.initial_ratio) + "|rt=" + fmt(cfg.target_ratio) +
        "|s0=" + fmt(cfg.initial_step) + "|smin=" + fmt(cfg.min_step) +
        "|decay=" + fmt(cfg.decay) + "|m=" + fmt(cfg.outlier.multiplier) +
        "|xm=" + std::string(cfg.outlier.exclude_masked ? "1" : "0") +
        "|cap=" + fmt(cfg.max_ratio_cap) +
        "|refresh=" + std::string(cfg.refresh_activations ? "1" : "0") +
        "|metric=" + metric.name);

    double step = cfg.initial_step;
    std::set<std::size_t> frozen;
    std::size_t iteration = 0;

    while (global < cfg.target_ratio - 1e-12) {
        if (cfg.refresh_activations && static_acts == nullptr && metric.needs_activations) {
            acts = forward_collect(model, calib);
        }
        RedundancyProfile profile = model_lrl(model, acts, metric, cfg.outlier);

        for (std::size_t b = 0; b < n_blocks; ++b) {
            if (ratios[b] >= cfg.max_ratio_cap) frozen.insert(b);
        }
        if (frozen.size() == n_blocks) {
            throw infeasibility_error(
                "mrp: every block reached the ratio cap at global sparsity " + fmt(global) +
                " before the target " + fmt(cfg.target_ratio));
        }
        const std::size_t selected = select_most_redundant(profile, frozen);

        ratios[selected] = std::min(ratios[selected] + step, cfg.max_ratio_cap);
        extend_block_masks(model, selected, ratios[selected], metric, acts);
        global = plan_sparsity(ratios);

        MrpTrace::Step record;
        record.iteration = iteration++;
        record.block = selected;
        record.step = step;
        record.redundancy = profile.values;
        record.global_sparsity = global;
        result.trace.steps.push_back(std::move(record));

        step = std::max(step * cfg.decay, cfg.min_step);
    }

    result.trace.achieved_sparsity = global;
    result.plan.ratios = std::move(ratios);
    return result;
}

double measure_global_sparsity(const BlockStack& model) {
    const std::size_t total = model.total_weights();
    if (total == 0) return 0.0;
    return static_cast<double>(model.total_pruned()) / static_cast<double>(total);
}

} // namespace mrp
