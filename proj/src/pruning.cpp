#include "mrp/pruning.hpp"

#include "mrp/allocation.hpp"
#include "mrp/errors.hpp"
#include "mrp/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mrp {

namespace {

void require_ratio(double ratio) {
    if (!(ratio >= 0.0 && ratio <= 1.0)) {
        throw validation_error("sparsity ratio must lie in [0, 1], got " + std::to_string(ratio));
    }
}

void require_scores(const ScoreMatrix& scores) {
    require_nonempty(scores.values, "scores");
    require_finite(scores.values, "scores");
}

} // namespace

Granularity Granularity::unstructured() {
    return Granularity{};
}

Granularity Granularity::semi_structured(int n_pruned, int group) {
    Granularity g;
    g.kind = GranularityKind::semi_structured;
    g.n_pruned = n_pruned;
    g.group = group;
    g.validate();
    return g;
}

Granularity Granularity::structured_rows(RowAggregate agg) {
    Granularity g;
    g.kind = GranularityKind::structured_rows;
    g.row_aggregate = agg;
    return g;
}

void Granularity::validate() const {
    if (kind == GranularityKind::semi_structured) {
        if (group < 1) {
            throw validation_error("semi-structured group must be >= 1, got " +
                                   std::to_string(group));
        }
        if (n_pruned < 0 || n_pruned > group) {
            throw validation_error("semi-structured pattern needs 0 <= n_pruned <= group, got " +
                                   std::to_string(n_pruned) + ":" + std::to_string(group));
        }
    }
}

std::string to_string(const Granularity& g) {
    switch (g.kind) {
        case GranularityKind::unstructured:
            return "unstructured";
        case GranularityKind::semi_structured:
            return std::to_string(g.n_pruned) + ":" + std::to_string(g.group);
        case GranularityKind::structured_rows:
            return g.row_aggregate == RowAggregate::sum ? "rows" : "rows-mean";
    }
    return "unstructured";
}

Granularity granularity_from_string(const std::string& s) {
    if (s == "unstructured") return Granularity::unstructured();
    if (s == "rows") return Granularity::structured_rows(RowAggregate::sum);
    if (s == "rows-mean") return Granularity::structured_rows(RowAggregate::mean);
    const auto colon = s.find(':');
    if (colon != std::string::npos) {
        try {
            const int n = std::stoi(s.substr(0, colon));
            const int g = std::stoi(s.substr(colon + 1));
            return Granularity::semi_structured(n, g);
        } catch (const std::invalid_argument&) {
        } catch (const std::out_of_range&) {
        }
    }
    throw validation_error("unknown granularity '" + s +
                           "' (expected unstructured, N:M, rows or rows-mean)");
}

Mask mask_unstructured(const ScoreMatrix& scores, double ratio, const Mask& already_masked) {
    require_scores(scores);
    require_ratio(ratio);
    if (already_masked.rows != scores.values.rows || already_masked.cols != scores.values.cols) {
        throw validation_error("prior mask shape " + std::to_string(already_masked.rows) + "x" +
                               std::to_string(already_masked.cols) + " does not match scores " +
                               shape_string(scores.values));
    }

    const std::size_t total = scores.values.size();
    const std::size_t target = static_cast<std::size_t>(
        std::floor(ratio * static_cast<double>(total)));
    const std::size_t current = already_masked.pruned_count();
    if (target < current) {
        throw validation_error("mask is monotone: requested " + std::to_string(target) +
                               " pruned entries but " + std::to_string(current) +
                               " are already pruned");
    }

    Mask out = already_masked;
    const std::size_t want = target - current;
    if (want == 0) return out;

    std::vector<std::size_t> candidates;
    candidates.reserve(total - current);
    for (std::size_t k = 0; k < total; ++k) {
        if (out.keep[k]) candidates.push_back(k);
    }
    // (score, flat index) ascending is a strict total order, so the first
    // `want` elements after nth_element are exactly the victims.
    const double* s = scores.values.data.data();
    auto lower = [s](std::size_t a, std::size_t b) {
        if (s[a] != s[b]) return s[a] < s[b];
        return a < b;
    };
    std::nth_element(candidates.begin(), candidates.begin() + (want - 1), candidates.end(), lower);
    for (std::size_t v = 0; v < want; ++v) {
        out.keep[candidates[v]] = 0;
    }
    return out;
}

Mask mask_semi_structured(const ScoreMatrix& scores, int n_pruned, int group) {
    require_scores(scores);
    Granularity::semi_structured(n_pruned, group);
    const std::size_t cols = scores.values.cols;
    if (cols % static_cast<std::size_t>(group) != 0) {
        throw validation_error("group " + std::to_string(group) + " does not divide C_in " +
                               std::to_string(cols));
    }

    Mask out(scores.values.rows, cols);
    const double* s = scores.values.data.data();
    std::vector<std::size_t> idx(static_cast<std::size_t>(group));
    for (std::size_t i = 0; i < scores.values.rows; ++i) {
        for (std::size_t g0 = 0; g0 < cols; g0 += static_cast<std::size_t>(group)) {
            const std::size_t base = i * cols + g0;
            std::iota(idx.begin(), idx.end(), base);
            auto lower = [s](std::size_t a, std::size_t b) {
                if (s[a] != s[b]) return s[a] < s[b];
                return a < b;
            };
            std::partial_sort(idx.begin(), idx.begin() + n_pruned, idx.end(), lower);
            for (int v = 0; v < n_pruned; ++v) {
                out.keep[idx[static_cast<std::size_t>(v)]] = 0;
            }
        }
    }
    return out;
}

Mask mask_structured_rows(const ScoreMatrix& scores, double ratio, RowAggregate agg) {
    require_scores(scores);
    require_ratio(ratio);
    const std::size_t rows = scores.values.rows;
    const std::size_t victims = static_cast<std::size_t>(
        std::floor(ratio * static_cast<double>(rows)));

    std::vector<double> row_score(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < scores.values.cols; ++j) {
            acc += scores.values.at(i, j);
        }
        row_score[i] = agg == RowAggregate::mean
                           ? acc / static_cast<double>(scores.values.cols)
                           : acc;
    }

    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&row_score](std::size_t a, std::size_t b) {
        if (row_score[a] != row_score[b]) return row_score[a] < row_score[b];
        return a < b;
    });

    Mask out(rows, scores.values.cols);
    for (std::size_t v = 0; v < victims; ++v) {
        const std::size_t r = order[v];
        std::fill(out.keep.begin() + r * scores.values.cols,
                  out.keep.begin() + (r + 1) * scores.values.cols, std::uint8_t{0});
    }
    return out;
}

int quantize_semi_structured(double ratio, int group) {
    const double x = ratio * static_cast<double>(group);
    const double fl = std::floor(x);
    int n = static_cast<int>(fl) + ((x - fl) > 0.5 ? 1 : 0);
    return std::clamp(n, 0, group);
}

BlockStack apply_plan(const BlockStack& model, const SparsityPlan& plan, const MetricDef& metric,
                      const ActivationSet& acts, const Granularity& granularity) {
    granularity.validate();
    if (plan.ratios.size() != model.block_count()) {
        throw validation_error("plan length " + std::to_string(plan.ratios.size()) +
                               " does not match block count " +
                               std::to_string(model.block_count()));
    }
    for (double r : plan.ratios) require_ratio(r);
    if (metric.needs_activations && acts.size() < model.block_count()) {
        throw validation_error("metric '" + metric.name +
                               "' needs one activation matrix per block, got " +
                               std::to_string(acts.size()));
    }

    BlockStack out = model;
    for (std::size_t b = 0; b < out.block_count(); ++b) {
        Block& blk = out.blocks[b];
        const double ratio = plan.ratios[b];
        std::vector<Matrix> layer_inputs;
        if (metric.needs_activations) {
            layer_inputs = block_layer_inputs(blk, acts[b], out.act);
        }
        for (std::size_t k = 0; k < blk.layers.size(); ++k) {
            LinearLayer& layer = blk.layers[k];
            const Matrix* input = metric.needs_activations ? &layer_inputs[k] : nullptr;
            ScoreMatrix s{metric.score(layer.weights, layer.mask.keep.data(), input), metric.name};
            switch (granularity.kind) {
                case GranularityKind::unstructured:
                    layer.mask = mask_unstructured(s, ratio, layer.mask);
                    break;
                case GranularityKind::semi_structured: {
                    const int n = quantize_semi_structured(ratio, granularity.group);
                    layer.mask = mask_semi_structured(s, n, granularity.group);
                    break;
                }
                case GranularityKind::structured_rows:
                    layer.mask = mask_structured_rows(s, ratio, granularity.row_aggregate);
                    break;
            }
        }
    }
    return out;
}

} // namespace mrp
