#pragma once

#include "mrp/metrics.hpp"
#include "mrp/model.hpp"

#include <string>

namespace mrp {

struct SparsityPlan;

enum class GranularityKind { unstructured, semi_structured, structured_rows };

// Row ranking aggregate for structured pruning.
enum class RowAggregate { sum, mean };

struct Granularity {
    GranularityKind kind = GranularityKind::unstructured;
    int n_pruned = 0; // semi-structured: zeros per group
    int group = 1;    // semi-structured: window length along the input dim
    RowAggregate row_aggregate = RowAggregate::sum;

    static Granularity unstructured();
    static Granularity semi_structured(int n_pruned, int group);
    static Granularity structured_rows(RowAggregate agg = RowAggregate::sum);

    void validate() const;
};

// "unstructured", "N:M" (e.g. "4:8"), "rows" or "rows-mean".
std::string to_string(const Granularity& g);
Granularity granularity_from_string(const std::string& s);

// Extends already_masked until floor(ratio * size) entries are pruned,
// lowest scores first, ties by flat index ascending. Previously pruned
// entries stay pruned; asking for fewer than already pruned is an error.
Mask mask_unstructured(const ScoreMatrix& scores, double ratio, const Mask& already_masked);

// Prunes exactly n_pruned lowest-scoring entries in every group-length
// window along each row. group must divide the column count.
Mask mask_semi_structured(const ScoreMatrix& scores, int n_pruned, int group);

// Prunes the floor(ratio * rows) rows with the lowest aggregate score.
Mask mask_structured_rows(const ScoreMatrix& scores, double ratio,
                          RowAggregate agg = RowAggregate::sum);

// Nearest n:group pattern for a target ratio, ties toward fewer pruned.
int quantize_semi_structured(double ratio, int group);

// Masks every linear layer of block l to plan.ratios[l] under the given
// metric and granularity. acts may be empty for metrics that ignore
// activations. Returns a modified copy; weights are never changed.
BlockStack apply_plan(const BlockStack& model, const SparsityPlan& plan, const MetricDef& metric,
                      const ActivationSet& acts, const Granularity& granularity);

} // namespace mrp
