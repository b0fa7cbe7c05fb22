#pragma once

#include "mrp/matrix.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mrp {

// Non-negative importance scores, same shape as the scored weights.
struct ScoreMatrix {
    Matrix values;
    std::string metric;
};

// A metric is a named scoring function; allocators only ever see this
// descriptor, so further metrics register at runtime without touching them.
// The mask marks already-pruned entries, which must score exactly zero;
// layer_input may be null for metrics that ignore activations.
struct MetricDef {
    std::string name;
    bool needs_activations = false;
    std::function<Matrix(const Matrix& weights, const std::uint8_t* mask,
                         const Matrix* layer_input)>
        score;
};

const MetricDef& find_metric(const std::string& name);
void register_metric(MetricDef def);
std::vector<std::string> metric_names();

ScoreMatrix score_magnitude(const Matrix& w);
ScoreMatrix score_wanda(const Matrix& w, const Matrix& x);

// Column norms keyed by a content hash of the activation matrix: the
// iterative allocator rescores every iteration while activations only change
// on refresh. Thread-safe.
std::vector<double> cached_column_norms(const Matrix& x);

} // namespace mrp
