#include "mrp/metrics.hpp"

#include "mrp/errors.hpp"
#include "mrp/kernels.hpp"

#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace mrp {

namespace {

void require_wanda_shapes(const Matrix& w, const Matrix& x) {
    if (x.rows < 1) {
        throw validation_error("wanda needs at least one calibration row, got shape " +
                               shape_string(x));
    }
    if (x.cols != w.cols) {
        throw validation_error("wanda activation/weight shape mismatch: activations " +
                               shape_string(x) + " vs weights " + shape_string(w));
    }
}

std::uint64_t fnv1a(const void* bytes, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

struct NormCache {
    std::mutex mu;
    // hash -> (rows, cols, norms); shape is checked on hit.
    std::map<std::uint64_t, std::tuple<std::size_t, std::size_t, std::vector<double>>> entries;
};

NormCache& norm_cache() {
    static NormCache cache;
    return cache;
}

struct MetricRegistry {
    std::mutex mu;
    std::map<std::string, MetricDef> defs;
};

MetricRegistry& registry() {
    static MetricRegistry reg;
    static bool seeded = [] {
        MetricDef magnitude;
        magnitude.name = "magnitude";
        magnitude.needs_activations = false;
        magnitude.score = [](const Matrix& w, const std::uint8_t* mask, const Matrix*) {
            require_finite(w, "w");
            return kernels::abs_masked(w, mask);
        };
        reg.defs.emplace(magnitude.name, magnitude);

        MetricDef wanda;
        wanda.name = "wanda";
        wanda.needs_activations = true;
        wanda.score = [](const Matrix& w, const std::uint8_t* mask, const Matrix* x) {
            if (x == nullptr) {
                throw validation_error("wanda metric requires layer input activations");
            }
            require_wanda_shapes(w, *x);
            require_finite(w, "w");
            require_finite(*x, "x");
            return kernels::scale_cols_abs_masked(w, cached_column_norms(*x), mask);
        };
        reg.defs.emplace(wanda.name, wanda);
        return true;
    }();
    (void)seeded;
    return reg;
}

} // namespace

const MetricDef& find_metric(const std::string& name) {
    MetricRegistry& reg = registry();
    std::lock_guard<std::mutex> lock(reg.mu);
    auto it = reg.defs.find(name);
    if (it == reg.defs.end()) {
        std::string known;
        for (const auto& [k, _] : reg.defs) {
            if (!known.empty()) known += ", ";
            known += k;
        }
        throw validation_error("unknown metric '" + name + "' (registered: " + known + ")");
    }
    return it->second;
}

void register_metric(MetricDef def) {
    if (def.name.empty() || !def.score) {
        throw validation_error("metric registration needs a name and a scoring function");
    }
    MetricRegistry& reg = registry();
    std::lock_guard<std::mutex> lock(reg.mu);
    reg.defs[def.name] = std::move(def);
}

std::vector<std::string> metric_names() {
    MetricRegistry& reg = registry();
    std::lock_guard<std::mutex> lock(reg.mu);
    std::vector<std::string> names;
    for (const auto& [k, _] : reg.defs) names.push_back(k);
    return names;
}

ScoreMatrix score_magnitude(const Matrix& w) {
    require_nonempty(w, "w");
    const MetricDef& m = find_metric("magnitude");
    return ScoreMatrix{m.score(w, nullptr, nullptr), m.name};
}

ScoreMatrix score_wanda(const Matrix& w, const Matrix& x) {
    require_nonempty(w, "w");
    require_nonempty(x, "x");
    const MetricDef& m = find_metric("wanda");
    return ScoreMatrix{m.score(w, nullptr, &x), m.name};
}

std::vector<double> cached_column_norms(const Matrix& x) {
    std::uint64_t h = fnv1a(&x.rows, sizeof(x.rows));
    h = fnv1a(&x.cols, sizeof(x.cols), h);
    h = fnv1a(x.data.data(), x.data.size() * sizeof(double), h);

    NormCache& cache = norm_cache();
    {
        std::lock_guard<std::mutex> lock(cache.mu);
        auto it = cache.entries.find(h);
        if (it != cache.entries.end()) {
            const auto& [rows, cols, norms] = it->second;
            if (rows == x.rows && cols == x.cols) return norms;
        }
    }
    auto norms = kernels::column_l2_norms(x);
    {
        std::lock_guard<std::mutex> lock(cache.mu);
        cache.entries.try_emplace(h, std::make_tuple(x.rows, x.cols, norms));
    }
    return norms;
}

} // namespace mrp
