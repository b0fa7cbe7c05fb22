#include "mrp/analysis.hpp"

#include "mrp/errors.hpp"
#include "mrp/kernels.hpp"
#include "mrp/model_io.hpp"
#include "mrp/propagation.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <unistd.h>

namespace mrp {

namespace {

void require_same_architecture(const BlockStack& a, const BlockStack& b) {
    bool same = a.block_count() == b.block_count() && a.dim == b.dim && a.act == b.act &&
                a.residual == b.residual;
    for (std::size_t i = 0; same && i < a.block_count(); ++i) {
        same = a.blocks[i].layers.size() == b.blocks[i].layers.size();
        for (std::size_t k = 0; same && k < a.blocks[i].layers.size(); ++k) {
            same = a.blocks[i].layers[k].weights.same_shape(b.blocks[i].layers[k].weights);
        }
    }
    if (!same) {
        throw validation_error("models have different architectures");
    }
}

double mean_abs(const Matrix& m) {
    double acc = 0.0;
    for (double v : m.data) acc += std::fabs(v);
    return acc / static_cast<double>(m.size());
}

double mean_abs_diff(const Matrix& a, const Matrix& b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k) {
        acc += std::fabs(a.data[k] - b.data[k]);
    }
    return acc / static_cast<double>(a.data.size());
}

} // namespace

double evaluate_output_distance(const BlockStack& dense, const BlockStack& pruned,
                                const CalibrationBatch& calib) {
    require_same_architecture(dense, pruned);
    const Matrix out_dense = forward_output(dense, calib);
    const Matrix out_pruned = forward_output(pruned, calib);
    const double diff = mean_abs_diff(out_dense, out_pruned);
    const double scale = mean_abs(out_dense);
    if (scale == 0.0) {
        if (diff == 0.0) return 0.0;
        throw validation_error("output distance undefined: dense output is identically zero");
    }
    return diff / scale;
}

Evaluator make_output_distance_evaluator(const BlockStack& dense_reference) {
    Evaluator e;
    e.name = "output-distance";
    e.eval = [dense_reference](const BlockStack& model, const CalibrationBatch& calib) {
        return evaluate_output_distance(dense_reference, model, calib);
    };
    return e;
}

Evaluator make_command_evaluator(const std::string& command) {
    if (command.empty()) {
        throw validation_error("command evaluator needs a non-empty command");
    }
    Evaluator e;
    e.name = "command";
    e.eval = [command](const BlockStack& model, const CalibrationBatch& calib) {
        namespace fs = std::filesystem;
        static std::atomic<unsigned> counter{0};
        const fs::path dir = fs::temp_directory_path() /
                             ("mrp-eval-" + std::to_string(::getpid()) + "-" +
                              std::to_string(counter.fetch_add(1)));
        fs::create_directories(dir);
        const std::string model_path = (dir / "model.safetensors").string();
        const std::string calib_path = (dir / "calib.safetensors").string();
        export_model(model, model_path, /*apply_masks=*/true);
        export_calibration(calib, calib_path);

        const std::string full = command + " " + model_path + " " + calib_path;
        FILE* pipe = ::popen(full.c_str(), "r");
        if (!pipe) {
            throw io_error("cannot launch evaluator command '" + command + "'");
        }
        std::string output;
        char buf[256];
        while (std::fgets(buf, sizeof(buf), pipe)) output += buf;
        const int status = ::pclose(pipe);

        std::error_code ec;
        fs::remove_all(dir, ec);

        if (status != 0) {
            throw validation_error("evaluator command exited with status " +
                                   std::to_string(status));
        }
        std::istringstream tokens(output);
        std::string token, last;
        while (tokens >> token) last = token;
        try {
            std::size_t used = 0;
            const double value = std::stod(last, &used);
            if (used != last.size() || !std::isfinite(value)) {
                throw std::invalid_argument(last);
            }
            return value;
        } catch (const std::exception&) {
            throw validation_error("evaluator command printed no numeric score (last token: '" +
                                   last + "')");
        }
    };
    return e;
}

LpsProfile profile_lps(const BlockStack& model, const CalibrationBatch& calib,
                       const MetricDef& metric, double probe_ratio, const Evaluator& evaluator,
                       const Granularity& granularity) {
    if (!(probe_ratio >= 0.0 && probe_ratio <= 1.0)) {
        throw validation_error("probe ratio must lie in [0, 1], got " +
                               std::to_string(probe_ratio));
    }
    if (!evaluator.eval) {
        throw validation_error("evaluator '" + evaluator.name + "' has no implementation");
    }

    LpsProfile profile;
    profile.metric = metric.name;
    profile.probe_ratio = probe_ratio;
    profile.evaluator = evaluator.name;
    profile.values.reserve(model.block_count());

    const double base = evaluator.eval(model, calib);
    const ActivationSet acts =
        metric.needs_activations ? forward_collect(model, calib) : ActivationSet{};

    for (std::size_t b = 0; b < model.block_count(); ++b) {
        SparsityPlan probe;
        probe.ratios.assign(model.block_count(), 0.0);
        probe.ratios[b] = probe_ratio;
        probe.metric = metric.name;
        probe.allocator = "lps-probe";
        probe.granularity = granularity;
        try {
            const BlockStack pruned = apply_plan(model, probe, metric, acts, granularity);
            profile.values.push_back(std::fabs(base - evaluator.eval(pruned, calib)));
        } catch (const validation_error& e) {
            throw validation_error("lps probe failed on block " + std::to_string(b) + ": " +
                                   e.what());
        }
    }
    return profile;
}

double reversal_rate(const LpsProfile& a, const LpsProfile& b, bool adjacent_only) {
    const std::size_t n = a.values.size();
    if (n != b.values.size()) {
        throw validation_error("reversal rate needs equal profile lengths, got " +
                               std::to_string(n) + " and " + std::to_string(b.values.size()));
    }
    if (n < 2) {
        throw validation_error("reversal rate needs at least two blocks");
    }

    std::size_t reversed = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j_end = adjacent_only ? std::min(i + 2, n) : n;
        for (std::size_t j = i + 1; j < j_end; ++j) {
            ++pairs;
            const double da = a.values[i] - a.values[j];
            const double db = b.values[i] - b.values[j];
            if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) ++reversed;
        }
    }
    return static_cast<double>(reversed) / static_cast<double>(pairs);
}

std::vector<double> outlier_shift(const BlockStack& model, const CalibrationBatch& calib,
                                  const MetricDef& metric, const SparsityPlan& prefix_plan,
                                  const OutlierConfig& cfg) {
    if (prefix_plan.ratios.size() != model.block_count()) {
        throw validation_error("prefix plan length does not match the block count");
    }
    // The instrument prunes one contiguous run of blocks; a nonzero ratio
    // after a gap would conflate two experiments.
    std::size_t first = prefix_plan.ratios.size(), last = 0;
    for (std::size_t b = 0; b < prefix_plan.ratios.size(); ++b) {
        if (prefix_plan.ratios[b] != 0.0) {
            first = std::min(first, b);
            last = b;
        }
    }
    if (first < prefix_plan.ratios.size()) {
        for (std::size_t b = first; b <= last; ++b) {
            if (prefix_plan.ratios[b] == 0.0) {
                throw validation_error("prefix plan has a nonzero suffix after a gap at block " +
                                       std::to_string(b));
            }
        }
    }

    const ActivationSet acts_dense = forward_collect(model, calib);
    const OutlierConfig dense_cfg{cfg.multiplier, false};

    // Dense weights throughout: the deltas isolate what pruning does to the
    // activations entering each block, not the pruned entries themselves.
    BlockStack dense = model;
    dense.clear_masks();
    const RedundancyProfile before = model_lrl(dense, acts_dense, metric, dense_cfg);

    const BlockStack pruned = apply_plan(model, prefix_plan, metric, acts_dense,
                                         Granularity::unstructured());
    const ActivationSet acts_post = forward_collect(pruned, calib);
    const RedundancyProfile after = model_lrl(dense, acts_post, metric, dense_cfg);

    std::vector<double> deltas(model.block_count());
    for (std::size_t b = 0; b < deltas.size(); ++b) {
        deltas[b] = (1.0 - after.values[b]) - (1.0 - before.values[b]);
    }
    return deltas;
}

} // namespace mrp
