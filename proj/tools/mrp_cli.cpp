// Command-line front end: synthesize desk-scale models, compute sparsity
// plans (iterative max-redundancy plus uniform/er/owl/global baselines),
// apply them as masks, and run the redundancy/sensitivity instruments.
//
// Outputs are reproducible byte-for-byte for a fixed config and seed; see
// the README for the file formats.

#include "mrp/allocation.hpp"
#include "mrp/analysis.hpp"
#include "mrp/errors.hpp"
#include "mrp/model_io.hpp"
#include "mrp/propagation.hpp"
#include "mrp/serialize.hpp"
#include "mrp/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace mrp;
namespace fs = std::filesystem;

struct RunConfig {
    std::string config_path;
    std::string model_path;
    std::string remap_path;
    std::string calib_path;
    std::string activations_path;
    std::uint64_t seed = 1;
    std::size_t calib_rows = 128;
    std::string skew_csv;
    std::string metric = "wanda";
    std::string allocator = "mrp";
    double ratio = 0.7; // baseline target / probe / prune ratio
    MrpConfig mrp;
    double owl_lambda = 0.1;
    std::string granularity = "unstructured";
    bool no_refresh = false;
    bool exclude_masked = false;
    double multiplier = 5.0;
    std::string out_dir = ".";
};

std::vector<double> parse_csv_doubles(const std::string& csv, const char* what) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= csv.size() && !csv.empty()) {
        const std::size_t comma = csv.find(',', start);
        const std::string tok =
            comma == std::string::npos ? csv.substr(start) : csv.substr(start, comma - start);
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw validation_error(std::string(what) + ": '" + tok + "' is not a number");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<double> broadcast(std::vector<double> v, std::size_t n, const char* what) {
    if (v.empty() || v.size() == n) return v;
    if (v.size() == 1) return std::vector<double>(n, v[0]);
    throw validation_error(std::string(what) + " needs 1 or " + std::to_string(n) +
                           " comma-separated values, got " + std::to_string(v.size()));
}

void require_exists(const std::string& path, const char* what) {
    if (path.empty()) {
        throw validation_error(std::string(what) + " is required");
    }
    if (!fs::exists(path)) {
        throw io_error(std::string(what) + " '" + path + "' does not exist");
    }
}

BlockStack load_model(const RunConfig& rc) {
    require_exists(rc.model_path, "--model");
    std::vector<std::string> warnings;
    BlockStack model = import_model(rc.model_path, rc.remap_path, &warnings);
    for (const std::string& w : warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    return model;
}

CalibrationBatch load_calib(const RunConfig& rc, std::size_t dim) {
    if (!rc.calib_path.empty()) {
        require_exists(rc.calib_path, "--calib");
        return import_calibration(rc.calib_path);
    }
    const auto skew = broadcast(parse_csv_doubles(rc.skew_csv, "--skew"), dim, "--skew");
    return gen_calibration(rc.seed, rc.calib_rows, dim, skew);
}

std::optional<ActivationSet> load_static_acts(const RunConfig& rc, std::size_t blocks) {
    if (rc.activations_path.empty()) return std::nullopt;
    require_exists(rc.activations_path, "--activations");
    return import_activations(rc.activations_path, blocks);
}

OutlierConfig outlier_config(const RunConfig& rc) {
    OutlierConfig cfg{rc.multiplier, rc.exclude_masked};
    cfg.validate();
    return cfg;
}

SparsityPlan load_plan(const std::string& path) {
    require_exists(path, "--plan");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw io_error("plan file '" + path + "' is not valid JSON: " + e.what());
    }
    SparsityPlan plan;
    if (!j.contains("ratios") || !j["ratios"].is_array()) {
        throw validation_error("plan file '" + path + "' has no ratios array");
    }
    plan.ratios = j["ratios"].get<std::vector<double>>();
    plan.metric = j.value("metric", "");
    plan.allocator = j.value("allocator", "");
    plan.config_hash = j.value("config_hash", "");
    plan.granularity = granularity_from_string(j.value("granularity", "unstructured"));
    return plan;
}

std::vector<double> load_profile_csv(const std::string& path) {
    require_exists(path, "profile csv");
    const std::string text = read_text_file(path);
    std::vector<double> values;
    std::size_t pos = text.find('\n'); // skip header
    if (pos == std::string::npos) {
        throw io_error("profile csv '" + path + "' has no data rows");
    }
    ++pos;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        const std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw io_error("profile csv '" + path + "' has a malformed row: " + line);
        }
        try {
            values.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw io_error("profile csv '" + path + "' has a non-numeric value in: " + line);
        }
    }
    return values;
}

void write_in_dir(const RunConfig& rc, const std::string& name, const std::string& content) {
    fs::create_directories(rc.out_dir);
    const std::string path = (fs::path(rc.out_dir) / name).string();
    write_text_file(path, content);
    std::cout << "wrote " << path << "\n";
}

MrpConfig mrp_config(const RunConfig& rc) {
    MrpConfig cfg = rc.mrp;
    cfg.outlier = outlier_config(rc);
    cfg.refresh_activations = !rc.no_refresh;
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int run_synth(const RunConfig& rc, std::size_t blocks, std::size_t dim,
              const std::string& frac_csv, const std::string& scale_csv,
              bool no_residual, const std::string& nonlinearity,
              const std::string& calib_out) {
    OutlierSpec spec;
    const auto fracs = broadcast(parse_csv_doubles(frac_csv, "--outlier-frac"), blocks,
                                 "--outlier-frac");
    const auto scales = broadcast(parse_csv_doubles(scale_csv, "--outlier-scale"), blocks,
                                  "--outlier-scale");
    if (!fracs.empty() || !scales.empty()) {
        spec.blocks.resize(blocks);
        for (std::size_t b = 0; b < blocks; ++b) {
            if (!fracs.empty()) spec.blocks[b].outlier_fraction = fracs[b];
            if (!scales.empty()) spec.blocks[b].outlier_scale = scales[b];
        }
    }

    BlockStack model = gen_model(rc.seed, blocks, dim, spec);
    model.residual = !no_residual;
    model.act = nonlinearity_from_string(nonlinearity);

    fs::create_directories(rc.out_dir);
    const std::string model_path = (fs::path(rc.out_dir) / "model.safetensors").string();
    export_model(model, model_path, false, "synth:seed=" + std::to_string(rc.seed));
    std::cout << "wrote " << model_path << "\n";

    if (!calib_out.empty()) {
        const auto skew = broadcast(parse_csv_doubles(rc.skew_csv, "--skew"), dim, "--skew");
        const CalibrationBatch calib = gen_calibration(rc.seed, rc.calib_rows, dim, skew);
        const std::string calib_path = (fs::path(rc.out_dir) / calib_out).string();
        export_calibration(calib, calib_path);
        std::cout << "wrote " << calib_path << "\n";
    }
    return 0;
}

struct AllocationOutput {
    SparsityPlan plan;
    MrpTrace trace;
    BlockStack model; // masks reflect the plan for mrp
};

AllocationOutput run_allocator(const RunConfig& rc) {
    AllocationOutput out;
    out.model = load_model(rc);
    const MetricDef& metric = find_metric(rc.metric);
    const std::size_t blocks = out.model.block_count();

    const auto static_acts = load_static_acts(rc, blocks);
    CalibrationBatch calib;
    if (!static_acts) {
        calib = load_calib(rc, out.model.dim);
    }

    if (rc.allocator == "mrp") {
        const MrpConfig cfg = mrp_config(rc);
        MrpResult res = allocate_mrp(out.model, calib, metric, cfg,
                                     static_acts ? &*static_acts : nullptr);
        out.plan = std::move(res.plan);
        out.trace = std::move(res.trace);
    } else if (rc.allocator == "uniform") {
        out.plan = allocate_uniform(blocks, rc.ratio);
    } else if (rc.allocator == "er") {
        std::vector<std::pair<std::size_t, std::size_t>> dims;
        for (const Block& b : out.model.blocks) {
            dims.emplace_back(b.layers[0].weights.rows, b.layers[0].weights.cols);
        }
        out.plan = allocate_er(dims, rc.ratio);
    } else if (rc.allocator == "owl") {
        const ActivationSet acts = static_acts ? *static_acts
                                   : metric.needs_activations
                                       ? forward_collect(out.model, calib)
                                       : ActivationSet{};
        const RedundancyProfile lrl = model_lrl(out.model, acts, metric, outlier_config(rc));
        std::vector<std::size_t> params;
        for (std::size_t b = 0; b < blocks; ++b) params.push_back(out.model.block_weights(b));
        out.plan = allocate_owl(lrl, params, rc.ratio, rc.owl_lambda);
    } else if (rc.allocator == "global") {
        const ActivationSet acts = static_acts ? *static_acts
                                   : metric.needs_activations
                                       ? forward_collect(out.model, calib)
                                       : ActivationSet{};
        out.plan = allocate_global(out.model, acts, metric, rc.ratio);
    } else {
        throw validation_error("unknown allocator '" + rc.allocator +
                               "' (expected mrp, uniform, er, owl or global)");
    }

    out.plan.metric = metric.name;
    out.plan.granularity = granularity_from_string(rc.granularity);

    if (rc.allocator != "mrp") {
        double mass = 0.0;
        for (std::size_t b = 0; b < blocks; ++b) {
            mass += out.plan.ratios[b] * static_cast<double>(out.model.block_weights(b));
        }
        out.trace.achieved_sparsity = mass / static_cast<double>(out.model.total_weights());
    }
    return out;
}

int run_allocate(const RunConfig& rc) {
    const AllocationOutput out = run_allocator(rc);
    write_in_dir(rc, "plan.json", plan_to_json(out.plan));
    write_in_dir(rc, "trace.json", trace_to_json(out.trace, out.plan));
    std::cout << "achieved sparsity " << format_g9(out.trace.achieved_sparsity) << "\n";
    return 0;
}

int run_prune(const RunConfig& rc, const std::string& plan_path, const std::string& apply_out,
              bool granularity_given) {
    BlockStack model = load_model(rc);
    const MetricDef& metric = find_metric(rc.metric);

    SparsityPlan plan;
    if (!plan_path.empty()) {
        plan = load_plan(plan_path);
        if (!plan.metric.empty() && plan.metric != metric.name) {
            std::cerr << "warning: plan was derived with metric '" << plan.metric
                      << "', applying with '" << metric.name << "'\n";
        }
    } else {
        plan = allocate_uniform(model.block_count(), rc.ratio);
    }
    // An explicit flag wins; otherwise keep the granularity the plan records.
    if (granularity_given || plan_path.empty()) {
        plan.granularity = granularity_from_string(rc.granularity);
    }

    ActivationSet acts;
    if (metric.needs_activations) {
        const auto static_acts = load_static_acts(rc, model.block_count());
        acts = static_acts ? *static_acts
                           : forward_collect(model, load_calib(rc, model.dim));
    }

    model = apply_plan(model, plan, metric, acts, plan.granularity);

    fs::create_directories(rc.out_dir);
    const std::string bin = (fs::path(rc.out_dir) / "masks.bin").string();
    const std::string json = (fs::path(rc.out_dir) / "masks.json").string();
    export_masks(model, plan, bin, json);
    std::cout << "wrote " << bin << "\nwrote " << json << "\n";

    if (!apply_out.empty()) {
        const std::string path = (fs::path(rc.out_dir) / apply_out).string();
        export_model(model, path, /*apply_masks=*/true, "pruned:" + plan.allocator);
        std::cout << "wrote " << path << "\n";
    }
    std::cout << "global sparsity " << format_g9(measure_global_sparsity(model)) << "\n";
    return 0;
}

int run_lrl(const RunConfig& rc, const std::string& csv_name) {
    BlockStack model = load_model(rc);
    const MetricDef& metric = find_metric(rc.metric);
    ActivationSet acts;
    if (metric.needs_activations) {
        const auto static_acts = load_static_acts(rc, model.block_count());
        acts = static_acts ? *static_acts
                           : forward_collect(model, load_calib(rc, model.dim));
    }
    const RedundancyProfile lrl = model_lrl(model, acts, metric, outlier_config(rc));
    write_in_dir(rc, "lrl.json", redundancy_to_json(lrl));
    if (!csv_name.empty()) {
        write_in_dir(rc, csv_name, profile_to_csv(lrl.values, "redundancy"));
    }
    std::cout << "max-min gap " << format_g9(max_min_gap(lrl)) << "\n";
    return 0;
}

int run_lps(const RunConfig& rc, const std::string& evaluator_cmd) {
    const BlockStack model = load_model(rc);
    const CalibrationBatch calib = load_calib(rc, model.dim);
    const MetricDef& metric = find_metric(rc.metric);
    const Evaluator evaluator = evaluator_cmd.empty()
                                    ? make_output_distance_evaluator(model)
                                    : make_command_evaluator(evaluator_cmd);
    const LpsProfile lps = profile_lps(model, calib, metric, rc.ratio, evaluator,
                                       granularity_from_string(rc.granularity));
    write_in_dir(rc, "lps.csv", profile_to_csv(lps.values, "sensitivity"));
    return 0;
}

int run_reversal(const RunConfig& rc, const std::string& csv_a, const std::string& csv_b,
                 const std::string& metric_a, const std::string& metric_b,
                 bool adjacent_only) {
    LpsProfile a, b;
    if (!csv_a.empty() || !csv_b.empty()) {
        a.values = load_profile_csv(csv_a);
        b.values = load_profile_csv(csv_b);
        a.evaluator = b.evaluator = "csv";
    } else {
        const BlockStack model = load_model(rc);
        const CalibrationBatch calib = load_calib(rc, model.dim);
        const Evaluator evaluator = make_output_distance_evaluator(model);
        const Granularity g = granularity_from_string(rc.granularity);
        a = profile_lps(model, calib, find_metric(metric_a), rc.ratio, evaluator, g);
        b = profile_lps(model, calib, find_metric(metric_b), rc.ratio, evaluator, g);
    }
    const double rate = reversal_rate(a, b, adjacent_only);
    std::string out = "{\n  \"schema_version\": 1,\n";
    out += "  \"adjacent_only\": " + std::string(adjacent_only ? "true" : "false") + ",\n";
    out += "  \"reversal_rate\": " + format_g9(rate) + "\n}\n";
    write_in_dir(rc, "reversal.json", out);
    std::cout << "reversal rate " << format_g9(rate) << "\n";
    return 0;
}

int run_shift(const RunConfig& rc, std::size_t prefix, int only_block) {
    const BlockStack model = load_model(rc);
    const CalibrationBatch calib = load_calib(rc, model.dim);

    SparsityPlan plan;
    plan.ratios.assign(model.block_count(), 0.0);
    plan.allocator = "shift-probe";
    if (only_block >= 0) {
        if (static_cast<std::size_t>(only_block) >= model.block_count()) {
            throw validation_error("--only-block is out of range");
        }
        plan.ratios[static_cast<std::size_t>(only_block)] = rc.ratio;
    } else {
        if (prefix == 0 || prefix > model.block_count()) {
            throw validation_error("--prefix must name 1.." +
                                   std::to_string(model.block_count()) + " blocks");
        }
        for (std::size_t b = 0; b < prefix; ++b) plan.ratios[b] = rc.ratio;
    }

    const auto deltas =
        outlier_shift(model, calib, find_metric(rc.metric), plan, outlier_config(rc));
    write_in_dir(rc, "shift.csv", profile_to_csv(deltas, "delta"));
    return 0;
}

int run_report(const RunConfig& rc, const std::string& evaluator_cmd) {
    const AllocationOutput out = run_allocator(rc);
    const MetricDef& metric = find_metric(rc.metric);

    // Redundancy after allocation, with activations refreshed through the
    // pruned model (static activations reuse the provided set).
    const auto static_acts = load_static_acts(rc, out.model.block_count());
    CalibrationBatch calib;
    if (!static_acts) calib = load_calib(rc, out.model.dim);

    BlockStack pruned = out.model;
    if (rc.allocator != "mrp") {
        ActivationSet acts = static_acts ? *static_acts
                             : metric.needs_activations
                                 ? forward_collect(pruned, calib)
                                 : ActivationSet{};
        pruned = apply_plan(pruned, out.plan, metric, acts, Granularity::unstructured());
    }
    ActivationSet refreshed = static_acts ? *static_acts
                              : metric.needs_activations
                                  ? forward_collect(pruned, calib)
                                  : ActivationSet{};
    const RedundancyProfile lrl = model_lrl(pruned, refreshed, metric, outlier_config(rc));

    // Sensitivity of the dense model probed at the target ratio.
    const BlockStack dense = load_model(rc);
    const CalibrationBatch lps_calib = rc.activations_path.empty()
                                           ? calib
                                           : load_calib(rc, dense.dim);
    const double probe = rc.allocator == "mrp" ? rc.mrp.target_ratio : rc.ratio;
    const Evaluator evaluator = evaluator_cmd.empty()
                                    ? make_output_distance_evaluator(dense)
                                    : make_command_evaluator(evaluator_cmd);
    const LpsProfile lps = profile_lps(dense, lps_calib, metric, probe, evaluator,
                                       granularity_from_string(rc.granularity));

    export_report(pruned, out.plan, out.trace, lrl, lps, rc.out_dir);
    std::cout << "wrote report to " << rc.out_dir << "\n";
    std::cout << "achieved sparsity " << format_g9(out.trace.achieved_sparsity)
              << ", max-min gap " << format_g9(max_min_gap(lrl)) << "\n";
    return 0;
}

// Expands --config file.json into command-line tokens placed right after the
// subcommand, so explicit flags win.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::string config_path;
    for (std::size_t i = 1; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") config_path = args[i + 1];
    }
    if (config_path.empty()) return args;

    require_exists(config_path, "--config");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(config_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw io_error("config '" + config_path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) {
        throw io_error("config '" + config_path + "' must hold a JSON object");
    }

    std::vector<std::string> expanded;
    expanded.push_back(args[0]);
    if (args.size() > 1) expanded.push_back(args[1]); // subcommand
    for (const auto& [key, value] : j.items()) {
        if (value.is_boolean()) {
            if (value.get<bool>()) expanded.push_back("--" + key);
            continue;
        }
        expanded.push_back("--" + key);
        expanded.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
    for (std::size_t i = 2; i < args.size(); ++i) expanded.push_back(args[i]);
    return expanded;
}

} // namespace

int main(int argc, char** argv) {
    RunConfig rc;

    CLI::App app{"Layerwise sparsity allocation toolkit"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    auto add_common = [&rc](CLI::App* sub, bool with_model) {
        sub->add_option("--config", rc.config_path, "JSON config file; flags override it");
        sub->add_option("--out-dir", rc.out_dir, "output directory");
        sub->add_option("--seed", rc.seed, "seed for synthesized data");
        if (with_model) {
            sub->add_option("--model", rc.model_path, "model container file");
            sub->add_option("--remap", rc.remap_path, "tensor-name remap JSON");
            sub->add_option("--calib", rc.calib_path, "calibration container file");
            sub->add_option("--calib-rows", rc.calib_rows, "rows when synthesizing calibration");
            sub->add_option("--skew", rc.skew_csv, "per-column calibration scale (csv)");
            sub->add_option("--activations", rc.activations_path,
                            "precomputed per-block activations (static mode)");
            sub->add_option("--metric", rc.metric, "scoring metric (magnitude|wanda)");
            sub->add_option("--multiplier", rc.multiplier, "outlier threshold multiplier");
            sub->add_flag("--exclude-masked", rc.exclude_masked,
                          "drop masked entries from the redundancy population");
            sub->add_option("--granularity", rc.granularity,
                            "unstructured | N:M | rows | rows-mean");
        }
    };

    // synth
    std::size_t synth_blocks = 4, synth_dim = 64;
    std::string frac_csv, scale_csv, nonlinearity = "relu", calib_out;
    bool no_residual = false;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic model");
    add_common(synth, false);
    synth->add_option("--blocks", synth_blocks, "number of blocks");
    synth->add_option("--dim", synth_dim, "embedding width");
    synth->add_option("--outlier-frac", frac_csv, "per-block outlier fraction (csv or scalar)");
    synth->add_option("--outlier-scale", scale_csv, "per-block outlier scale (csv or scalar)");
    synth->add_flag("--no-residual", no_residual, "disable residual connections");
    synth->add_option("--nonlinearity", nonlinearity, "relu | identity");
    synth->add_option("--calib-out", calib_out, "also write a calibration file with this name");
    synth->add_option("--calib-rows", rc.calib_rows, "rows for the calibration file");
    synth->add_option("--skew", rc.skew_csv, "per-column calibration scale (csv)");

    // allocate
    CLI::App* allocate = app.add_subcommand("allocate", "compute a sparsity plan");
    add_common(allocate, true);
    allocate->add_option("--allocator", rc.allocator, "mrp | uniform | er | owl | global");
    allocate->add_option("--ratio", rc.ratio, "target sparsity for the baselines");
    allocate->add_option("--lambda", rc.owl_lambda, "owl band half-width");
    allocate->add_option("--initial-ratio", rc.mrp.initial_ratio, "mrp pre-prune ratio");
    allocate->add_option("--target-ratio", rc.mrp.target_ratio, "mrp target sparsity");
    allocate->add_option("--initial-step", rc.mrp.initial_step, "mrp first step size");
    allocate->add_option("--min-step", rc.mrp.min_step, "mrp step floor");
    allocate->add_option("--decay", rc.mrp.decay, "mrp step decay per iteration");
    allocate->add_option("--cap", rc.mrp.max_ratio_cap, "per-block ratio cap");
    allocate->add_flag("--no-refresh", rc.no_refresh,
                       "reuse the initial activations instead of refreshing");

    // prune
    std::string plan_path, apply_out;
    CLI::App* prune = app.add_subcommand("prune", "apply a plan as masks");
    add_common(prune, true);
    prune->add_option("--plan", plan_path, "plan.json to apply");
    prune->add_option("--ratio", rc.ratio, "uniform ratio when no plan is given");
    prune->add_option("--apply", apply_out, "also write zero-applied weights to this file");

    // lrl
    std::string lrl_csv;
    CLI::App* lrl = app.add_subcommand("lrl", "per-block redundancy profile");
    add_common(lrl, true);
    lrl->add_option("--csv", lrl_csv, "also write the profile as csv with this name");

    // lps
    std::string evaluator_cmd;
    CLI::App* lps = app.add_subcommand("lps", "per-block pruning sensitivity profile");
    add_common(lps, true);
    lps->add_option("--ratio", rc.ratio, "probe ratio");
    lps->add_option("--evaluator-cmd", evaluator_cmd,
                    "external evaluator: `cmd <model> <calib>` printing a score");

    // reversal
    std::string csv_a, csv_b, metric_a = "magnitude", metric_b = "wanda";
    bool adjacent_only = false;
    CLI::App* reversal = app.add_subcommand("reversal", "sensitivity reversal rate");
    add_common(reversal, true);
    reversal->add_option("--a", csv_a, "first lps csv");
    reversal->add_option("--b", csv_b, "second lps csv");
    reversal->add_option("--metric-a", metric_a, "first metric when computing profiles");
    reversal->add_option("--metric-b", metric_b, "second metric when computing profiles");
    reversal->add_option("--ratio", rc.ratio, "probe ratio when computing profiles");
    reversal->add_flag("--adjacent-only", adjacent_only, "count only adjacent block pairs");

    // shift
    std::size_t prefix = 1;
    int only_block = -1;
    CLI::App* shift = app.add_subcommand("shift", "downstream outlier-ratio shift");
    add_common(shift, true);
    shift->add_option("--prefix", prefix, "prune blocks [0, k) at the given ratio");
    shift->add_option("--only-block", only_block, "prune a single block instead");
    shift->add_option("--ratio", rc.ratio, "prune ratio for the probe");

    // report
    CLI::App* report = app.add_subcommand("report", "allocate and export the full artifact set");
    add_common(report, true);
    report->add_option("--allocator", rc.allocator, "mrp | uniform | er | owl | global");
    report->add_option("--ratio", rc.ratio, "baseline target / lps probe ratio");
    report->add_option("--lambda", rc.owl_lambda, "owl band half-width");
    report->add_option("--initial-ratio", rc.mrp.initial_ratio, "mrp pre-prune ratio");
    report->add_option("--target-ratio", rc.mrp.target_ratio, "mrp target sparsity");
    report->add_option("--initial-step", rc.mrp.initial_step, "mrp first step size");
    report->add_option("--min-step", rc.mrp.min_step, "mrp step floor");
    report->add_option("--decay", rc.mrp.decay, "mrp step decay per iteration");
    report->add_option("--cap", rc.mrp.max_ratio_cap, "per-block ratio cap");
    report->add_flag("--no-refresh", rc.no_refresh,
                     "reuse the initial activations instead of refreshing");
    report->add_option("--evaluator-cmd", evaluator_cmd,
                       "external evaluator for the lps profile");

    try {
        const std::vector<std::string> args = expand_config(argc, argv);
        std::vector<const char*> raw;
        raw.reserve(args.size());
        for (const std::string& a : args) raw.push_back(a.c_str());
        app.parse(static_cast<int>(raw.size()), raw.data());

        if (synth->parsed()) {
            return run_synth(rc, synth_blocks, synth_dim, frac_csv, scale_csv, no_residual,
                             nonlinearity, calib_out);
        }
        if (allocate->parsed()) return run_allocate(rc);
        if (prune->parsed()) {
            return run_prune(rc, plan_path, apply_out, prune->count("--granularity") > 0);
        }
        if (lrl->parsed()) return run_lrl(rc, lrl_csv);
        if (lps->parsed()) return run_lps(rc, evaluator_cmd);
        if (reversal->parsed()) {
            return run_reversal(rc, csv_a, csv_b, metric_a, metric_b, adjacent_only);
        }
        if (shift->parsed()) return run_shift(rc, prefix, only_block);
        if (report->parsed()) return run_report(rc, evaluator_cmd);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const mrp::validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const mrp::infeasibility_error& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const mrp::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
