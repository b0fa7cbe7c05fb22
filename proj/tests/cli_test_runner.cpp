// End-to-end checks of the command-line tool: every subcommand, the JSON
// config file, artifact contents, and the documented exit codes. Takes the
// binary path as argv[1].

#include "mrp/model_io.hpp"
#include "mrp/propagation.hpp"
#include "mrp/safetensors.hpp"
#include "mrp/serialize.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_dir;
int g_failures = 0;

void check(bool ok, const std::string& what) {
    if (!ok) {
        std::printf("FAIL: %s\n", what.c_str());
        ++g_failures;
    }
}

int run(const std::string& args) {
    const std::string cmd = g_cli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string path(const std::string& rel) {
    return (g_dir / rel).string();
}

bool exists(const std::string& rel) {
    return fs::exists(g_dir / rel);
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) {
        if (c == '\n') ++n;
    }
    return n;
}

double achieved_sparsity_of(const std::string& trace_json) {
    const std::string key = "\"achieved_sparsity\": ";
    const std::size_t pos = trace_json.find(key);
    if (pos == std::string::npos) return -1.0;
    return std::stod(trace_json.substr(pos + key.size()));
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::printf("usage: %s <mrp-binary>\n", argv[0]);
        return 1;
    }
    g_cli = argv[1];
    g_dir = fs::temp_directory_path() / "mrp-cli-tests";
    std::error_code ec;
    fs::remove_all(g_dir, ec);
    fs::create_directories(g_dir);

    // synth: writes model + calibration, deterministically
    check(run("synth --seed 3 --blocks 4 --dim 32 --outlier-frac 0.1 --outlier-scale 8 "
              "--out-dir " + path("m") + " --calib-out calib.safetensors --calib-rows 32") == 0,
          "synth exits 0");
    check(exists("m/model.safetensors"), "synth writes the model");
    check(exists("m/calib.safetensors"), "synth writes the calibration");
    {
        check(run("synth --seed 3 --blocks 4 --dim 32 --outlier-frac 0.1 --outlier-scale 8 "
                  "--out-dir " + path("m2")) == 0,
              "second synth exits 0");
        const std::string a = mrp::read_text_file(path("m/model.safetensors"));
        const std::string b = mrp::read_text_file(path("m2/model.safetensors"));
        check(a == b, "same seed synthesizes byte-identical models");
    }
    const std::string model = " --model " + path("m/model.safetensors");
    const std::string calib = " --calib " + path("m/calib.safetensors");

    // allocate: mrp via config file, flags override
    mrp::write_text_file(path("config.json"),
                         "{\"metric\": \"wanda\", \"target-ratio\": 0.62, "
                         "\"initial-step\": 0.1, \"min-step\": 0.025}");
    check(run("allocate" + model + calib + " --config " + path("config.json") +
              " --out-dir " + path("run1")) == 0,
          "allocate with config exits 0");
    check(exists("run1/plan.json") && exists("run1/trace.json"), "allocate writes plan and trace");
    {
        const std::string plan = mrp::read_text_file(path("run1/plan.json"));
        check(plan.find("\"metric\": \"wanda\"") != std::string::npos,
              "config file sets the metric");
        const double achieved = achieved_sparsity_of(mrp::read_text_file(path("run1/trace.json")));
        check(achieved >= 0.62 && achieved < 0.65, "config file sets the target ratio");
    }
    check(run("allocate" + model + calib + " --config " + path("config.json") +
              " --target-ratio 0.7 --out-dir " + path("run2")) == 0,
          "allocate with overriding flag exits 0");
    {
        const double achieved = achieved_sparsity_of(mrp::read_text_file(path("run2/trace.json")));
        check(achieved >= 0.7 && achieved < 0.73, "explicit flags override the config file");
    }

    // baseline allocators
    for (const std::string alloc : {"uniform", "er", "owl", "global"}) {
        check(run("allocate" + model + calib + " --allocator " + alloc +
                  " --ratio 0.5 --out-dir " + path("base-" + alloc)) == 0,
              "allocate " + alloc + " exits 0");
        const std::string plan = mrp::read_text_file(path("base-" + alloc + "/plan.json"));
        check(plan.find("\"allocator\": \"" + alloc + "\"") != std::string::npos,
              alloc + " plan records its allocator");
    }

    // prune: plan application, mask artifacts, zero-applied weights
    check(run("prune" + model + calib + " --plan " + path("run2/plan.json") +
              " --out-dir " + path("pruned") + " --apply sparse.safetensors") == 0,
          "prune exits 0");
    check(exists("pruned/masks.bin") && exists("pruned/masks.json"), "prune writes masks");
    {
        const mrp::BlockStack sparse = mrp::import_model(path("pruned/sparse.safetensors"));
        std::size_t zeros = 0, total = 0;
        for (const auto& blk : sparse.blocks) {
            for (const auto& layer : blk.layers) {
                total += layer.weights.size();
                for (double v : layer.weights.data) {
                    if (v == 0.0) ++zeros;
                }
            }
        }
        const double sparsity = static_cast<double>(zeros) / static_cast<double>(total);
        check(sparsity > 0.65 && sparsity < 0.75, "zero-applied weights realize the plan");
    }

    // semi-structured prune
    check(run("prune" + model + calib + " --ratio 0.5 --granularity 4:8 --out-dir " +
              path("nm")) == 0,
          "semi-structured prune exits 0");
    {
        const std::string header = mrp::read_text_file(path("nm/masks.json"));
        check(header.find("\"granularity\": \"4:8\"") != std::string::npos,
              "masks.json records the pattern");
    }

    // a plan's recorded granularity is kept unless a flag overrides it
    check(run("allocate" + model + calib + " --allocator uniform --ratio 0.5 "
              "--granularity 4:8 --out-dir " + path("nm-plan")) == 0,
          "allocate with pattern granularity exits 0");
    check(run("prune" + model + calib + " --plan " + path("nm-plan/plan.json") +
              " --out-dir " + path("nm-applied")) == 0,
          "prune from patterned plan exits 0");
    {
        const std::string header = mrp::read_text_file(path("nm-applied/masks.json"));
        check(header.find("\"granularity\": \"4:8\"") != std::string::npos,
              "prune inherits the plan's granularity");
    }

    // lrl - json plus optional csv
    check(run("lrl" + model + calib + " --out-dir " + path("lrl") + " --csv lrl.csv") == 0,
          "lrl exits 0");
    check(exists("lrl/lrl.json") && exists("lrl/lrl.csv"), "lrl writes json and csv");

    // lps - csv with one row per block
    check(run("lps" + model + calib + " --ratio 0.6 --out-dir " + path("lps")) == 0,
          "lps exits 0");
    check(count_lines(mrp::read_text_file(path("lps/lps.csv"))) == 5, "lps.csv has 4 data rows");

    // reversal from csvs and from metrics
    check(run("lps" + model + calib + " --ratio 0.6 --metric magnitude --out-dir " +
              path("lps-mag")) == 0,
          "magnitude lps exits 0");
    check(run("reversal --a " + path("lps/lps.csv") + " --b " + path("lps-mag/lps.csv") +
              " --out-dir " + path("rev")) == 0,
          "reversal from csvs exits 0");
    check(exists("rev/reversal.json"), "reversal writes its json");
    check(run("reversal" + model + calib + " --metric-a magnitude --metric-b wanda "
              "--ratio 0.6 --adjacent-only --out-dir " + path("rev2")) == 0,
          "computed reversal exits 0");

    // shift: prefix mode and single-block mode
    check(run("shift" + model + calib + " --prefix 1 --ratio 0.7 --out-dir " + path("shift")) ==
              0,
          "prefix shift exits 0");
    check(run("shift" + model + calib + " --only-block 3 --ratio 0.7 --out-dir " +
              path("shift-last")) == 0,
          "last-block shift exits 0");
    {
        const std::string csv = mrp::read_text_file(path("shift-last/shift.csv"));
        check(csv == "block,delta\n0,0\n1,0\n2,0\n3,0\n",
              "last-block shift reports all-zero deltas");
    }

    // report: the full artifact set
    check(run("report" + model + calib + " --allocator mrp --target-ratio 0.65 --out-dir " +
              path("report")) == 0,
          "report exits 0");
    for (const char* name :
         {"plan.json", "trace.json", "lrl.csv", "lps.csv", "masks.bin", "masks.json"}) {
        check(exists(std::string("report/") + name), std::string("report writes ") + name);
    }

    // static-activation mode: export activations, reuse them without calib
    {
        const mrp::BlockStack m = mrp::import_model(path("m/model.safetensors"));
        const mrp::CalibrationBatch c = mrp::import_calibration(path("m/calib.safetensors"));
        mrp::export_activations(mrp::forward_collect(m, c), path("acts.safetensors"));
    }
    check(run("allocate" + model + " --activations " + path("acts.safetensors") +
              " --target-ratio 0.65 --out-dir " + path("static")) == 0,
          "static-activation allocate exits 0");

    // exit codes
    check(run("allocate" + model + calib + " --allocator uniform --ratio 1.5 --out-dir " +
              path("bad")) == 2,
          "invalid ratio exits 2");
    check(run("allocate --model /nonexistent.safetensors --out-dir " + path("bad")) == 4,
          "missing model exits 4");
    check(run("allocate" + model + calib + " --metric bogus --out-dir " + path("bad")) == 2,
          "unknown metric exits 2");
    check(run("bogus-subcommand") == 2, "unknown subcommand exits 2");
    check(run("lps" + model + calib + " --evaluator-cmd false --out-dir " + path("bad")) == 2,
          "failing evaluator command exits 2");

    if (g_failures == 0) {
        std::printf("cli tests: all checks passed\n");
        return 0;
    }
    std::printf("cli tests: %d failing checks\n", g_failures);
    return 1;
}
