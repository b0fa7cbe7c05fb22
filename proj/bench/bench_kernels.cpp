// Times the OpenMP kernels against their serial scalar-loop references on
// identical inputs and reports the speedups. Also cross-checks the results
// so a kernel change that drifts from the reference shows up here too.
//
// Usage: mrp_bench [dim] [rows] [reps]

#include "mrp/kernels.hpp"
#include "mrp/matrix.hpp"
#include "mrp/ref_kernels.hpp"
#include "mrp/synthetic.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace mrp;

namespace {

double time_of(const std::function<void()>& fn, int reps) {
    fn(); // warm-up
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return elapsed.count() / reps;
}

Matrix gen(std::uint64_t seed, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (std::size_t k = 0; k < m.size(); ++k) {
        m.data[k] = 2.0 * unit_uniform(mix64(seed * 0x9e3779b97f4a7c15ull + k)) - 1.0;
    }
    return m;
}

void row(const char* name, double serial, double parallel, bool agree) {
    std::printf("%-22s %12.3f us %12.3f us %8.2fx   %s\n", name, serial * 1e6, parallel * 1e6,
                serial / parallel, agree ? "results agree" : "RESULTS DIFFER");
}

} // namespace

int main(int argc, char** argv) {
    const std::size_t d = argc > 1 ? std::stoul(argv[1]) : 512;
    const std::size_t n = argc > 2 ? std::stoul(argv[2]) : 256;
    const int reps = argc > 3 ? std::atoi(argv[3]) : 5;

#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: not enabled\n");
#endif
    std::printf("weights %zux%zu, activations %zux%zu, %d reps\n\n", d, d, n, d, reps);
    std::printf("%-22s %15s %15s %9s\n", "kernel", "serial", "parallel", "speedup");

    const Matrix w = gen(11, d, d);
    const Matrix x = gen(12, n, d);

    {
        Matrix got, want;
        const double ts = time_of([&] { want = ref::score_magnitude(w); }, reps);
        const double tp = time_of([&] { got = kernels::abs_masked(w, nullptr); }, reps);
        row("magnitude scores", ts, tp, got == want);
    }
    {
        std::vector<double> got, want;
        const double ts = time_of([&] { want = ref::column_l2_norms(x); }, reps);
        const double tp = time_of([&] { got = kernels::column_l2_norms(x); }, reps);
        bool agree = got.size() == want.size();
        for (std::size_t j = 0; agree && j < got.size(); ++j) {
            agree = std::fabs(got[j] - want[j]) <= 1e-9 * std::fabs(want[j]);
        }
        row("column norms", ts, tp, agree);
    }
    {
        Matrix got, want;
        const double ts = time_of([&] { want = ref::score_wanda(w, x); }, reps);
        const double tp = time_of(
            [&] {
                got = kernels::scale_cols_abs_masked(w, kernels::column_l2_norms(x), nullptr);
            },
            reps);
        bool agree = got.same_shape(want);
        for (std::size_t k = 0; agree && k < got.size(); ++k) {
            agree = std::fabs(got.data[k] - want.data[k]) <= 1e-9 * std::fabs(want.data[k]);
        }
        row("wanda scores", ts, tp, agree);
    }
    {
        Matrix got, want;
        const double ts = time_of([&] { want = ref::matmul_wt(x, w); }, reps);
        const double tp = time_of([&] { got = kernels::matmul_masked_wt(x, w, nullptr); }, reps);
        bool agree = got.same_shape(want);
        for (std::size_t k = 0; agree && k < got.size(); ++k) {
            agree = std::fabs(got.data[k] - want.data[k]) <= 1e-9;
        }
        row("forward matmul", ts, tp, agree);
    }
    {
        const Matrix scores = ref::score_magnitude(w);
        const double threshold = 0.5;
        std::size_t got = 0, want = 0;
        const double ts = time_of([&] { want = ref::count_above(scores.data, threshold); }, reps);
        const double tp = time_of(
            [&] { got = kernels::count_above(scores.data.data(), scores.size(), threshold); },
            reps);
        row("outlier count", ts, tp, got == want);
    }
    {
        const Matrix scores = ref::score_magnitude(w);
        double got = 0, want = 0;
        const double ts = time_of([&] { want = ref::layer_redundancy(scores, 5.0); }, reps);
        const double tp = time_of(
            [&] {
                const double mean =
                    kernels::serial_sum(scores.data.data(), scores.size()) /
                    static_cast<double>(scores.size());
                got = 1.0 - static_cast<double>(kernels::count_above(
                                scores.data.data(), scores.size(), 5.0 * mean)) /
                                static_cast<double>(scores.size());
            },
            reps);
        row("layer redundancy", ts, tp, got == want);
    }
    return 0;
}
