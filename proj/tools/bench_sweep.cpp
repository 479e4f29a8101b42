// Benchmark: serial reference sweep vs the OpenMP-parallel sweep.
// Verifies that both backends produce identical results before timing them.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "melcert/kepler.hpp"
#include "melcert/melnikov.hpp"
#include "melcert/sweep.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool identical(const std::vector<melcert::MelnikovResult>& a,
               const std::vector<melcert::MelnikovResult>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].value.size() != b[i].value.size()) return false;
        for (Eigen::Index c = 0; c < a[i].value.size(); ++c)
            if (a[i].value[c] != b[i].value[c]) return false;
        if (a[i].error_estimate != b[i].error_estimate) return false;
        if (a[i].nonzero_verdict != b[i].nonzero_verdict) return false;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    int n = 32;          // grid size
    int repeats = 3;     // best-of timing
    double e = 0.5, mu = 0.3;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        const double v = std::atof(argv[i + 1]);
        if (flag == "--n") n = static_cast<int>(v);
        else if (flag == "--repeats") repeats = static_cast<int>(v);
        else if (flag == "--e") e = v;
        else if (flag == "--mu") mu = v;
    }

    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        grid.push_back(static_cast<double>(j) * melcert::kPi / n);

    const melcert::ContourParams cp;
    std::printf("theta sweep benchmark: n=%d, e=%g, mu=%g, openmp=%s\n", n, e,
                mu, melcert::sweep::have_openmp() ? "yes" : "no");

    // Warm-up + correctness check.
    const auto serial0 = melcert::sweep::run_theta_sweep(
        e, mu, 1.0, grid, cp, melcert::sweep::Backend::Serial);
    const auto parallel0 = melcert::sweep::run_theta_sweep(
        e, mu, 1.0, grid, cp, melcert::sweep::Backend::OpenMP);
    if (!identical(serial0, parallel0)) {
        std::printf("FAIL: serial and parallel sweeps disagree\n");
        return 1;
    }
    std::printf("backends agree bitwise on all %d grid points\n", n);

    double best_serial = 1e300, best_parallel = 1e300;
    for (int r = 0; r < repeats; ++r) {
        auto t0 = Clock::now();
        (void)melcert::sweep::run_theta_sweep(e, mu, 1.0, grid, cp,
                                              melcert::sweep::Backend::Serial);
        best_serial = std::min(best_serial, seconds_since(t0));

        t0 = Clock::now();
        (void)melcert::sweep::run_theta_sweep(e, mu, 1.0, grid, cp,
                                              melcert::sweep::Backend::OpenMP);
        best_parallel = std::min(best_parallel, seconds_since(t0));
    }

    std::printf("serial   : %8.3f ms\n", 1e3 * best_serial);
    std::printf("parallel : %8.3f ms\n", 1e3 * best_parallel);
    std::printf("speedup  : %8.2fx\n", best_serial / best_parallel);
    return 0;
}
