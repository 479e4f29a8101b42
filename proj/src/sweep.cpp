#include "melcert/sweep.hpp"

#include <exception>

#ifdef MELCERT_HAVE_OPENMP
#include <omp.h>
#endif

namespace melcert::sweep {

bool have_openmp() {
#ifdef MELCERT_HAVE_OPENMP
    return true;
#else
    return false;
#endif
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

using PointFn = MelnikovResult (*)(double, double, double, double,
                                   const ContourParams&);

MelnikovResult planar_point(double e, double mu, double I1star, double theta,
                            const ContourParams& cp) {
    return melnikov_planar(e, mu, I1star, theta, cp);
}

MelnikovResult spatial_point(double e, double mu, double I1star, double theta,
                             const ContourParams& cp) {
    return melnikov_spatial(e, mu, I1star, theta, cp, SignVariant::Minus);
}

std::vector<MelnikovResult> run_grid(PointFn point, double e, double mu,
                                     double I1star,
                                     const std::vector<double>& theta_grid,
                                     const ContourParams& cp, Backend backend,
                                     int jobs) {
    std::vector<MelnikovResult> out(theta_grid.size());
    if (backend == Backend::OpenMP && have_openmp()) {
#ifdef MELCERT_HAVE_OPENMP
        std::exception_ptr failure;
        const int n = static_cast<int>(theta_grid.size());
        const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (int i = 0; i < n; ++i) {
            try {
                out[static_cast<std::size_t>(i)] =
                    point(e, mu, I1star, theta_grid[static_cast<std::size_t>(i)], cp);
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
#endif
    } else {
        for (std::size_t i = 0; i < theta_grid.size(); ++i)
            out[i] = point(e, mu, I1star, theta_grid[i], cp);
    }
    return out;
}

}  // namespace

std::vector<MelnikovResult> run_theta_sweep(double e, double mu, double I1star,
                                            const std::vector<double>& theta_grid,
                                            const ContourParams& cp,
                                            Backend backend, int jobs) {
    return run_grid(&planar_point, e, mu, I1star, theta_grid, cp, backend, jobs);
}

std::vector<MelnikovResult> run_theta_sweep_spatial(
    double e, double mu, double I1star, const std::vector<double>& theta_grid,
    const ContourParams& cp, Backend backend, int jobs) {
    return run_grid(&spatial_point, e, mu, I1star, theta_grid, cp, backend, jobs);
}

}  // namespace melcert::sweep
