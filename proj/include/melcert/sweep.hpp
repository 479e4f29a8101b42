// Grid sweeps of the Melnikov evaluators: an OpenMP-parallel kernel and a
// serial reference path producing bitwise-identical results (each grid point
// is an independent deterministic computation).
#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "melcert/melnikov.hpp"

namespace melcert::sweep {

enum class Backend { Serial, OpenMP };

// True when the library was built with OpenMP support.
bool have_openmp();

// FNV-1a 64-bit hash, used to stamp sweep outputs with their configuration.
std::uint64_t fnv1a(std::string_view s);

// Planar Melnikov values over a theta2 grid.  `jobs` <= 0 means the OpenMP
// default thread count; the Serial backend ignores it.  Falls back to the
// serial path when OpenMP is unavailable.
std::vector<MelnikovResult> run_theta_sweep(double e, double mu, double I1star,
                                            const std::vector<double>& theta_grid,
                                            const ContourParams& cp,
                                            Backend backend = Backend::Serial,
                                            int jobs = 0);

// Spatial (equatorial-family) Melnikov values over a theta3 grid.
std::vector<MelnikovResult> run_theta_sweep_spatial(
    double e, double mu, double I1star, const std::vector<double>& theta_grid,
    const ContourParams& cp, Backend backend = Backend::Serial, int jobs = 0);

}  // namespace melcert::sweep
