#pragma once

// Complex-time integration paths in the cylinder C/Tstar*Z, the standard
// rectangular loop with quarter-turn dodges around the singular times,
// path-following analytic continuation of the orbit phase, and adaptive
// Gauss-Legendre quadrature over piecewise paths.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "melcert/kepler.hpp"

namespace melcert {

struct LineSeg {
    Complex z0, z1;
};

// z(a) = center + radius * exp(i a), a from a0 to a1 (either direction).
struct ArcSeg {
    Complex center;
    double radius;
    double a0, a1;
};

using Segment = std::variant<LineSeg, ArcSeg>;

Complex seg_point(const Segment& s, double sigma);   // sigma in [0,1]
Complex seg_deriv(const Segment& s, double sigma);   // dz/dsigma
Complex seg_start(const Segment& s);
Complex seg_end(const Segment& s);
double seg_length(const Segment& s);

enum class ArcSide { Left, Right };

// Parameters of the standard loop (recorded by build_gamma so downstream
// evaluators can reconstruct the geometry without parsing segments).
struct GammaSpec {
    double Tstar;
    double height;  // k1/omega1
    double delta;
    double bigM;
    ArcSide side;
};

struct ContourPath {
    std::vector<Segment> segments;
    double Tstar = 0.0;
    std::optional<GammaSpec> gamma;

    bool closed(double tol = 1e-12) const;  // end == start (mod Tstar)
    double total_length() const;
    // minimum distance from a dense sampling of the path to any given point
    double clearance(std::span<const Complex> points) const;
    std::string to_json() const;
};

// The closed loop: start at Tstar/3 on the real axis, run to 2*Tstar/3,
// ascend to height `height - delta`, dodge the singular time at
// 2*Tstar/3 + i*height with a semicircular delta-arc on the chosen side,
// continue to height M, cross to Tstar/3 + iM, descend with the mirrored
// arc around Tstar/3 + i*height, and return to the start.
ContourPath build_gamma(double Tstar, double k1_over_omega1, double delta,
                        double bigM, ArcSide side);

// Two full turns around `center` at radius `radius`, starting from the
// lowest point.  (One turn does not close the continued integrand around a
// square-root branch point; two turns do.)
ContourPath build_double_circle(Complex center, double radius, double Tstar);

struct QuadratureResult {
    Complex value{0.0, 0.0};
    double error_estimate = 0.0;
    std::size_t nodes_used = 0;
    bool converged = true;
};

// f(leg_index, sigma, z) must be analytic on a neighborhood of the path.
using Integrand = std::function<Complex(std::size_t, double, Complex)>;

QuadratureResult integrate(const ContourPath& path, const Integrand& f, double tol);
QuadratureResult integrate_segment(const Segment& seg,
                                   const std::function<Complex(double, Complex)>& f,
                                   double tol, int max_depth = 14);

// Building block for iterated (loop-of-running-integral) quadrature:
// composite-Simpson values of the segment integral and of
// int F(z) dz  with  F(sigma) = int_0^sigma f dz  the running integral from
// the segment start.  n is the number of Simpson pairs (2n+1 evaluations);
// accuracy is O(n^-4) for analytic integrands, so callers double n and
// difference for an error estimate.
struct CumulativeResult {
    Complex integral{0.0, 0.0};
    Complex iterated{0.0, 0.0};
};
CumulativeResult cumulative_segment(const Segment& seg,
                                    const std::function<Complex(double, Complex)>& f,
                                    int n);

// ---------------------------------------------------------------------------
// Path-following continuation of the eccentric anomaly.  A spine is a dense
// sequence of (sigma, t, E) knots per leg built by error-controlled walking
// of the Kepler equation; arbitrary path points are then reachable by a
// short Newton solve seeded from the bracketing knots, which makes spine
// evaluation stateless and safe for out-of-order quadrature refinement.
// ---------------------------------------------------------------------------

struct SpineKnot {
    double sigma;
    Complex t, E;
};

struct Spine {
    KeplerOrbit orbit;
    std::vector<Segment> legs;
    std::vector<std::vector<SpineKnot>> knots;  // per leg
    Complex E_start, E_end;

    EccState eval(std::size_t leg, double sigma) const;
};

// Walk the legs in order starting from E0 at the first leg's start point.
// max_dE caps the per-step change of E (radians); steps are bisected on
// rejection down to 2^-20 of a leg.
Spine build_spine(const KeplerOrbit& orbit, std::span<const Segment> legs,
                  Complex E0, double max_dE = 0.25);

// Honest path-following continuation of the orbit phase phi along a path
// whose start lies on the real axis.  Returns the spine knots with phi
// unwrapped continuously (no branch resets): if the path encircles a branch
// point the final phi will not match the initial one, and that defect is
// faithfully reported by the caller comparing front() and back().
struct PhiNode {
    Complex t, phi, E;
};
std::vector<PhiNode> continue_phi(const KeplerOrbit& orbit, const ContourPath& path);

struct ContinuationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace melcert
