#pragma once

// Unperturbed two-body kinematics in the rotating frame, scaled units:
// ellipse geometry, the true-anomaly time law, and its analytic continuation
// to complex time.  The continuation's singularity layout is controlled by
// two constants of the eccentricity alone:
//   k2 = arccosh(1/e)  -- imaginary anomaly height where 1 + e cos(phi) = 0,
//   k1 = 2 artanh((1-e)/sqrt(1-e^2)) - sqrt(1-e^2)
//      -- imaginary time phase (units of omega1*t) the orbit reaches as
//         Im(phi) -> +inf.  Singular times sit at t = n*T + i*k1/omega1.

#include <complex>
#include <stdexcept>
#include <vector>

namespace melcert {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Scaled two-body orbit: mass ratio mu, eccentricity e, angular momentum p_phi.
// Gravitational parameter is 1-mu.  Everything else is derived.
struct KeplerOrbit {
    double mu = 0.0;
    double e = 0.5;
    double p_phi = 1.0;

    KeplerOrbit() = default;
    KeplerOrbit(double mu_, double e_, double p_phi_);

    double gm() const { return 1.0 - mu; }
    double semi_latus() const { return p_phi * p_phi / gm(); }
    double a() const { return semi_latus() / (1.0 - e * e); }
    // canonical radial action L = sqrt(gm * a) = p_phi / sqrt(1 - e^2)
    double canonical_L() const;
    // mean (radial) motion: omega1 = gm^2 (1-e^2)^{3/2} / p_phi^3 = sqrt(gm/a^3)
    double omega1() const;
    double period() const { return kTwoPi / omega1(); }

    // Radial action in the normalization used by the action-angle chart:
    // I1 = L / (1-mu)^{1/3}, so that omega1 = (1-mu)/I1^3.
    double action_I1() const;

    // Orbit from actions (I1, I2): e = sqrt(1 - I2^2/L^2), p_phi = I2,
    // L = I1 (1-mu)^{1/3}.
    static KeplerOrbit from_actions(double mu, double I1, double I2);
};

// k1(e), k2(e): see header comment.  Domain e in (0,1).
double k1_of_e(double e);
double k2_of_e(double e);

// Singular times of the continued flow in one period cell of C/Tstar:
// t = n*period + i*k1/omega1 for n = 0, 1, ... while n*period < Tstar.
std::vector<Complex> singular_times(const KeplerOrbit& orbit, double Tstar);

// ---------------------------------------------------------------------------
// Eccentric-anomaly machinery.  The continuation backbone works in the
// eccentric anomaly E, where the time law  E - e sin(E) = omega1 * t  is
// entire and every trigonometric quantity of phi is a rational function
// of (sin E, cos E):
//   cos phi = (cos E - e)/rho,  sin phi = sqrt(1-e^2) sin E / rho,
//   1 + e cos phi = (1-e^2)/rho,  with rho = 1 - e cos E.
// ---------------------------------------------------------------------------

struct EccState {
    Complex E;
    Complex cosE, sinE;
    Complex rho;  // 1 - e cos E
};

EccState ecc_state(double e, Complex E);

// Newton solve of E - e sin(E) = z from the seed E0.  The seed selects the
// sheet; convergence failure throws.
Complex solve_kepler_E(double e, Complex z, Complex E0, double tol = 1e-13,
                       int max_iter = 60);

// Real Kepler equation, robust for any real mean anomaly (no reduction of
// the winding: E carries the same multiple of 2*pi as the input).
double solve_kepler_real(double e, double mean_anomaly, double tol = 1e-14);

// phi-quantities from an E-state (valid for complex E; these are the
// analytic continuations, not real-part decompositions):
Complex cos_phi(double e, const EccState& s);
Complex sin_phi(double e, const EccState& s);
Complex one_plus_e_cos_phi(double e, const EccState& s);
// unit phase w = exp(i*phi) as a rational function of E
Complex unit_phase(double e, const EccState& s);

// ---------------------------------------------------------------------------
// True-anomaly time law and its inversion (closed forms).
// ---------------------------------------------------------------------------

enum class TofBranch {
    Principal,  // Re(phi) in (-pi, pi)
    Shifted,    // Re(phi) in (0, 2*pi)
};

// r(phi) = p_phi^2 / ((1-mu)(1 + e cos phi)).  Throws near the pole
// phi = pi + i*k2 (guard |1 + e cos phi| > 1e-10).
Complex radius_of_phi(const KeplerOrbit& orbit, Complex phi);

// Closed-form t(phi) with t(0) = 0:
//  Principal: omega1 t = 2 atan((1-e) tan(phi/2)/sqrt(1-e^2))
//                        - e sqrt(1-e^2) sin(phi)/(1 + e cos(phi))
//  Shifted:   omega1 t = 2 acot((1-e) cot((phi+pi)/2)/sqrt(1-e^2))
//                        - e sqrt(1-e^2) sin(phi)/(1 + e cos(phi)) + pi,
// with acot(x) = atan(1/x).  Throws outside the branch strip.
Complex time_of_flight(const KeplerOrbit& orbit, Complex phi, TofBranch branch);

// Inversion of time_of_flight by Newton iteration seeded at `seed`.  The
// seed selects the sheet: its real part is reduced into a closed-form branch
// window (Principal for |Re| <= pi/2, Shifted otherwise), the target time is
// reduced by whole periods -- t(phi) is only defined mod one period once the
// continuation winds past the anomaly branch cuts -- and the winding is
// restored on return.  Residual < 1e-12, at most 50 iterations.
Complex phi_of_time(const KeplerOrbit& orbit, Complex t, Complex seed);

// dphi/dt along the orbit: omega1 (1 + e cos phi)^2/(1-e^2)^{3/2}
Complex phi_rate(const KeplerOrbit& orbit, Complex phi);

struct KeplerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace melcert
