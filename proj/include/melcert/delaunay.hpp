#pragma once

// Action-angle geometry of the Kepler block: radial turning points, the
// radial generating function chi with its action derivatives, the implicit
// radius R(theta1) and its theta1-derivatives, and the polar-block
// generating function hat_chi of the spatial problem together with the
// first-component perturbation average hhat1.

#include <array>

#include "melcert/kepler.hpp"

namespace melcert {

// Action set shared by the planar and spatial operations.  The planar
// operations ignore I3.
struct DelaunayActions {
    double mu = 0.0;  // mass ratio in [0, 1)
    double I1 = 1.0;  // radial action, > 0
    double I2 = 0.0;  // total angular momentum
    double I3 = 0.0;  // axial angular momentum, |I3| <= I2 (spatial only)

    // Planar orbit carrying (mu, I1, I2); validates admissibility.
    KeplerOrbit orbit() const { return KeplerOrbit::from_actions(mu, I1, I2); }
};

struct TurningPoints {
    double r_minus = 0.0;  // perihelion a(1-e)
    double r_plus = 0.0;   // aphelion  a(1+e)
};
TurningPoints turning_points(const KeplerOrbit& orbit);

// chi(r) = integral of the radial momentum from r_minus to r along the
// ascending branch, in closed form (arcsin + square root + arctan terms).
// Increasing on [r_minus, r_plus], chi(r_minus) = 0,
// chi(r_plus) = pi (L - I2) with L the canonical radial action.
// Throws std::domain_error outside [r_minus, r_plus].
double chi(const KeplerOrbit& orbit, double r);

// Normalized radial phase derivative of chi at fixed r: the derivative with
// respect to the canonical radial action L, which equals the mean anomaly
// E - e sin E of the ascending branch.  theta1 = chi1(R) along the motion.
// (The derivative with respect to I1 is cbrt(1-mu) times this value.)
double chi1(const KeplerOrbit& orbit, double r);

// d chi / d I2 at fixed r: minus the true anomaly of the ascending branch,
// in [-pi, 0].
double chi2(const KeplerOrbit& orbit, double r);

// d chi2 / d r on the ascending branch; diverges at the turning points.
double chi2_prime(const KeplerOrbit& orbit, double r);

// R(theta1): orbital radius as a 2pi-periodic function of the radial angle
// (theta1 = 0 at perihelion).  Inverts E - e sin E = theta1, then
// R = a (1 - e cos E); the residual chi1(R) - theta1 (mod 2pi) is < 1e-12
// by construction, uniformly in e in [0, 1).
double solve_R(const KeplerOrbit& orbit, double theta1);
double dR_dtheta1(const KeplerOrbit& orbit, double theta1);

// True anomaly as a continuous (winding-aware) function of theta1:
// nu(theta1 + 2 pi k) = nu(theta1) + 2 pi k.
double nu_from_theta1(const KeplerOrbit& orbit, double theta1);

// Everything the perturbation evaluators need at one theta1, from a single
// Kepler solve.  E and nu carry the winding of theta1; derivative fields are
// branch-signed (negative dR_dtheta1 on the descending half-period).
struct RadialState {
    double E = 0.0;              // eccentric anomaly
    double r = 0.0;              // R(theta1)
    double dR_dtheta1 = 0.0;     // a e sin E / rho
    double nu = 0.0;             // true anomaly
    double chi2_prime = 0.0;     // d chi2/dr at r; +-inf at the turning points
    double dchi2_dtheta1 = 0.0;  // chi2_prime * dR_dtheta1 = -sqrt(1-e^2)/rho^2,
                                 // regular everywhere
};
RadialState radial_state(const KeplerOrbit& orbit, double theta1);

// ---------------------------------------------------------------------------
// Spatial (polar-block) generating function.  Conventions: I2 > 0,
// |I3| <= I2; psi is the colatitude; the ascending branch runs from the
// minimum colatitude psi0 up to pi - psi0.
// ---------------------------------------------------------------------------

// Lower turning colatitude parameter arcsin(I3/I2) (signed like I3).
double psi0(double I2, double I3);

// hat_chi(psi) = integral from psi0 to psi of sqrt(I2^2 - I3^2/sin^2 s) ds
// in closed form; hat_chi(psi0) = 0; identically 0 on the equatorial family
// I2 = I3.  Throws std::domain_error when I2^2 sin^2 psi < I3^2.
double hat_chi(double psi, double I2, double I3);

// d hat_chi / d I2: continuous angle in [0, pi] on the ascending branch,
// increasing from 0 at psi0 to pi at pi - psi0.
double hat_chi2(double psi, double I2, double I3);

// d hat_chi / d I3: continuous angle decreasing from 0 at psi0 to -pi at
// pi - psi0 (for I3 > 0).
double hat_chi3(double psi, double I2, double I3);

// psi-derivatives of the two angles above on the ascending branch; they
// diverge at the turning colatitudes.
double hat_chi2_dpsi(double psi, double I2, double I3);
double hat_chi3_dpsi(double psi, double I2, double I3);

// Psi(theta1, theta2): the colatitude solving
//   hat_chi2(Psi, I2, I3) + chi2(R(theta1), I1, I2) = theta2  (mod 2 pi),
// inverted in closed form (the identity Q^2 + I2^2 cos^2 psi = I2^2 - I3^2
// makes the implicit equation explicitly solvable); the residual against the
// defining equation is below 1e-12.  The equatorial family I2 = I3 yields
// Psi = pi/2 identically.
double solve_Psi(const DelaunayActions& I, double theta1, double theta2);

// First component of the order-5 spatial perturbation average: the
// three-term expression
//     dR/dtheta1 * R sin^2 Psi (3 cos 2A + 1)
//   + R^2 dPsi/dtheta1 sin Psi cos Psi (3 cos 2A + 1)
//   + 3 R^2 sin^2 Psi dPsi/dtheta1 hat_chi3'(Psi) sin 2A,
// with A = theta3 - hat_chi3(Psi) and Psi = Psi(theta1, theta2).  The
// derivative products are evaluated in their exactly equivalent cancelled
// forms, which stay finite on the equatorial family where the individual
// factors degenerate.  theta = (theta1, theta2, theta3).
double eval_h_hat1(const DelaunayActions& I, const std::array<double, 3>& theta);

}  // namespace melcert
