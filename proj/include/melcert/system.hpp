#pragma once

// Registration of a perturbed action-angle system: dimensions, frequency map
// with its Jacobian, the order-k perturbation averages h_k / g_k, and an
// optional specialized closed-loop evaluator used by the monodromy layer
// when pointwise evaluation of h_k along a loop is not the right tool
// (branch-tracked continuation for the restricted three-body problem).

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "melcert/contour.hpp"

namespace melcert {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using Eigen::VectorXi;

// Closed-loop integrals of the order-k perturbation along a path:
//   C1 = loop integral of h_k(I, omega(I) tau + theta) dtau          (ell)
//   C2 = loop integral of (Domega(I) Xi(tau) + g_k) dtau,            (m)
// with Xi the running integral of h_k from the loop's basepoint.
struct LoopIntegrals {
    VectorXcd C1;
    VectorXcd C2;
    double error = 0.0;
};

struct GenericSystem {
    std::string name;
    int ell = 0;  // number of actions
    int m = 0;    // number of angles
    int k = 0;    // perturbation order

    // omega(I): R^ell -> R^m frequencies; d_omega(I): m-by-ell Jacobian.
    std::function<VectorXd(const VectorXd&)> omega;
    std::function<MatrixXd(const VectorXd&)> d_omega;

    // h_k(I, theta), g_k(I, theta): the order-k Taylor coefficients (1/k!
    // included) of the action / angle perturbations, analytic in theta and
    // evaluable at complex angles.  Sizes ell and m.
    std::function<VectorXcd(const VectorXd&, const VectorXcd&)> h_k;
    std::function<VectorXcd(const VectorXd&, const VectorXcd&)> g_k;

    // Optional branch-tracked loop evaluator: (path, I, theta, tol).  When
    // absent, loop integrals fall back to pointwise evaluation of h_k/g_k
    // along the path, which is only safe for integrands analytic on a
    // neighborhood of the whole path.
    std::function<LoopIntegrals(const ContourPath&, const VectorXd&,
                                const std::vector<double>&, double)>
        loop_eval;
};

// Frequency-space resonance found by detect_resonance: omega = omega_star *
// k_vec componentwise.
struct ResonanceMatch {
    double omega_star = 0.0;
    VectorXi k_vec;
};

// Full resonance record for a registered system at the resonant action I*.
struct ResonanceData {
    VectorXd I_star;
    double omega_star = 0.0;
    VectorXi k_vec;       // omega(I*) = omega_star * k_vec
    double T_star = 0.0;  // 2 pi / omega_star
    MatrixXd d_omega;     // Domega(I*), m-by-ell
};

// ---------------------------------------------------------------------------
// Restricted three-body problem registrations (planar: ell = m = 2; spatial
// equatorial family: ell = m = 3; perturbation order k = 5).  The returned
// systems carry branch-tracked loop evaluators over the standard loop.
// Implemented alongside the Melnikov evaluators.
// ---------------------------------------------------------------------------
GenericSystem make_crtbp_planar(double mu);
GenericSystem make_crtbp_spatial(double mu);

// Resonant action vectors for the subharmonic family at eccentricity e:
// planar (I1, I2*), spatial equatorial (I1, I2*, I2*).
VectorXd crtbp_planar_actions(double mu, double I1star, double e);
VectorXd crtbp_spatial_actions(double mu, double I1star, double e);

}  // namespace melcert
