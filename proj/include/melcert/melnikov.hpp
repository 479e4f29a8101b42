#pragma once

// Evaluation of the Melnikov-type loop integrals along the standard loop:
// the planar integrand in both its structured (R, chi2) and simplified
// trigonometric forms, the spatial equatorial integrand, the top-segment
// asymptotics, the small-circle diagnostic, and the generic-system loop
// integral.

#include <string>
#include <vector>

#include "melcert/contour.hpp"
#include "melcert/system.hpp"

namespace melcert {

// Geometry/tolerance bundle for the standard loop.  delta and M are given
// as multiples of the singular height k1/omega1.
struct ContourParams {
    double delta_rel = 0.05;
    double bigM_rel = 10.0;
    ArcSide side = ArcSide::Left;
    double tol = 1e-10;
};

struct MelnikovResult {
    std::vector<Complex> value;  // length ell (first component carries the signal)
    std::vector<double> theta;   // evaluation angles
    ContourPath contour;         // the loop the evaluation corresponds to
    double error_estimate = 0.0;
    bool nonzero_verdict = false;  // |value| > 10 * error_estimate
    double margin = 0.0;           // |value| / error_estimate

    double abs_value() const;
};

// Oriented integrals of the four pieces of the slit evaluation (columns
// oriented upward); value = real_leg + right_column - left_column + top_leg.
// The two columns agree up to quadrature noise (translation periodicity),
// so the assembled value is effectively real_leg + top_leg.
struct SlitPieces {
    Complex real_leg{0.0, 0.0};
    Complex right_column{0.0, 0.0};
    Complex left_column{0.0, 0.0};
    Complex top_leg{0.0, 0.0};
    double error = 0.0;

    Complex value() const { return real_leg + right_column - left_column + top_leg; }
};

// I^5_1 in the simplified trigonometric form, prefactor 9 mu I2*/(2 I1*):
//   integral of [ sin 2(phi+theta2)
//                 - e sin phi (cos 2(phi+theta2) + 1/3)/(1 + e cos phi) ] dt.
// value = (I^5_1, 0); the second action component has zero frequency
// derivative and contributes nothing.
MelnikovResult melnikov_planar(double e, double mu, double I1star, double theta2,
                               const ContourParams& cp = {});

// The same integral in the structured form: Domega_11 times the loop
// integral of (mu/2) dR/dtheta1 R [3 cos 2(theta2-chi2) + 1
//                                  + 3 R chi2'(R) sin 2(theta2-chi2)],
// evaluated through the continued radius/true-anomaly state.  Cross-oracle
// for the substitution chain between the two displayed forms.
MelnikovResult melnikov_planar_raw(double e, double mu, double I1star, double theta2,
                                   const ContourParams& cp = {});

// Which sign to use in front of the e sin phi term of the spatial
// simplified display; the two printed sources disagree, and only Minus is
// consistent with the structured form (the unit tests arbitrate).
enum class SignVariant { Minus, PlusAsPrinted };

// I^5_1 for the spatial problem on the equatorial resonant family I2 = I3,
// evaluated through the polar-reduced structured integrand (Minus), or the
// literal simplified display with the + sign (PlusAsPrinted).  theta3 takes
// the role theta2 plays in the planar problem.
MelnikovResult melnikov_spatial(double e, double mu, double I1star, double theta3,
                                const ContourParams& cp = {},
                                SignVariant sign = SignVariant::Minus);

// Piece-by-piece decomposition of the simplified planar evaluation
// (diagnostics for the cancellation and asymptotic properties).
SlitPieces slit_pieces_planar(double e, double mu, double I1star, double theta2,
                              const ContourParams& cp = {});

// Closed-form leading coefficient of the top-segment contribution of the
// e sin phi term: M * (2 pi/e^3) [ (2-e^2)/sqrt(1-e^2) i cos 2 theta2
//                                  + 2 sin 2 theta2
//                                  + i e^2/(3 sqrt(1-e^2)) ].
// M is the contour top height in t-units; the coefficient is frequency-free.
Complex top_segment_leading(const KeplerOrbit& orbit, double theta2, double M);

// Numeric top-segment integral the leading term models: the continued
//   integral of sin phi (cos 2(phi+theta2) + 1/3)/(1 + e cos phi) dt
// from 2T*/3 + iM to T*/3 + iM (branch transported up the right column).
QuadratureResult top_segment_integral(const KeplerOrbit& orbit, double theta2,
                                      double M, double tol = 1e-10);

// Integral of the simplified planar integrand around the singular time
// T*/3 + i k1/omega1: a closed two-turn loop of the given radius (one turn
// does not close around the square-root branch point; two do).  Tends to 0
// with the radius.
QuadratureResult small_circle_integral(const KeplerOrbit& orbit, double theta2,
                                       double radius, double tol = 1e-12);

// Generic-system Melnikov vector I^k(theta) = Domega(I*) * C1 over the given
// loop.  Uses the system's branch-tracked loop evaluator when registered,
// else pointwise quadrature of h_k (valid for integrands analytic along the
// path).
MelnikovResult melnikov_generic(const GenericSystem& sys, const ResonanceData& res,
                                const std::vector<double>& theta,
                                const ContourPath& path, double tol = 1e-10);

// Standard loop for the orbit's subharmonic resonance (T* = 3 periods).
ContourPath standard_gamma(const KeplerOrbit& orbit, const ContourParams& cp = {});

}  // namespace melcert
