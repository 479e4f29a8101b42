// Resonance detection, the reduced variational equation along a resonant
// torus, its fundamental and monodromy matrices, the unipotent block-matrix
// algebra those monodromies live in, and the nonintegrability certificate
// assembled from them.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "melcert/contour.hpp"
#include "melcert/system.hpp"

namespace melcert {

// Element M(C1, C2, C3) of the unipotent group of block matrices
//
//     [ id_ell   0     C1 ]
//     [ C3     id_m    C2 ]
//     [ 0       0      1  ]
//
// with C1 an ell-vector, C2 an m-vector and C3 an m x ell matrix.  The group
// operations below are exact block algebra (no quadrature), so elements with
// integer entries compose without rounding.
struct UnipotentElement {
    VectorXcd C1;
    VectorXcd C2;
    MatrixXcd C3;
    // Propagated quadrature error for elements produced by monodromy
    // evaluation; exactly 0 for algebraically constructed elements.
    double error = 0.0;

    static UnipotentElement identity(int ell, int m);
    int ell() const { return static_cast<int>(C1.size()); }
    int m() const { return static_cast<int>(C2.size()); }

    // Dense (ell+m+1) x (ell+m+1) realization.
    MatrixXcd to_matrix() const;
    // JSON object {"C1": [[re,im],...], "C2": ..., "C3": ..., "error": e}.
    std::string to_json() const;
};

// M(A)M(B) = M(A1+B1, A3 B1 + A2 + B2, A3+B3).
UnipotentElement unipotent_product(const UnipotentElement& a,
                                   const UnipotentElement& b);

// M^k = M(k C1, (k(k-1)/2) C3 C1 + k C2, k C3), valid for every integer k
// (negative powers compose with the inverse consistently).
UnipotentElement unipotent_power(const UnipotentElement& a, long long k);

// M^{-1} = M(-C1, C3 C1 - C2, -C3).
UnipotentElement unipotent_inverse(const UnipotentElement& a);

// Exact commutation test: the two products differ only in the C2 slot, so
// M(A)M(B) = M(B)M(A) iff A3 B1 == B3 A1 elementwise.
bool commutes(const UnipotentElement& a, const UnipotentElement& b);

// Rational-dependency detection for a frequency vector: finds omega_star > 0
// and an integer vector k with omega = omega_star * k, accepting component
// ratios p/q only when |ratio - p/q| < tol * max(1, |ratio|) / q with
// q <= max_denominator (continued-fraction convergents; exact-integer input
// short-circuits through a gcd).  Returns nullopt when no such pair exists
// within the bounds.
std::optional<ResonanceMatch> detect_resonance(const VectorXd& omega_vec,
                                               double tol = 1e-9,
                                               std::int64_t max_denominator =
                                                   1000000);

// Bundles the resonance at I_star for `sys`: base frequency, integer vector,
// period T* = 2 pi / omega_star, and the frequency Jacobian at I_star.
// subharmonic_n divides omega_star by n (and scales k by n), selecting the
// n-fold cover of the base period.  Throws std::invalid_argument when the
// frequency vector at I_star is not resonant within tol.
ResonanceData make_resonance_data(const GenericSystem& sys,
                                  const VectorXd& I_star, int subharmonic_n = 1,
                                  double tol = 1e-9);

// Fundamental matrix Phi(t; theta) of the reduced variational equation
//
//     xi'  = h_k(I*, omega(I*) tau + theta) lambda,
//     eta' = Domega(I*) xi + g_k(I*, omega(I*) tau + theta) lambda,
//     lambda' = 0,
//
// normalized to the identity at t = 0:
//
//     Phi = [ id_ell        0     Xi(t)  ]
//           [ Domega t    id_m    Psi(t) ]
//           [ 0             0     1      ]
//
// with Xi(t) = int_0^t h_k dtau and Psi(t) = int_0^t (Domega Xi + g_k) dtau.
// Integration runs along `path` when given (its endpoint must be t), else
// along the straight segment from 0 to t.
MatrixXcd fundamental_matrix(const GenericSystem& sys, const ResonanceData& res,
                             const std::vector<double>& theta, Complex t,
                             const std::optional<ContourPath>& path =
                                 std::nullopt,
                             double tol = 1e-10);

// Monodromy element M(C1_hat, C2_hat, 0) of the closed loop `gamma`:
// C1_hat = loop integral of h_k, C2_hat = loop integral of Domega Xi + g_k.
// Uses the system's registered loop evaluator when present, else pointwise
// quadrature along the loop.
UnipotentElement monodromy_gamma(const GenericSystem& sys,
                                 const ResonanceData& res,
                                 const std::vector<double>& theta,
                                 const ContourPath& gamma, double tol = 1e-10);

// Monodromy element of the real-period loop [0, T*]:
// M(Xi(T*), Psi(T*), Domega(I*) T*).  The C3 block is exact.
UnipotentElement monodromy_period(const GenericSystem& sys,
                                  const ResonanceData& res,
                                  const std::vector<double>& theta,
                                  double tol = 1e-10);

enum class Verdict { Positive, Inconclusive };
std::string to_string(Verdict v);

// Nonintegrability certificate: POSITIVE when both numeric witnesses
// Domega(I*) C1_hat and C3_bar C1_hat are nonzero with at least a 10x margin
// over the propagated quadrature error (the monodromy pair then generates a
// noncommutative unipotent subgroup, which rules out meromorphic
// integrability); INCONCLUSIVE otherwise.  The certificate never claims
// integrability.
struct Certificate {
    std::string system;
    VectorXd I_star;
    VectorXi k_vec;
    std::vector<double> theta;
    VectorXcd C1_hat;
    VectorXcd C2_hat;
    MatrixXd C3_bar;
    double margin_A2 = 0.0;     // |Domega C1_hat| vs propagated error
    double margin_lemma = 0.0;  // |C3_bar C1_hat| vs propagated error
    double error_estimate = 0.0;
    Verdict verdict = Verdict::Inconclusive;

    std::string to_json() const;
};

Certificate certify_nonintegrability(const GenericSystem& sys,
                                     const ResonanceData& res,
                                     const std::vector<double>& theta,
                                     const ContourPath& gamma,
                                     double tol = 1e-10);

}  // namespace melcert
