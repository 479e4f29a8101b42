#include "melcert/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace melcert {

namespace {

constexpr double kCircularEcc = 1e-12;

// Ascending-branch eccentric anomaly in [0, pi] for r in [r_minus, r_plus],
// with a small relative slack for endpoint rounding.
double ascending_E(const KeplerOrbit& orbit, double r) {
    const double a = orbit.a();
    if (orbit.e < kCircularEcc) {
        if (std::abs(r - a) > 1e-9 * a)
            throw std::domain_error("chi: radius off the circular orbit");
        return 0.0;
    }
    double c = (1.0 - r / a) / orbit.e;
    if (std::abs(c) > 1.0) {
        if (std::abs(c) > 1.0 + 1e-10)
            throw std::domain_error("chi: radius outside [r_minus, r_plus]");
        c = std::copysign(1.0, c);
    }
    return std::acos(c);
}

double true_anomaly_of_E(double e, double E) {
    return 2.0 * std::atan2(std::sqrt(1.0 + e) * std::sin(0.5 * E),
                            std::sqrt(1.0 - e) * std::cos(0.5 * E));
}

// Q = sqrt(I2^2 sin^2 psi - I3^2) with endpoint clamping; the polar-block
// counterpart of the radial momentum.
double polar_Q(double psi, double I2, double I3) {
    if (!(I2 > 0.0) || std::abs(I3) > I2)
        throw std::domain_error("hat_chi: need I2 > 0 and |I3| <= I2");
    const double s = I2 * std::sin(psi);
    double q2 = s * s - I3 * I3;
    if (q2 < 0.0) {
        if (q2 < -1e-12 * I2 * I2)
            throw std::domain_error("hat_chi: colatitude outside the turning range");
        q2 = 0.0;
    }
    return std::sqrt(q2);
}

}  // namespace

TurningPoints turning_points(const KeplerOrbit& orbit) {
    const double a = orbit.a();
    return {a * (1.0 - orbit.e), a * (1.0 + orbit.e)};
}

double chi(const KeplerOrbit& orbit, double r) {
    ascending_E(orbit, r);  // domain validation (incl. circular case)
    if (orbit.e < kCircularEcc) return 0.0;
    const auto [rm, rp] = turning_points(orbit);
    const double L = orbit.canonical_L();
    const double span = rp - rm;
    const double up = std::clamp((rp - r) / span, 0.0, 1.0);
    const double down = std::clamp((r - rm) / span, 0.0, 1.0);
    const double root = std::sqrt(std::max(0.0, (rp - r) * (r - rm)));
    const double tanarg =
        (down == 0.0) ? std::numeric_limits<double>::infinity()
                      : std::sqrt(rm * (rp - r) / (rp * (r - rm)));
    return -2.0 * L * std::asin(std::sqrt(up)) +
           std::sqrt(orbit.gm() / orbit.a()) * root +
           2.0 * orbit.p_phi * std::atan(tanarg) + kPi * (L - orbit.p_phi);
}

double chi1(const KeplerOrbit& orbit, double r) {
    const double E = ascending_E(orbit, r);
    return E - orbit.e * std::sin(E);
}

double chi2(const KeplerOrbit& orbit, double r) {
    const double E = ascending_E(orbit, r);
    return -true_anomaly_of_E(orbit.e, E);
}

double chi2_prime(const KeplerOrbit& orbit, double r) {
    const double E = ascending_E(orbit, r);
    const double rho = 1.0 - orbit.e * std::cos(E);
    return -std::sqrt(1.0 - orbit.e * orbit.e) /
           (orbit.a() * orbit.e * rho * std::sin(E));
}

double solve_R(const KeplerOrbit& orbit, double theta1) {
    const double E = solve_kepler_real(orbit.e, theta1);
    return orbit.a() * (1.0 - orbit.e * std::cos(E));
}

double dR_dtheta1(const KeplerOrbit& orbit, double theta1) {
    const double E = solve_kepler_real(orbit.e, theta1);
    const double rho = 1.0 - orbit.e * std::cos(E);
    return orbit.a() * orbit.e * std::sin(E) / rho;
}

double nu_from_theta1(const KeplerOrbit& orbit, double theta1) {
    return radial_state(orbit, theta1).nu;
}

RadialState radial_state(const KeplerOrbit& orbit, double theta1) {
    const double E = solve_kepler_real(orbit.e, theta1);
    const double turns = std::floor((E + kPi) / kTwoPi);
    const double Er = E - turns * kTwoPi;  // (-pi, pi]
    const double e = orbit.e;
    const double a = orbit.a();
    const double sinE = std::sin(E), cosE = std::cos(E);
    const double rho = 1.0 - e * cosE;
    const double s1 = std::sqrt(1.0 - e * e);

    RadialState st;
    st.E = E;
    st.r = a * rho;
    st.dR_dtheta1 = a * e * sinE / rho;
    st.nu = true_anomaly_of_E(e, Er) + turns * kTwoPi;
    st.chi2_prime = -s1 / (a * e * rho * sinE);
    st.dchi2_dtheta1 = -s1 / (rho * rho);
    return st;
}

double psi0(double I2, double I3) {
    if (!(I2 > 0.0) || std::abs(I3) > I2)
        throw std::domain_error("psi0: need I2 > 0 and |I3| <= I2");
    return std::asin(I3 / I2);
}

double hat_chi(double psi, double I2, double I3) {
    const double base = I2 * hat_chi2(psi, I2, I3) + I3 * hat_chi3(psi, I2, I3);
    // hat_chi3 starts at -pi (not 0) when I3 < 0; shift so hat_chi(psi0) = 0.
    return (I3 < 0.0) ? base + kPi * I3 : base;
}

double hat_chi2(double psi, double I2, double I3) {
    const double Q = polar_Q(psi, I2, I3);
    return std::atan2(Q, I2 * std::cos(psi));
}

double hat_chi3(double psi, double I2, double I3) {
    const double Q = polar_Q(psi, I2, I3);
    return -std::atan2(Q, I3 * std::cos(psi));
}

double hat_chi2_dpsi(double psi, double I2, double I3) {
    const double Q = polar_Q(psi, I2, I3);
    return I2 * std::sin(psi) / Q;
}

double hat_chi3_dpsi(double psi, double I2, double I3) {
    const double Q = polar_Q(psi, I2, I3);
    return -I3 / (Q * std::sin(psi));
}

double solve_Psi(const DelaunayActions& I, double theta1, double theta2) {
    if (!(I.I2 > 0.0) || std::abs(I.I3) > I.I2)
        throw std::domain_error("solve_Psi: need I2 > 0 and |I3| <= I2");
    const KeplerOrbit orbit = I.orbit();
    const double t2 = theta2 + nu_from_theta1(orbit, theta1);  // theta2 - chi2(R)
    const double D = std::sqrt(std::max(0.0, (I.I2 - I.I3) * (I.I2 + I.I3)));
    // Q^2 + I2^2 cos^2 psi = D^2, so (Q, I2 cos Psi) = D (|sin t2|, cos t2).
    double Psi = std::acos(std::clamp(D * std::cos(t2) / I.I2, -1.0, 1.0));
    // One Newton polish against the defining equation (a no-op up to
    // rounding; guards the closed form near the turning colatitudes).
    if (D > 1e-14 * I.I2) {
        double t2r = std::fmod(t2, kTwoPi);
        if (t2r < 0.0) t2r += kTwoPi;
        const double ascending_target = (t2r <= kPi) ? t2r : kTwoPi - t2r;
        const double slope = hat_chi2_dpsi(Psi, I.I2, I.I3);
        if (std::isfinite(slope) && slope > 0.0) {
            const double resid = hat_chi2(Psi, I.I2, I.I3) - ascending_target;
            Psi -= resid / slope;
        }
    }
    return Psi;
}

double eval_h_hat1(const DelaunayActions& I, const std::array<double, 3>& theta) {
    if (!(I.I2 > 0.0) || std::abs(I.I3) > I.I2)
        throw std::domain_error("eval_h_hat1: need I2 > 0 and |I3| <= I2");
    const KeplerOrbit orbit = I.orbit();
    const RadialState rs = radial_state(orbit, theta[0]);

    const double beta = I.I3 / I.I2;
    const double t2 = theta[1] + rs.nu;  // theta2 - chi2(R(theta1))
    const double c2 = std::cos(t2), s2 = std::sin(t2);

    // Closed-form polar state at Psi(theta1, theta2):
    //   cos Psi = sqrt(1-beta^2) cos t2,  Q = sqrt(I2^2-I3^2) |sin t2|,
    //   hat_chi3(Psi) = -atan2(sin t2, beta cos t2)   (mod 2 pi),
    // and the branch-free derivative products
    //   dPsi/dtheta1 sin Psi cos Psi = -dchi2/dtheta1 (1-beta^2) sin t2 cos t2,
    //   hat_chi3'(Psi) dPsi/dtheta1  =  dchi2/dtheta1 beta / sin^2 Psi.
    const double sin2Psi = 1.0 - (1.0 - beta * beta) * c2 * c2;
    const double A = theta[2] + std::atan2(s2, beta * c2);  // theta3 - hat_chi3
    const double bracket = 3.0 * std::cos(2.0 * A) + 1.0;

    const double term1 = rs.dR_dtheta1 * rs.r * sin2Psi * bracket;
    const double term2 = -rs.r * rs.r * rs.dchi2_dtheta1 *
                         (1.0 - beta * beta) * s2 * c2 * bracket;
    const double term3 =
        3.0 * rs.r * rs.r * beta * rs.dchi2_dtheta1 * std::sin(2.0 * A);
    return term1 + term2 + term3;
}

}  // namespace melcert
