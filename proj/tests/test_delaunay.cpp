#include <doctest.h>

#include <array>
#include <cmath>
#include <stdexcept>

#include "melcert/delaunay.hpp"

using melcert::DelaunayActions;
using melcert::KeplerOrbit;

namespace {

KeplerOrbit orbit_e(double mu, double I1, double e) {
    return KeplerOrbit::from_actions(mu, I1,
                                     I1 * std::cbrt(1.0 - mu) * std::sqrt(1.0 - e * e));
}

// Radial momentum sqrt(2 gm / r - gm/a - I2^2 / r^2) on the ascending branch.
double p_r(const KeplerOrbit& o, double r) {
    const double gm = o.gm();
    return std::sqrt(2.0 * gm / r - gm / o.a() - o.p_phi * o.p_phi / (r * r));
}

}  // namespace

TEST_CASE("turning points") {
    const KeplerOrbit o = orbit_e(0.3, 1.0, 0.5);
    const auto tp = melcert::turning_points(o);
    CHECK(tp.r_minus == doctest::Approx(o.a() * 0.5).epsilon(1e-13));
    CHECK(tp.r_plus == doctest::Approx(o.a() * 1.5).epsilon(1e-13));
    CHECK(tp.r_minus + tp.r_plus == doctest::Approx(2.0 * o.a()).epsilon(1e-13));
    CHECK(tp.r_minus * tp.r_plus ==
          doctest::Approx(o.a() * o.a() * (1.0 - 0.25)).epsilon(1e-13));
}

TEST_CASE("chi endpoints, monotonicity, and radial derivative") {
    const KeplerOrbit o = orbit_e(0.3, 1.0, 0.5);
    const auto tp = melcert::turning_points(o);
    CHECK(std::abs(melcert::chi(o, tp.r_minus)) < 1e-12);
    CHECK(melcert::chi(o, tp.r_plus) ==
          doctest::Approx(melcert::kPi * (o.canonical_L() - o.p_phi)).epsilon(1e-12));
    CHECK_THROWS_AS((void)melcert::chi(o, 0.9 * tp.r_minus), std::domain_error);
    CHECK_THROWS_AS((void)melcert::chi(o, 1.1 * tp.r_plus), std::domain_error);

    // Strictly increasing on a dense grid of the bracket.
    const int n = 400;
    double prev = 0.0;
    for (int j = 1; j <= n; ++j) {
        const double r =
            tp.r_minus + (tp.r_plus - tp.r_minus) * static_cast<double>(j) / (n + 1);
        const double c = melcert::chi(o, r);
        CHECK(c > prev);
        prev = c;
    }

    // d chi / dr == p_r away from the turning points.
    for (double s : {0.2, 0.5, 0.8}) {
        const double r = tp.r_minus + (tp.r_plus - tp.r_minus) * s;
        const double dr = 1e-6;
        const double fd = (melcert::chi(o, r + dr) - melcert::chi(o, r - dr)) / (2.0 * dr);
        CHECK(fd == doctest::Approx(p_r(o, r)).epsilon(1e-7));
    }
}

TEST_CASE("chi1 is the ascending mean anomaly and the L-derivative") {
    const KeplerOrbit o = orbit_e(0.3, 1.0, 0.5);
    for (double th1 : {0.3, 1.2, 2.5}) {  // ascending branch
        const double r = melcert::solve_R(o, th1);
        CHECK(melcert::chi1(o, r) == doctest::Approx(th1).epsilon(1e-10));
    }

    // With mu = 0 the canonical radial action equals I1, so a finite
    // difference of chi against I1 at fixed r is exactly the L-derivative.
    const KeplerOrbit o0 = orbit_e(0.0, 1.0, 0.5);
    const auto tp = melcert::turning_points(o0);
    const double r = 0.5 * (tp.r_minus + tp.r_plus);
    const double dI = 1e-6;
    const KeplerOrbit op = KeplerOrbit::from_actions(0.0, 1.0 + dI, o0.p_phi);
    const KeplerOrbit om = KeplerOrbit::from_actions(0.0, 1.0 - dI, o0.p_phi);
    const double fd = (melcert::chi(op, r) - melcert::chi(om, r)) / (2.0 * dI);
    CHECK(fd == doctest::Approx(melcert::chi1(o0, r)).epsilon(1e-7));
}

TEST_CASE("chi2 is minus the ascending true anomaly; action derivative checks") {
    const KeplerOrbit o = orbit_e(0.3, 1.0, 0.5);
    const auto tp = melcert::turning_points(o);
    CHECK(std::abs(melcert::chi2(o, tp.r_minus * (1.0 + 1e-14))) < 1e-6);
    CHECK(melcert::chi2(o, tp.r_plus * (1.0 - 1e-14)) ==
          doctest::Approx(-melcert::kPi).epsilon(1e-6));
    for (double th1 : {0.4, 1.5, 2.8}) {
        const double r = melcert::solve_R(o, th1);
        CHECK(melcert::chi2(o, r) ==
              doctest::Approx(-melcert::nu_from_theta1(o, th1)).epsilon(1e-10));
    }

    // Finite difference of chi against I2 at fixed r.
    const double r = 0.5 * (tp.r_minus + tp.r_plus);
    const double dI = 1e-6;
    const KeplerOrbit op = KeplerOrbit::from_actions(0.3, 1.0, o.p_phi + dI);
    const KeplerOrbit om = KeplerOrbit::from_actions(0.3, 1.0, o.p_phi - dI);
    const double fd = (melcert::chi(op, r) - melcert::chi(om, r)) / (2.0 * dI);
    CHECK(fd == doctest::Approx(melcert::chi2(o, r)).epsilon(1e-7));

    // chi2_prime is the radial derivative of chi2.
    const double dr = 1e-6;
    const double fd2 = (melcert::chi2(o, r + dr) - melcert::chi2(o, r - dr)) / (2.0 * dr);
    CHECK(fd2 == doctest::Approx(melcert::chi2_prime(o, r)).epsilon(1e-6));
}

TEST_CASE("implicit radius R(theta1)") {
    const KeplerOrbit o = orbit_e(0.3, 1.0, 0.5);
    const auto tp = melcert::turning_points(o);
    CHECK(melcert::solve_R(o, 0.0) == doctest::Approx(tp.r_minus).epsilon(1e-13));
    CHECK(melcert::solve_R(o, melcert::kPi) == doctest::Approx(tp.r_plus).epsilon(1e-13));
    for (double th : {-2.0, 0.7, 2.9, 4.4}) {
        CHECK(melcert::solve_R(o, th + melcert::kTwoPi) ==
              doctest::Approx(melcert::solve_R(o, th)).epsilon(1e-12));
        CHECK(melcert::solve_R(o, -th) == doctest::Approx(melcert::solve_R(o, th)).epsilon(1e-12));
        const double d = 1e-6;
        const double fd =
            (melcert::solve_R(o, th + d) - melcert::solve_R(o, th - d)) / (2.0 * d);
        CHECK(fd == doctest::Approx(melcert::dR_dtheta1(o, th)).epsilon(1e-6));
    }
}

TEST_CASE("true anomaly winding") {
    const KeplerOrbit o = orbit_e(0.3, 1.0, 0.5);
    CHECK(std::abs(melcert::nu_from_theta1(o, 0.0)) < 1e-13);
    CHECK(melcert::nu_from_theta1(o, melcert::kPi) ==
          doctest::Approx(melcert::kPi).epsilon(1e-12));
    CHECK(melcert::nu_from_theta1(o, melcert::kTwoPi) ==
          doctest::Approx(melcert::kTwoPi).epsilon(1e-12));
    for (double th : {0.9, 2.2}) {
        const double nu = melcert::nu_from_theta1(o, th);
        CHECK(melcert::nu_from_theta1(o, th + 2.0 * melcert::kTwoPi) ==
              doctest::Approx(nu + 2.0 * melcert::kTwoPi).epsilon(1e-12));
        CHECK(melcert::nu_from_theta1(o, -th) == doctest::Approx(-nu).epsilon(1e-12));
    }
}

TEST_CASE("radial state bundles the pointwise functions") {
    const KeplerOrbit o = orbit_e(0.3, 1.0, 0.5);
    for (double th : {0.5, 2.0, 4.0, 5.9}) {
        const melcert::RadialState rs = melcert::radial_state(o, th);
        CHECK(rs.r == doctest::Approx(melcert::solve_R(o, th)).epsilon(1e-13));
        CHECK(rs.dR_dtheta1 == doctest::Approx(melcert::dR_dtheta1(o, th)).epsilon(1e-12));
        CHECK(rs.nu == doctest::Approx(melcert::nu_from_theta1(o, th)).epsilon(1e-12));
        const double rho = 1.0 - o.e * std::cos(rs.E);
        CHECK(rs.dchi2_dtheta1 ==
              doctest::Approx(-std::sqrt(1.0 - o.e * o.e) / (rho * rho)).epsilon(1e-12));
        // Product identity away from the turning points.
        CHECK(rs.dchi2_dtheta1 ==
              doctest::Approx(rs.chi2_prime * rs.dR_dtheta1).epsilon(1e-9));
    }
}

TEST_CASE("polar generating function hat_chi") {
    const double I2 = 0.8, I3 = 0.5;
    const double p0 = melcert::psi0(I2, I3);
    CHECK(p0 == doctest::Approx(std::asin(I3 / I2)).epsilon(1e-14));
    CHECK(std::abs(melcert::hat_chi(p0, I2, I3)) < 1e-10);
    CHECK(std::abs(melcert::hat_chi(0.5 * melcert::kPi, I2, I2)) < 1e-12);
    CHECK_THROWS_AS((void)melcert::hat_chi(0.5 * p0, I2, I3), std::domain_error);

    // d hat_chi / d psi = sqrt(I2^2 - I3^2/sin^2 psi).
    for (double psi : {p0 + 0.3, 0.5 * melcert::kPi, melcert::kPi - p0 - 0.3}) {
        const double d = 1e-6;
        const double fd =
            (melcert::hat_chi(psi + d, I2, I3) - melcert::hat_chi(psi - d, I2, I3)) /
            (2.0 * d);
        const double s = std::sin(psi);
        CHECK(fd == doctest::Approx(std::sqrt(I2 * I2 - I3 * I3 / (s * s))).epsilon(1e-7));
    }
}

TEST_CASE("hat_chi action derivatives sweep their angle ranges") {
    const double I2 = 0.8, I3 = 0.5;
    const double p0 = melcert::psi0(I2, I3);
    const double top = melcert::kPi - p0;
    CHECK(std::abs(melcert::hat_chi2(p0 + 1e-9, I2, I3)) < 1e-3);
    CHECK(melcert::hat_chi2(top - 1e-9, I2, I3) ==
          doctest::Approx(melcert::kPi).epsilon(1e-3));
    CHECK(std::abs(melcert::hat_chi3(p0 + 1e-9, I2, I3)) < 1e-3);
    CHECK(melcert::hat_chi3(top - 1e-9, I2, I3) ==
          doctest::Approx(-melcert::kPi).epsilon(1e-3));

    for (double psi : {p0 + 0.4, 0.5 * melcert::kPi, top - 0.4}) {
        const double d = 1e-6;
        const double fd2 =
            (melcert::hat_chi(psi, I2 + d, I3) - melcert::hat_chi(psi, I2 - d, I3)) /
            (2.0 * d);
        CHECK(fd2 == doctest::Approx(melcert::hat_chi2(psi, I2, I3)).epsilon(1e-6));
        const double fd3 =
            (melcert::hat_chi(psi, I2, I3 + d) - melcert::hat_chi(psi, I2, I3 - d)) /
            (2.0 * d);
        CHECK(fd3 == doctest::Approx(melcert::hat_chi3(psi, I2, I3)).epsilon(1e-6));

        const double g2 = (melcert::hat_chi2(psi + d, I2, I3) -
                           melcert::hat_chi2(psi - d, I2, I3)) /
                          (2.0 * d);
        CHECK(g2 == doctest::Approx(melcert::hat_chi2_dpsi(psi, I2, I3)).epsilon(1e-5));
        const double g3 = (melcert::hat_chi3(psi + d, I2, I3) -
                           melcert::hat_chi3(psi - d, I2, I3)) /
                          (2.0 * d);
        CHECK(g3 == doctest::Approx(melcert::hat_chi3_dpsi(psi, I2, I3)).epsilon(1e-5));
    }
}

TEST_CASE("colatitude inversion solve_Psi") {
    DelaunayActions I;
    I.mu = 0.3;
    I.I1 = 1.0;
    I.I2 = std::cbrt(0.7) * std::sqrt(0.75);
    I.I3 = 0.6 * I.I2;
    const KeplerOrbit o = I.orbit();
    const double D = std::sqrt(I.I2 * I.I2 - I.I3 * I.I3);

    for (double th1 : {0.3, 1.7, 3.9, 5.5}) {
        for (double th2 : {0.0, 0.9, 2.5, 4.8}) {
            const double Psi = melcert::solve_Psi(I, th1, th2);
            CHECK(Psi > 0.0);
            CHECK(Psi < melcert::kPi);
            const double t2 = th2 + melcert::nu_from_theta1(o, th1);
            // Closed-form characterization of the solution branch.
            CHECK(std::cos(Psi) ==
                  doctest::Approx(D / I.I2 * std::cos(t2)).epsilon(1e-11));
            // Defining equation whenever the ascending polar branch applies.
            const double m = std::fmod(std::fmod(t2, melcert::kTwoPi) + melcert::kTwoPi,
                                       melcert::kTwoPi);
            if (m > 0.05 && m < melcert::kPi - 0.05) {
                CHECK(melcert::hat_chi2(Psi, I.I2, I.I3) ==
                      doctest::Approx(m).epsilon(1e-10));
            }
        }
    }

    // Equatorial family: Psi == pi/2 identically.
    DelaunayActions eq = I;
    eq.I3 = eq.I2;
    CHECK(melcert::solve_Psi(eq, 1.234, 2.345) ==
          doctest::Approx(0.5 * melcert::kPi).epsilon(1e-13));
}

TEST_CASE("spatial perturbation average reduces to the planar bracket on the equator") {
    DelaunayActions I;
    I.mu = 0.3;
    I.I1 = 1.0;
    I.I2 = std::cbrt(0.7) * std::sqrt(0.75);
    I.I3 = I.I2;
    const KeplerOrbit o = I.orbit();

    for (double th1 : {0.2, 1.1, 2.7, 4.9}) {
        for (double th2 : {0.0, 0.8, 2.9}) {
            for (double th3 : {0.0, 0.6, 1.9}) {
                const double v = melcert::eval_h_hat1(I, {th1, th2, th3});
                const melcert::RadialState rs = melcert::radial_state(o, th1);
                const double A = (th2 + th3) + rs.nu;
                const double planar =
                    rs.dR_dtheta1 * rs.r * (3.0 * std::cos(2.0 * A) + 1.0) +
                    3.0 * rs.r * rs.r * rs.dchi2_dtheta1 * std::sin(2.0 * A);
                CHECK(v == doctest::Approx(planar).epsilon(1e-11));
            }
        }
    }

    // Off the equator the average stays finite and is pi-periodic in theta3.
    DelaunayActions J = I;
    J.I3 = 0.57 * J.I2;
    for (double th3 : {0.0, 0.9, 2.2}) {
        const double v = melcert::eval_h_hat1(J, {1.3, 0.7, th3});
        CHECK(std::isfinite(v));
        CHECK(melcert::eval_h_hat1(J, {1.3, 0.7, th3 + melcert::kPi}) ==
              doctest::Approx(v).epsilon(1e-11));
    }
}
