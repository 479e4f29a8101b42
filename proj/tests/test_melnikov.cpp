#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "melcert/melnikov.hpp"
#include "melcert/system.hpp"

using melcert::Complex;
using melcert::ContourParams;
using melcert::KeplerOrbit;
using melcert::MelnikovResult;

namespace {

const double kTheta = melcert::kPi / 5.0;
const KeplerOrbit kOrbit = KeplerOrbit::from_actions(
    0.3, 1.0, std::cbrt(0.7) * std::sqrt(0.75));  // e = 0.5, omega1 = 0.7

// Converged reference value at (e, mu, I1, theta2) = (0.5, 0.3, 1, pi/5).
const Complex kRef{-110.5578205153, -44.4139137814};

}  // namespace

TEST_CASE("planar value at the reference point") {
    const MelnikovResult r = melcert::melnikov_planar(0.5, 0.3, 1.0, kTheta);
    REQUIRE(r.value.size() == 2);
    CHECK(std::abs(r.value[0] - kRef) < 1e-5);
    CHECK(r.value[1] == Complex{0.0, 0.0});
    CHECK(r.error_estimate > 0.0);
    CHECK(r.error_estimate < 1e-4);
    CHECK(r.nonzero_verdict);
    CHECK(r.margin > 1e4);
    CHECK(r.abs_value() == doctest::Approx(std::abs(kRef)).epsilon(1e-7));
    CHECK(r.contour.closed());

    const MelnikovResult r3 =
        melcert::melnikov_planar(0.5, 0.3, 1.0, melcert::kPi / 3.0);
    CHECK(std::abs(r3.value[0] - Complex{-100.6731772, 51.30890766}) < 1e-5);
}

TEST_CASE("planar value is pi-periodic in theta2 and dodge-radius independent") {
    const MelnikovResult base = melcert::melnikov_planar(0.5, 0.3, 1.0, kTheta);
    const MelnikovResult shifted =
        melcert::melnikov_planar(0.5, 0.3, 1.0, kTheta + melcert::kPi);
    CHECK(std::abs(shifted.value[0] - base.value[0]) < 1e-6 * std::abs(base.value[0]));

    ContourParams cp;
    cp.delta_rel = 0.02;
    const MelnikovResult narrow = melcert::melnikov_planar(0.5, 0.3, 1.0, kTheta, cp);
    CHECK(std::abs(narrow.value[0] - base.value[0]) < 1e-6 * std::abs(base.value[0]));

    // The cutoff height is a convention, not a free parameter: the top
    // segment contributes a term that grows with it (see the leading-term
    // tests below), so a taller loop gives a materially different value.
    cp = ContourParams{};
    cp.bigM_rel = 14.0;
    const MelnikovResult tall = melcert::melnikov_planar(0.5, 0.3, 1.0, kTheta, cp);
    CHECK(std::abs(tall.value[0] - base.value[0]) > 1.0);
}

TEST_CASE("planar magnitudes across the reference theta2 grid") {
    const MelnikovResult v0 = melcert::melnikov_planar(0.5, 0.3, 1.0, 0.0);
    // Purely imaginary at theta2 = 0.
    CHECK(std::abs(v0.value[0].real()) < 1e-5 * std::abs(v0.value[0].imag()));
    CHECK(v0.abs_value() == doctest::Approx(126.170964).epsilon(2e-4));

    const MelnikovResult v1 = melcert::melnikov_planar(0.5, 0.3, 1.0, melcert::kPi / 4.0);
    CHECK(v1.abs_value() == doctest::Approx(116.512232).epsilon(2e-4));

    const MelnikovResult v2 = melcert::melnikov_planar(0.5, 0.3, 1.0, melcert::kPi / 2.0);
    CHECK(v2.abs_value() == doctest::Approx(110.468865).epsilon(2e-4));
}

TEST_CASE("structured and simplified integrands agree") {
    const MelnikovResult simp = melcert::melnikov_planar(0.5, 0.3, 1.0, kTheta);
    const MelnikovResult raw = melcert::melnikov_planar_raw(0.5, 0.3, 1.0, kTheta);
    CHECK(std::abs(simp.value[0] - raw.value[0]) < 1e-6);
}

TEST_CASE("spatial equatorial family matches the planar values") {
    const MelnikovResult planar = melcert::melnikov_planar(0.5, 0.3, 1.0, kTheta);
    const MelnikovResult spatial = melcert::melnikov_spatial(0.5, 0.3, 1.0, kTheta);
    REQUIRE(spatial.value.size() == 3);
    CHECK(std::abs(spatial.value[0] - planar.value[0]) < 1e-6);

    // The printed + sign variant is materially different; the minus variant
    // (consistent with the structured form) is the default.
    const MelnikovResult plus = melcert::melnikov_spatial(
        0.5, 0.3, 1.0, kTheta, ContourParams{}, melcert::SignVariant::PlusAsPrinted);
    CHECK(std::abs(plus.value[0] - spatial.value[0]) > 1.0);
}

TEST_CASE("slit decomposition: columns cancel, the real leg vanishes") {
    const melcert::SlitPieces p = melcert::slit_pieces_planar(0.5, 0.3, 1.0, kTheta);
    CHECK(std::abs(p.right_column - p.left_column) < 1e-6);
    CHECK(std::abs(p.real_leg) < 1e-6);
    CHECK(std::abs(p.value() - p.top_leg) < 2e-6);

    const MelnikovResult whole = melcert::melnikov_planar(0.5, 0.3, 1.0, kTheta);
    CHECK(std::abs(p.value() - whole.value[0]) < 1e-5);
    CHECK(p.error > 0.0);
}

TEST_CASE("top-segment leading coefficient") {
    // theta2 = 0: purely imaginary closed form.
    const Complex L0 = melcert::top_segment_leading(kOrbit, 0.0, 1.0);
    CHECK(std::abs(L0 - Complex{0.0, 106.4095659}) < 1e-4);
    // Linear in the height.
    const Complex L0x2 = melcert::top_segment_leading(kOrbit, 0.0, 2.0);
    CHECK(std::abs(L0x2 - 2.0 * L0) < 1e-12);
    // Reference angle.
    const Complex L = melcert::top_segment_leading(kOrbit, kTheta, 1.0);
    CHECK(std::abs(L - Complex{95.61062927, 36.22450867}) < 1e-5);
}

TEST_CASE("top-segment integral follows the leading term") {
    const double h = melcert::k1_of_e(kOrbit.e) / kOrbit.omega1();
    const auto r10 = melcert::top_segment_integral(kOrbit, kTheta, 10.0 * h);
    CHECK(r10.converged);
    CHECK(std::abs(r10.value - Complex{143.772429, 63.736460}) < 1e-4);

    // The remainder against M * L grows sublinearly while the leading term
    // grows linearly, so it loses relative weight as M increases.
    const auto rem = [&](double M) {
        const auto r = melcert::top_segment_integral(kOrbit, kTheta, M);
        return std::abs(r.value - melcert::top_segment_leading(kOrbit, kTheta, M));
    };
    const double rem5 = rem(5.0 * h), rem40 = rem(40.0 * h);
    CHECK(rem40 < 3.0 * rem5);
    CHECK(rem40 < 0.5 * std::abs(melcert::top_segment_leading(kOrbit, kTheta, 40.0 * h)));

    CHECK_THROWS_AS((void)melcert::top_segment_integral(kOrbit, kTheta, 0.5 * h),
                    std::invalid_argument);
}

TEST_CASE("small circle around the singular time") {
    const double h = melcert::k1_of_e(kOrbit.e) / kOrbit.omega1();
    const auto r = melcert::small_circle_integral(kOrbit, kTheta, 1e-3 * h);
    CHECK(r.converged);
    CHECK(std::abs(r.value) < 1e-6);
    CHECK_THROWS_AS((void)melcert::small_circle_integral(kOrbit, kTheta, 2.0 * h),
                    std::invalid_argument);
}

TEST_CASE("generic evaluator reproduces the planar value through the registration") {
    const melcert::GenericSystem sys = melcert::make_crtbp_planar(0.3);
    const melcert::VectorXd I = melcert::crtbp_planar_actions(0.3, 1.0, 0.5);
    CHECK(I[0] == doctest::Approx(1.0));
    CHECK(I[1] == doctest::Approx(std::cbrt(0.7) * std::sqrt(0.75)).epsilon(1e-14));

    melcert::ResonanceData res;
    res.I_star = I;
    res.omega_star = kOrbit.omega1() / 3.0;
    res.k_vec = melcert::VectorXi(2);
    res.k_vec << 3, 0;
    res.T_star = 3.0 * kOrbit.period();
    res.d_omega = sys.d_omega(I);

    const melcert::ContourPath gamma = melcert::standard_gamma(kOrbit);
    const MelnikovResult gen =
        melcert::melnikov_generic(sys, res, {0.0, kTheta}, gamma);
    const MelnikovResult raw = melcert::melnikov_planar_raw(0.5, 0.3, 1.0, kTheta);
    CHECK(std::abs(gen.value[0] - raw.value[0]) < 1e-6);

    CHECK_THROWS_AS(
        (void)melcert::melnikov_generic(sys, res, {0.0, kTheta, 0.0}, gamma),
        std::invalid_argument);
    CHECK_THROWS_AS((void)melcert::melnikov_generic(sys, res, {0.5, kTheta}, gamma),
                    std::invalid_argument);
}

TEST_CASE("generic fallback quadrature: entire perturbations integrate to zero") {
    melcert::GenericSystem sys;
    sys.name = "entire-toy";
    sys.ell = 2;
    sys.m = 2;
    sys.k = 3;
    sys.omega = [](const melcert::VectorXd&) {
        melcert::VectorXd w(2);
        w << 1.0, std::sqrt(2.0);
        return w;
    };
    sys.d_omega = [](const melcert::VectorXd&) {
        return melcert::MatrixXd::Identity(2, 2).eval();
    };
    sys.h_k = [](const melcert::VectorXd&, const melcert::VectorXcd& th) {
        melcert::VectorXcd h(2);
        h << std::exp(Complex{0.0, 1.0} * th[0]),
            std::exp(Complex{0.0, 1.0} * (th[0] + th[1]));
        return h;
    };
    sys.g_k = [](const melcert::VectorXd&, const melcert::VectorXcd&) {
        return melcert::VectorXcd::Zero(2).eval();
    };

    melcert::ResonanceData res;
    res.I_star = melcert::VectorXd::Ones(2);
    res.omega_star = 1.0;
    res.k_vec = melcert::VectorXi::Ones(2);
    res.T_star = melcert::kTwoPi;
    res.d_omega = melcert::MatrixXd::Identity(2, 2);

    melcert::ContourPath square;
    square.Tstar = 100.0;
    square.segments = {
        melcert::Segment{melcert::LineSeg{{0, 0}, {1, 0}}},
        melcert::Segment{melcert::LineSeg{{1, 0}, {1, 1}}},
        melcert::Segment{melcert::LineSeg{{1, 1}, {0, 1}}},
        melcert::Segment{melcert::LineSeg{{0, 1}, {0, 0}}}};
    const MelnikovResult r = melcert::melnikov_generic(sys, res, {0.1, 0.7}, square);
    CHECK(std::abs(r.value[0]) < 1e-8);
    CHECK(std::abs(r.value[1]) < 1e-8);
    CHECK_FALSE(r.nonzero_verdict);
}

TEST_CASE("standard loop construction validates its geometry") {
    ContourParams bad;
    bad.delta_rel = 2.0;
    CHECK_THROWS_AS((void)melcert::standard_gamma(kOrbit, bad), std::invalid_argument);
    bad = ContourParams{};
    bad.bigM_rel = 0.5;
    CHECK_THROWS_AS((void)melcert::standard_gamma(kOrbit, bad), std::invalid_argument);

    const melcert::ContourPath g = melcert::standard_gamma(kOrbit);
    REQUIRE(g.gamma.has_value());
    CHECK(g.gamma->Tstar == doctest::Approx(3.0 * kOrbit.period()).epsilon(1e-14));
    CHECK(g.closed());
}
