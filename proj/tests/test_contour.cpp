#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <json.hpp>

#include "melcert/contour.hpp"

using melcert::ArcSeg;
using melcert::Complex;
using melcert::ContourPath;
using melcert::LineSeg;
using melcert::Segment;

namespace {

const Complex kI{0.0, 1.0};

melcert::QuadratureResult quad(const Segment& seg,
                               const std::function<Complex(Complex)>& f,
                               double tol = 1e-12) {
    return melcert::integrate_segment(
        seg, [&](double, Complex z) { return f(z); }, tol);
}

const melcert::KeplerOrbit kOrbit = melcert::KeplerOrbit::from_actions(
    0.3, 1.0, std::cbrt(0.7) * std::sqrt(0.75));  // e = 0.5

}  // namespace

TEST_CASE("segment parameterizations") {
    const LineSeg l{Complex{0.0, 0.0}, Complex{1.0, 2.0}};
    CHECK(std::abs(melcert::seg_start(l) - Complex{0.0, 0.0}) < 1e-15);
    CHECK(std::abs(melcert::seg_end(l) - Complex{1.0, 2.0}) < 1e-15);
    CHECK(std::abs(melcert::seg_point(l, 0.5) - Complex{0.5, 1.0}) < 1e-15);
    CHECK(std::abs(melcert::seg_deriv(l, 0.3) - Complex{1.0, 2.0}) < 1e-15);
    CHECK(melcert::seg_length(l) == doctest::Approx(std::sqrt(5.0)));

    const ArcSeg a{Complex{1.0, 0.0}, 2.0, 0.0, 0.5 * melcert::kPi};
    CHECK(std::abs(melcert::seg_start(a) - Complex{3.0, 0.0}) < 1e-14);
    CHECK(std::abs(melcert::seg_end(a) - Complex{1.0, 2.0}) < 1e-14);
    CHECK(melcert::seg_length(a) == doctest::Approx(melcert::kPi));
    // dz/dsigma = i r (a1-a0) e^{i a(sigma)}
    const Complex d = melcert::seg_deriv(a, 0.0);
    CHECK(std::abs(d - kI * 2.0 * (0.5 * melcert::kPi)) < 1e-14);
}

TEST_CASE("quadrature is exact on polynomials and entire functions") {
    const LineSeg unit{Complex{0.0, 0.0}, Complex{1.0, 0.0}};
    auto r = quad(unit, [](Complex z) { return std::pow(z, 7); });
    CHECK(std::abs(r.value - 0.125) < 1e-14);
    CHECK(r.converged);

    r = quad(unit, [](Complex z) { return std::pow(z, 15); });
    CHECK(std::abs(r.value - 1.0 / 16.0) < 1e-14);

    const LineSeg diag{Complex{0.0, 0.0}, Complex{1.0, 1.0}};
    r = quad(diag, [](Complex z) { return std::cos(z); });
    CHECK(std::abs(r.value - std::sin(Complex{1.0, 1.0})) < 1e-13);
    CHECK(r.nodes_used <= 96);

    const ArcSeg quarter{Complex{0.0, 0.0}, 1.5, 0.25, 1.25};
    const Complex z0 = melcert::seg_start(quarter), z1 = melcert::seg_end(quarter);
    r = quad(quarter, [](Complex z) { return z * z; });
    CHECK(std::abs(r.value - (z1 * z1 * z1 - z0 * z0 * z0) / 3.0) < 1e-13);
}

TEST_CASE("additivity and reversal") {
    auto f = [](Complex z) { return std::exp(z); };
    const Complex whole = quad(LineSeg{{0.0, 0.0}, {2.0, 0.0}}, f).value;
    const Complex a = quad(LineSeg{{0.0, 0.0}, {0.7, 0.0}}, f).value;
    const Complex b = quad(LineSeg{{0.7, 0.0}, {2.0, 0.0}}, f).value;
    CHECK(std::abs(whole - (a + b)) < 1e-13);

    const Complex fwd = quad(LineSeg{{0.0, 0.0}, {1.0, 0.5}}, f).value;
    const Complex rev = quad(LineSeg{{1.0, 0.5}, {0.0, 0.0}}, f).value;
    CHECK(std::abs(fwd + rev) < 1e-13);
}

TEST_CASE("closed loops: exact differentials vanish, residues count") {
    ContourPath square;
    square.Tstar = 100.0;
    square.segments = {Segment{LineSeg{{0, 0}, {1, 0}}}, Segment{LineSeg{{1, 0}, {1, 1}}},
                       Segment{LineSeg{{1, 1}, {0, 1}}}, Segment{LineSeg{{0, 1}, {0, 0}}}};
    CHECK(square.closed());
    auto one = melcert::integrate(
        square, [](std::size_t, double, Complex) { return Complex{1.0, 0.0}; }, 1e-12);
    CHECK(std::abs(one.value) < 1e-14);

    ContourPath circle;
    circle.Tstar = 100.0;
    circle.segments = {Segment{ArcSeg{{0.0, 0.0}, 1.0, -0.5 * melcert::kPi,
                                      1.5 * melcert::kPi}}};
    CHECK(circle.closed());
    auto res = melcert::integrate(
        circle, [](std::size_t, double, Complex z) { return 1.0 / z; }, 1e-12);
    CHECK(std::abs(res.value - 2.0 * melcert::kPi * kI) < 1e-12);

    const ContourPath twice = melcert::build_double_circle({0.3, 0.2}, 0.4, 100.0);
    REQUIRE(twice.segments.size() == 2);
    CHECK(twice.closed());
    auto res2 = melcert::integrate(
        twice, [](std::size_t, double, Complex z) { return 1.0 / (z - Complex{0.3, 0.2}); },
        1e-12);
    CHECK(std::abs(res2.value - 4.0 * melcert::kPi * kI) < 1e-11);
}

TEST_CASE("integrate passes the leg index through") {
    ContourPath path;
    path.Tstar = 100.0;
    path.segments = {Segment{LineSeg{{0, 0}, {1, 0}}}, Segment{LineSeg{{1, 0}, {3, 0}}}};
    auto r = melcert::integrate(
        path,
        [](std::size_t leg, double, Complex) {
            return Complex{leg == 0 ? 1.0 : 10.0, 0.0};
        },
        1e-12);
    CHECK(std::abs(r.value - 21.0) < 1e-12);
}

TEST_CASE("cumulative segment values and iterated integrals") {
    // f == 1: integral z1-z0, iterated (z1-z0)^2/2.
    const Complex z1{2.0, 1.0};
    auto c = melcert::cumulative_segment(
        LineSeg{{0.0, 0.0}, z1}, [](double, Complex) { return Complex{1.0, 0.0}; }, 32);
    CHECK(std::abs(c.integral - z1) < 1e-13);
    CHECK(std::abs(c.iterated - 0.5 * z1 * z1) < 1e-12);

    // f == z on [0,1]: integral 1/2, iterated integral of z^2/2 = 1/6.
    c = melcert::cumulative_segment(LineSeg{{0.0, 0.0}, {1.0, 0.0}},
                                    [](double, Complex z) { return z; }, 32);
    CHECK(std::abs(c.integral - 0.5) < 1e-13);
    CHECK(std::abs(c.iterated - 1.0 / 6.0) < 1e-12);

    // f == exp(z): iterated = exp(z1) - 1 - z1 from the running integral.
    const Complex w{1.0, 0.5};
    c = melcert::cumulative_segment(LineSeg{{0.0, 0.0}, w},
                                    [](double, Complex z) { return std::exp(z); }, 128);
    CHECK(std::abs(c.integral - (std::exp(w) - 1.0)) < 1e-10);
    CHECK(std::abs(c.iterated - (std::exp(w) - 1.0 - w)) < 1e-9);

    // Doubling n shrinks the defect (O(n^-4) for analytic integrands).
    auto c2 = melcert::cumulative_segment(LineSeg{{0.0, 0.0}, w},
                                          [](double, Complex z) { return std::exp(z); },
                                          256);
    CHECK(std::abs(c2.iterated - (std::exp(w) - 1.0 - w)) <
          std::abs(c.iterated - (std::exp(w) - 1.0 - w)) + 1e-15);
}

TEST_CASE("standard loop geometry") {
    const double Tstar = 3.0, h = 0.5, delta = 0.05, bigM = 2.0;
    for (auto side : {melcert::ArcSide::Left, melcert::ArcSide::Right}) {
        const ContourPath g = melcert::build_gamma(Tstar, h, delta, bigM, side);
        CHECK(g.closed());
        CHECK(g.segments.size() == 8);
        REQUIRE(g.gamma.has_value());
        CHECK(g.gamma->Tstar == Tstar);
        CHECK(g.gamma->height == h);
        CHECK(g.gamma->delta == delta);
        CHECK(g.gamma->bigM == bigM);
        // Start point at Tstar/3 on the real axis.
        CHECK(std::abs(melcert::seg_start(g.segments.front()) - Complex{1.0, 0.0}) <
              1e-14);
        // The loop dodges the singular times at distance delta.
        const std::vector<Complex> sing = {{1.0, h}, {2.0, h}};
        const double cl = g.clearance(sing);
        CHECK(cl > 0.8 * delta);
        CHECK(cl < 1.2 * delta);
    }
    CHECK_THROWS_AS(melcert::build_gamma(3.0, 0.5, 0.6, 2.0, melcert::ArcSide::Left),
                    std::invalid_argument);
    CHECK_THROWS_AS(melcert::build_gamma(3.0, 0.5, 0.05, 0.4, melcert::ArcSide::Left),
                    std::invalid_argument);
}

TEST_CASE("spine continuation along the real axis") {
    const double T = kOrbit.period();
    std::vector<Segment> legs = {Segment{LineSeg{{0.0, 0.0}, {T, 0.0}}}};
    const melcert::Spine sp = melcert::build_spine(kOrbit, legs, Complex{0.0, 0.0});
    CHECK(std::abs(sp.E_start) < 1e-12);
    CHECK(std::abs(sp.E_end - Complex{melcert::kTwoPi, 0.0}) < 1e-10);
    // Interior evaluation agrees with the direct real solve.
    for (double sigma : {0.2, 0.5, 0.9}) {
        const melcert::EccState s = sp.eval(0, sigma);
        const double Eref =
            melcert::solve_kepler_real(kOrbit.e, kOrbit.omega1() * sigma * T);
        CHECK(std::abs(s.E - Complex{Eref, 0.0}) < 1e-11);
    }
}

TEST_CASE("phase continuation: contractible loops close, the standard loop does not") {
    const double T = kOrbit.period();
    const double h = melcert::k1_of_e(kOrbit.e) / kOrbit.omega1();

    ContourPath rect;
    rect.Tstar = 3.0 * T;
    const Complex a{T, 0.0}, b{2.0 * T, 0.0};
    const Complex lift{0.0, 0.4 * h};
    rect.segments = {Segment{LineSeg{a, b}}, Segment{LineSeg{b, b + lift}},
                     Segment{LineSeg{b + lift, a + lift}}, Segment{LineSeg{a + lift, a}}};
    REQUIRE(rect.closed());
    const auto nodes = melcert::continue_phi(kOrbit, rect);
    REQUIRE(nodes.size() > 2);
    CHECK(std::abs(nodes.back().phi - nodes.front().phi) < 1e-9);

    const ContourPath g = melcert::build_gamma(3.0 * T, h, 0.05 * h, 3.0 * h,
                                               melcert::ArcSide::Left);
    const auto loop = melcert::continue_phi(kOrbit, g);
    CHECK(std::abs(loop.back().phi - loop.front().phi) > 0.1);
}

TEST_CASE("path serialization is valid JSON") {
    const ContourPath g = melcert::build_gamma(3.0, 0.5, 0.05, 2.0, melcert::ArcSide::Left);
    const nlohmann::json j = nlohmann::json::parse(g.to_json());
    CHECK(j.at("Tstar").get<double>() == doctest::Approx(3.0));
    REQUIRE(j.at("segments").is_array());
    CHECK(j.at("segments").size() == 8);
    CHECK(j.at("segments")[0].at("type").get<std::string>() == "line");
}
