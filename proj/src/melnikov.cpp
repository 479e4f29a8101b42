#include "melcert/melnikov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "melcert/delaunay.hpp"

namespace melcert {

namespace {

const Complex kImag{0.0, 1.0};

// Pointwise integrand over the continued Kepler state at complex time t.
using StateFn = std::function<Complex(const EccState&, Complex)>;

// sin/cos of 2(nu + psi) from the continuation state: u = w^2 e^{2 i psi}
// with w = e^{i nu}.  The reciprocal must be an honest complex division
// (conjugation tricks are only valid on the real axis).
struct Phase2 {
    Complex sin2, cos2;
};
Phase2 phase2(double e, const EccState& s, const Complex& rot) {
    const Complex w = unit_phase(e, s);
    const Complex u = w * w * rot;
    const Complex iu = 1.0 / u;
    return {(u - iu) / (2.0 * kImag), 0.5 * (u + iu)};
}

// Simplified planar bracket:
//   sin 2(phi+th) - e sin phi (cos 2(phi+th) + 1/3)/(1+e cos phi),
// using e sin phi/(1+e cos phi) = e sin E / sqrt(1-e^2).
StateFn simplified_bracket(double e, Complex two_theta_rot) {
    const double s1 = std::sqrt(1.0 - e * e);
    return [e, s1, two_theta_rot](const EccState& s, Complex) {
        const Phase2 p = phase2(e, s, two_theta_rot);
        return p.sin2 - (e / s1) * s.sinE * (p.cos2 + 1.0 / 3.0);
    };
}

// As printed in one source for the spatial problem: + in front of the
// e sin phi term (inconsistent with the structured form; kept for the
// arbitration test).
StateFn simplified_bracket_plus(double e, Complex two_theta_rot) {
    const double s1 = std::sqrt(1.0 - e * e);
    return [e, s1, two_theta_rot](const EccState& s, Complex) {
        const Phase2 p = phase2(e, s, two_theta_rot);
        return p.sin2 + (e / s1) * s.sinE * (p.cos2 + 1.0 / 3.0);
    };
}

// Structured first-component integrand (shared by the planar raw form and
// the spatial equatorial reduction):
//   dR/dtheta1 * R (3 cos 2(th - chi2) + 1) + 3 R^2 (dchi2/dtheta1) sin 2(th - chi2)
// with R = a rho, dR/dtheta1 = a e sin E/rho, dchi2/dtheta1 = -sqrt(1-e^2)/rho^2.
StateFn structured_bracket(const KeplerOrbit& orbit, Complex two_theta_rot) {
    const double e = orbit.e;
    const double a = orbit.a();
    const double s1 = std::sqrt(1.0 - e * e);
    return [e, a, s1, two_theta_rot](const EccState& s, Complex) {
        const Phase2 p = phase2(e, s, two_theta_rot);
        const Complex R = a * s.rho;
        const Complex dR = a * e * s.sinE / s.rho;
        const Complex dchi2 = -s1 / (s.rho * s.rho);
        return dR * R * (3.0 * p.cos2 + 1.0) + 3.0 * R * R * dchi2 * p.sin2;
    };
}

// Second-component integrand (common to planar/spatial equatorial up to the
// mu factor applied by the caller): -(3/2) R^2 sin 2(th - chi2).
StateFn second_component_bracket(const KeplerOrbit& orbit, Complex two_theta_rot) {
    const double e = orbit.e;
    const double a = orbit.a();
    return [e, a, two_theta_rot](const EccState& s, Complex) {
        const Phase2 p = phase2(e, s, two_theta_rot);
        const Complex R = a * s.rho;
        return -1.5 * R * R * p.sin2;
    };
}

// Top-segment integrand of the e sin phi term (without the e factor, the
// form whose large-M leading coefficient is frequency-free):
//   sin phi (cos 2(phi+th)+1/3)/(1+e cos phi) = sinE/sqrt(1-e^2) (cos2+1/3).
StateFn top_integrand(double e, Complex two_theta_rot) {
    const double s1 = std::sqrt(1.0 - e * e);
    return [e, s1, two_theta_rot](const EccState& s, Complex) {
        const Phase2 p = phase2(e, s, two_theta_rot);
        return s.sinE / s1 * (p.cos2 + 1.0 / 3.0);
    };
}

// ---------------------------------------------------------------------------
// Slit assembly: four independently anchored spines.
// ---------------------------------------------------------------------------

struct SlitSpines {
    KeplerOrbit orbit;
    GammaSpec spec;
    Spine real, right, left, top;
};

std::vector<Segment> column_legs(double tx, double h, double delta, double bigM,
                                 ArcSide side) {
    const double upA0 = -0.5 * kPi;
    const double upA1 = (side == ArcSide::Left) ? -1.5 * kPi : 0.5 * kPi;
    std::vector<Segment> legs;
    legs.emplace_back(LineSeg{{tx, 0.0}, {tx, h - delta}});
    legs.emplace_back(ArcSeg{{tx, h}, delta, upA0, upA1});
    legs.emplace_back(LineSeg{{tx, h + delta}, {tx, bigM}});
    return legs;
}

SlitSpines build_slit_spines(const KeplerOrbit& orbit, const ContourParams& cp) {
    const double h = k1_of_e(orbit.e) / orbit.omega1();
    const double delta = cp.delta_rel * h;
    const double bigM = cp.bigM_rel * h;
    if (!(delta > 0.0 && delta < h && h < bigM))
        throw std::invalid_argument("melnikov: need 0 < delta < k1/omega1 < M");
    const double Tstar = 3.0 * orbit.period();
    const double tL = Tstar / 3.0, tR = 2.0 * Tstar / 3.0;

    SlitSpines s;
    s.orbit = orbit;
    s.spec = GammaSpec{Tstar, h, delta, bigM, cp.side};

    const std::vector<Segment> realLeg{LineSeg{{tL, 0.0}, {tR, 0.0}}};
    s.real = build_spine(orbit, realLeg, Complex{kTwoPi, 0.0});
    s.right = build_spine(orbit, column_legs(tR, h, delta, bigM, cp.side),
                          Complex{2.0 * kTwoPi, 0.0});
    s.left = build_spine(orbit, column_legs(tL, h, delta, bigM, cp.side),
                         Complex{kTwoPi, 0.0});
    const std::vector<Segment> topLeg{LineSeg{{tR, bigM}, {tL, bigM}}};
    s.top = build_spine(orbit, topLeg, s.right.E_end);
    return s;
}

QuadratureResult integrate_spine(const Spine& sp, const StateFn& f, double tol) {
    QuadratureResult total;
    double len = 0.0;
    for (const auto& leg : sp.legs) len += seg_length(leg);
    for (std::size_t li = 0; li < sp.legs.size(); ++li) {
        const double tol_i = std::max(tol * seg_length(sp.legs[li]) / len, 1e-16);
        auto fi = [&](double sigma, Complex z) { return f(sp.eval(li, sigma), z); };
        const QuadratureResult r = integrate_segment(sp.legs[li], fi, tol_i);
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        total.nodes_used += r.nodes_used;
        total.converged = total.converged && r.converged;
    }
    return total;
}

SlitPieces integrate_pieces(const SlitSpines& s, const StateFn& f, double tol) {
    SlitPieces out;
    const QuadratureResult a = integrate_spine(s.real, f, tol);
    const QuadratureResult r = integrate_spine(s.right, f, tol);
    const QuadratureResult l = integrate_spine(s.left, f, tol);
    const QuadratureResult t = integrate_spine(s.top, f, tol);
    out.real_leg = a.value;
    out.right_column = r.value;
    out.left_column = l.value;
    out.top_leg = t.value;
    out.error = a.error_estimate + r.error_estimate + l.error_estimate +
                t.error_estimate;
    return out;
}

// Richardson-controlled iterated integral over one spine (piece): the piece
// integral and the integral of the running antiderivative from the piece
// start.
struct IterVals {
    Complex integral{0.0, 0.0};
    Complex iterated{0.0, 0.0};
    double error = 0.0;
};

IterVals iterated_piece_once(const Spine& sp, const StateFn& f, int n) {
    IterVals out;
    for (std::size_t li = 0; li < sp.legs.size(); ++li) {
        auto fi = [&](double sigma, Complex z) { return f(sp.eval(li, sigma), z); };
        const CumulativeResult c = cumulative_segment(sp.legs[li], fi, n);
        const Complex dtau = seg_end(sp.legs[li]) - seg_start(sp.legs[li]);
        out.iterated += out.integral * dtau + c.iterated;
        out.integral += c.integral;
    }
    return out;
}

IterVals iterated_piece(const Spine& sp, const StateFn& f, double tol) {
    int n = 128;
    IterVals prev = iterated_piece_once(sp, f, n);
    for (;;) {
        n *= 2;
        IterVals cur = iterated_piece_once(sp, f, n);
        cur.error = (std::abs(cur.integral - prev.integral) +
                     std::abs(cur.iterated - prev.iterated)) /
                    15.0;
        if (cur.error < tol || n >= 4096) return cur;
        prev = cur;
    }
}

// Loop integral of the running integral Xi over the slit loop (basepoint
// T*/3; columns share their real-axis anchors so the running branch is the
// left-anchored one on the descending column).
IterVals loop_iterated(const SlitSpines& s, const StateFn& f, double tol) {
    const IterVals c1 = iterated_piece(s.real, f, tol);
    const IterVals cR = iterated_piece(s.right, f, tol);
    const IterVals cT = iterated_piece(s.top, f, tol);
    const IterVals cL = iterated_piece(s.left, f, tol);
    const double T3 = s.spec.Tstar / 3.0;
    const Complex iM{0.0, s.spec.bigM};

    IterVals out;
    out.integral = c1.integral + cR.integral - cL.integral + cT.integral;
    out.iterated = c1.iterated + cR.iterated + cT.iterated - cL.iterated -
                   T3 * (c1.integral + cR.integral) +
                   iM * (cL.integral - cR.integral - cT.integral);
    out.error = c1.error + cR.error + cT.error + cL.error;
    return out;
}

MelnikovResult finish_result(std::vector<Complex> value, std::vector<double> theta,
                             ContourPath contour, double err) {
    MelnikovResult r;
    r.value = std::move(value);
    r.theta = std::move(theta);
    r.contour = std::move(contour);
    r.error_estimate = err;
    r.margin = (err > 0.0) ? r.abs_value() / err
                           : (r.abs_value() > 0.0
                                  ? std::numeric_limits<double>::infinity()
                                  : 0.0);
    r.nonzero_verdict = r.abs_value() > 10.0 * err;
    return r;
}

double domega11(double mu, double I1star) {
    return -3.0 * (1.0 - mu) / std::pow(I1star, 4);
}

KeplerOrbit resonant_orbit(double e, double mu, double I1star) {
    const double I2star = I1star * std::cbrt(1.0 - mu) * std::sqrt(1.0 - e * e);
    KeplerOrbit orbit = KeplerOrbit::from_actions(mu, I1star, I2star);
    return orbit;
}

}  // namespace

double MelnikovResult::abs_value() const {
    double s = 0.0;
    for (const Complex& v : value) s += std::norm(v);
    return std::sqrt(s);
}

ContourPath standard_gamma(const KeplerOrbit& orbit, const ContourParams& cp) {
    const double h = k1_of_e(orbit.e) / orbit.omega1();
    return build_gamma(3.0 * orbit.period(), h, cp.delta_rel * h, cp.bigM_rel * h,
                       cp.side);
}

SlitPieces slit_pieces_planar(double e, double mu, double I1star, double theta2,
                              const ContourParams& cp) {
    const KeplerOrbit orbit = resonant_orbit(e, mu, I1star);
    const SlitSpines s = build_slit_spines(orbit, cp);
    const Complex rot = std::exp(2.0 * kImag * theta2);
    const double pref = 4.5 * mu * orbit.p_phi / I1star;
    SlitPieces p = integrate_pieces(s, simplified_bracket(e, rot), cp.tol);
    p.real_leg *= pref;
    p.right_column *= pref;
    p.left_column *= pref;
    p.top_leg *= pref;
    p.error *= std::abs(pref);
    return p;
}

MelnikovResult melnikov_planar(double e, double mu, double I1star, double theta2,
                               const ContourParams& cp) {
    const KeplerOrbit orbit = resonant_orbit(e, mu, I1star);
    const SlitPieces p = slit_pieces_planar(e, mu, I1star, theta2, cp);
    return finish_result({p.value(), Complex{0.0, 0.0}}, {theta2},
                         standard_gamma(orbit, cp), p.error);
}

MelnikovResult melnikov_planar_raw(double e, double mu, double I1star, double theta2,
                                   const ContourParams& cp) {
    const KeplerOrbit orbit = resonant_orbit(e, mu, I1star);
    const SlitSpines s = build_slit_spines(orbit, cp);
    const Complex rot = std::exp(2.0 * kImag * theta2);
    const SlitPieces p =
        integrate_pieces(s, structured_bracket(orbit, rot), cp.tol);
    const double pref = domega11(mu, I1star) * 0.5 * mu;
    return finish_result({pref * p.value(), Complex{0.0, 0.0}}, {theta2},
                         standard_gamma(orbit, cp), std::abs(pref) * p.error);
}

MelnikovResult melnikov_spatial(double e, double mu, double I1star, double theta3,
                                const ContourParams& cp, SignVariant sign) {
    const KeplerOrbit orbit = resonant_orbit(e, mu, I1star);
    const SlitSpines s = build_slit_spines(orbit, cp);
    const Complex rot = std::exp(2.0 * kImag * theta3);
    Complex value;
    double err = 0.0;
    if (sign == SignVariant::Minus) {
        // Structured equatorial reduction of the polar-block integrand; the
        // azimuthal composite phase carries theta3 (theta2 fixed to 0 on the
        // equatorial family).
        const SlitPieces p =
            integrate_pieces(s, structured_bracket(orbit, rot), cp.tol);
        const double pref = domega11(mu, I1star) * 0.5 * mu;
        value = pref * p.value();
        err = std::abs(pref) * p.error;
    } else {
        const SlitPieces p =
            integrate_pieces(s, simplified_bracket_plus(e, rot), cp.tol);
        const double pref = 4.5 * mu * orbit.p_phi / I1star;
        value = pref * p.value();
        err = std::abs(pref) * p.error;
    }
    return finish_result({value, Complex{0.0, 0.0}, Complex{0.0, 0.0}}, {theta3},
                         standard_gamma(orbit, cp), err);
}

Complex top_segment_leading(const KeplerOrbit& orbit, double theta2, double M) {
    const double e = orbit.e;
    const double s1 = std::sqrt(1.0 - e * e);
    const Complex L = (kTwoPi / (e * e * e)) *
                      Complex{2.0 * std::sin(2.0 * theta2),
                              (2.0 - e * e) / s1 * std::cos(2.0 * theta2) +
                                  e * e / (3.0 * s1)};
    return M * L;
}

QuadratureResult top_segment_integral(const KeplerOrbit& orbit, double theta2,
                                      double M, double tol) {
    const double h = k1_of_e(orbit.e) / orbit.omega1();
    if (!(M > h))
        throw std::invalid_argument("top_segment_integral: M must exceed k1/omega1");
    const double Tstar = 3.0 * orbit.period();
    const double tL = Tstar / 3.0, tR = 2.0 * Tstar / 3.0;
    const double delta = 0.05 * h;
    // Transport the branch up the right column, then integrate the top leg.
    Spine col = build_spine(orbit, column_legs(tR, h, delta, M, ArcSide::Left),
                            Complex{2.0 * kTwoPi, 0.0});
    const std::vector<Segment> topLeg{LineSeg{{tR, M}, {tL, M}}};
    const Spine top = build_spine(orbit, topLeg, col.E_end);
    const Complex rot = std::exp(2.0 * kImag * theta2);
    return integrate_spine(top, top_integrand(orbit.e, rot), tol);
}

QuadratureResult small_circle_integral(const KeplerOrbit& orbit, double theta2,
                                       double radius, double tol) {
    const double h = k1_of_e(orbit.e) / orbit.omega1();
    if (!(radius > 0.0 && radius < h))
        throw std::invalid_argument("small_circle_integral: radius out of range");
    const double t0 = orbit.period();  // singular time column at T*/3
    std::vector<Segment> legs;
    legs.emplace_back(LineSeg{{t0, 0.0}, {t0, h - radius}});
    const ContourPath circle = build_double_circle({t0, h}, radius, 3.0 * t0);
    legs.push_back(circle.segments[0]);
    legs.push_back(circle.segments[1]);
    const Spine sp = build_spine(orbit, legs, Complex{kTwoPi, 0.0});

    const Complex rot = std::exp(2.0 * kImag * theta2);
    const StateFn f = simplified_bracket(orbit.e, rot);
    QuadratureResult total;
    for (std::size_t li = 1; li < sp.legs.size(); ++li) {  // skip the lead-in
        auto fi = [&](double sigma, Complex z) { return f(sp.eval(li, sigma), z); };
        const QuadratureResult r = integrate_segment(sp.legs[li], fi, 0.5 * tol);
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        total.nodes_used += r.nodes_used;
        total.converged = total.converged && r.converged;
    }
    return total;
}

MelnikovResult melnikov_generic(const GenericSystem& sys, const ResonanceData& res,
                                const std::vector<double>& theta,
                                const ContourPath& path, double tol) {
    if (static_cast<int>(theta.size()) != sys.m)
        throw std::invalid_argument("melnikov_generic: theta size != m");
    VectorXcd C1;
    double err = 0.0;
    if (sys.loop_eval) {
        LoopIntegrals li = sys.loop_eval(path, res.I_star, theta, tol);
        C1 = std::move(li.C1);
        err = li.error;
    } else {
        const VectorXd om = sys.omega(res.I_star);
        C1 = VectorXcd::Zero(sys.ell);
        for (int c = 0; c < sys.ell; ++c) {
            auto f = [&](std::size_t, double, Complex z) {
                VectorXcd th(sys.m);
                for (int j = 0; j < sys.m; ++j) th[j] = om[j] * z + theta[j];
                return sys.h_k(res.I_star, th)[c];
            };
            const QuadratureResult r = integrate(path, f, tol);
            C1[c] = r.value;
            err += r.error_estimate;
        }
    }
    const VectorXcd val = res.d_omega.cast<Complex>() * C1;
    std::vector<Complex> value(val.data(), val.data() + val.size());
    const double dnorm = res.d_omega.norm();
    return finish_result(std::move(value), theta, path, dnorm * err);
}

// ---------------------------------------------------------------------------
// Restricted three-body registrations.
// ---------------------------------------------------------------------------

namespace {

ContourParams params_from_path(const ContourPath& path, double tol) {
    if (!path.gamma)
        throw std::invalid_argument(
            "crtbp loop_eval: path must carry the standard-loop geometry");
    const GammaSpec& g = *path.gamma;
    ContourParams cp;
    cp.delta_rel = g.delta / g.height;
    cp.bigM_rel = g.bigM / g.height;
    cp.side = g.side;
    cp.tol = tol;
    return cp;
}

void check_theta1_zero(double theta1) {
    if (std::abs(theta1) > 1e-12)
        throw std::invalid_argument(
            "crtbp loop_eval: nonzero theta1 offset is not supported (the loop "
            "anchors assume perihelion phase at the basepoint)");
}

}  // namespace

VectorXd crtbp_planar_actions(double mu, double I1star, double e) {
    VectorXd I(2);
    I << I1star, I1star * std::cbrt(1.0 - mu) * std::sqrt(1.0 - e * e);
    return I;
}

VectorXd crtbp_spatial_actions(double mu, double I1star, double e) {
    VectorXd I(3);
    const double I2 = I1star * std::cbrt(1.0 - mu) * std::sqrt(1.0 - e * e);
    I << I1star, I2, I2;
    return I;
}

GenericSystem make_crtbp_planar(double mu) {
    GenericSystem sys;
    sys.name = "crtbp-planar";
    sys.ell = 2;
    sys.m = 2;
    sys.k = 5;
    sys.omega = [mu](const VectorXd& I) {
        VectorXd w(2);
        w << (1.0 - mu) / std::pow(I[0], 3), 0.0;
        return w;
    };
    sys.d_omega = [mu](const VectorXd& I) {
        MatrixXd d = MatrixXd::Zero(2, 2);
        d(0, 0) = domega11(mu, I[0]);
        return d;
    };
    sys.h_k = [mu](const VectorXd& I, const VectorXcd& th) {
        const KeplerOrbit orbit = KeplerOrbit::from_actions(mu, I[0], I[1]);
        // Principal-branch pointwise evaluation: reliable for |Im theta1|
        // below the singular height k1; loop evaluation uses loop_eval.
        const Complex E = solve_kepler_E(orbit.e, th[0], th[0]);
        const EccState s = ecc_state(orbit.e, E);
        const Complex rot = std::exp(2.0 * kImag * th[1]);
        VectorXcd h(2);
        h[0] = 0.5 * mu * structured_bracket(orbit, rot)(s, Complex{0.0, 0.0});
        h[1] = mu * second_component_bracket(orbit, rot)(s, Complex{0.0, 0.0});
        return h;
    };
    sys.g_k = [](const VectorXd&, const VectorXcd& th) {
        return VectorXcd::Zero(th.size()).eval();
    };
    sys.loop_eval = [mu](const ContourPath& path, const VectorXd& I,
                         const std::vector<double>& theta, double tol) {
        check_theta1_zero(theta.at(0));
        const KeplerOrbit orbit = KeplerOrbit::from_actions(mu, I[0], I[1]);
        const SlitSpines s = build_slit_spines(orbit, params_from_path(path, tol));
        const Complex rot = std::exp(2.0 * kImag * theta.at(1));
        const StateFn f1 = structured_bracket(orbit, rot);
        const StateFn f2 = second_component_bracket(orbit, rot);
        const IterVals v1 = loop_iterated(s, f1, tol);
        const IterVals v2 = loop_iterated(s, f2, tol);

        LoopIntegrals out;
        out.C1 = VectorXcd(2);
        out.C1 << 0.5 * mu * v1.integral, mu * v2.integral;
        // C2 = loop integral of (Domega Xi + g), g = 0.
        MatrixXd dom = MatrixXd::Zero(2, 2);
        dom(0, 0) = domega11(mu, I[0]);
        VectorXcd iter(2);
        iter << 0.5 * mu * v1.iterated, mu * v2.iterated;
        out.C2 = dom.cast<Complex>() * iter;
        out.error = mu * (0.5 * v1.error + v2.error);
        return out;
    };
    return sys;
}

GenericSystem make_crtbp_spatial(double mu) {
    GenericSystem sys;
    sys.name = "crtbp-spatial";
    sys.ell = 3;
    sys.m = 3;
    sys.k = 5;
    sys.omega = [mu](const VectorXd& I) {
        VectorXd w = VectorXd::Zero(3);
        w[0] = (1.0 - mu) / std::pow(I[0], 3);
        return w;
    };
    sys.d_omega = [mu](const VectorXd& I) {
        MatrixXd d = MatrixXd::Zero(3, 3);
        d(0, 0) = domega11(mu, I[0]);
        return d;
    };
    sys.h_k = [mu](const VectorXd& I, const VectorXcd& th) {
        if (std::abs(I[1] - I[2]) > 1e-9 * std::abs(I[1]))
            throw std::invalid_argument(
                "crtbp-spatial: only the equatorial family I2 = I3 is registered");
        const KeplerOrbit orbit = KeplerOrbit::from_actions(mu, I[0], I[1]);
        const Complex E = solve_kepler_E(orbit.e, th[0], th[0]);
        const EccState s = ecc_state(orbit.e, E);
        // Equatorial composite phase: theta3 - hat_chi3(Psi) = theta3 +
        // theta2 + nu, so the rotation carries theta2 + theta3.
        const Complex rot = std::exp(2.0 * kImag * (th[1] + th[2]));
        VectorXcd h(3);
        h[0] = 0.5 * mu * structured_bracket(orbit, rot)(s, Complex{0.0, 0.0});
        h[1] = mu * second_component_bracket(orbit, rot)(s, Complex{0.0, 0.0});
        h[2] = h[1];  // sin^2 Psi = 1 and I3/I2 = 1 on the equator
        return h;
    };
    sys.g_k = [](const VectorXd&, const VectorXcd& th) {
        return VectorXcd::Zero(th.size()).eval();
    };
    sys.loop_eval = [mu](const ContourPath& path, const VectorXd& I,
                         const std::vector<double>& theta, double tol) {
        check_theta1_zero(theta.at(0));
        if (std::abs(I[1] - I[2]) > 1e-9 * std::abs(I[1]))
            throw std::invalid_argument(
                "crtbp-spatial: only the equatorial family I2 = I3 is registered");
        const KeplerOrbit orbit = KeplerOrbit::from_actions(mu, I[0], I[1]);
        const SlitSpines s = build_slit_spines(orbit, params_from_path(path, tol));
        const Complex rot = std::exp(2.0 * kImag * (theta.at(1) + theta.at(2)));
        const IterVals v1 = loop_iterated(s, structured_bracket(orbit, rot), tol);
        const IterVals v2 =
            loop_iterated(s, second_component_bracket(orbit, rot), tol);

        LoopIntegrals out;
        out.C1 = VectorXcd(3);
        out.C1 << 0.5 * mu * v1.integral, mu * v2.integral, mu * v2.integral;
        MatrixXd dom = MatrixXd::Zero(3, 3);
        dom(0, 0) = domega11(mu, I[0]);
        VectorXcd iter(3);
        iter << 0.5 * mu * v1.iterated, mu * v2.iterated, mu * v2.iterated;
        out.C2 = dom.cast<Complex>() * iter;
        out.error = mu * (0.5 * v1.error + 2.0 * v2.error);
        return out;
    };
    return sys;
}

}  // namespace melcert
