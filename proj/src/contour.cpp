#include "melcert/contour.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace melcert {

namespace {
const Complex kI{0.0, 1.0};
}

Complex seg_point(const Segment& s, double sigma) {
    if (const auto* l = std::get_if<LineSeg>(&s)) return l->z0 + sigma * (l->z1 - l->z0);
    const auto& a = std::get<ArcSeg>(s);
    return a.center + a.radius * std::exp(kI * (a.a0 + sigma * (a.a1 - a.a0)));
}

Complex seg_deriv(const Segment& s, double sigma) {
    if (const auto* l = std::get_if<LineSeg>(&s)) return l->z1 - l->z0;
    const auto& a = std::get<ArcSeg>(s);
    const double da = a.a1 - a.a0;
    return kI * a.radius * da * std::exp(kI * (a.a0 + sigma * da));
}

Complex seg_start(const Segment& s) { return seg_point(s, 0.0); }
Complex seg_end(const Segment& s) { return seg_point(s, 1.0); }

double seg_length(const Segment& s) {
    if (const auto* l = std::get_if<LineSeg>(&s)) return std::abs(l->z1 - l->z0);
    const auto& a = std::get<ArcSeg>(s);
    return a.radius * std::abs(a.a1 - a.a0);
}

bool ContourPath::closed(double tol) const {
    if (segments.empty()) return false;
    Complex gap = seg_end(segments.back()) - seg_start(segments.front());
    if (Tstar > 0.0) {
        const double shift = std::round(gap.real() / Tstar) * Tstar;
        gap -= shift;
    }
    return std::abs(gap) < tol;
}

double ContourPath::total_length() const {
    double len = 0.0;
    for (const auto& s : segments) len += seg_length(s);
    return len;
}

double ContourPath::clearance(std::span<const Complex> points) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : segments) {
        const int n = 64;
        for (int i = 0; i <= n; ++i) {
            const Complex z = seg_point(s, double(i) / n);
            for (const Complex& p : points) best = std::min(best, std::abs(z - p));
        }
    }
    return best;
}

namespace {
void append_complex(std::string& out, Complex z) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "[%.17g,%.17g]", z.real(), z.imag());
    out += buf;
}
}  // namespace

std::string ContourPath::to_json() const {
    std::string out = "{\"Tstar\":";
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g", Tstar);
    out += buf;
    out += ",\"segments\":[";
    bool first = true;
    for (const auto& s : segments) {
        if (!first) out += ',';
        first = false;
        if (const auto* l = std::get_if<LineSeg>(&s)) {
            out += "{\"type\":\"line\",\"z0\":";
            append_complex(out, l->z0);
            out += ",\"z1\":";
            append_complex(out, l->z1);
            out += '}';
        } else {
            const auto& a = std::get<ArcSeg>(s);
            out += "{\"type\":\"arc\",\"center\":";
            append_complex(out, a.center);
            std::snprintf(buf, sizeof buf, ",\"radius\":%.17g,\"a0\":%.17g,\"a1\":%.17g}",
                          a.radius, a.a0, a.a1);
            out += buf;
        }
    }
    out += "]}";
    return out;
}

ContourPath build_gamma(double Tstar, double k1_over_omega1, double delta,
                        double bigM, ArcSide side) {
    if (!(delta > 0.0 && delta < k1_over_omega1 && k1_over_omega1 < bigM))
        throw std::invalid_argument("build_gamma: need 0 < delta < k1/omega1 < M");
    const double h = k1_over_omega1;
    const double tL = Tstar / 3.0, tR = 2.0 * Tstar / 3.0;
    const Complex cR{tR, h}, cL{tL, h};
    // up-going dodge: bottom -> top; side=Left passes through angle pi
    // (clockwise in the arc parameter), side=Right through angle 0.
    const double upA0 = -0.5 * kPi;
    const double upA1 = (side == ArcSide::Left) ? -1.5 * kPi : 0.5 * kPi;

    ContourPath path;
    path.Tstar = Tstar;
    path.gamma = GammaSpec{Tstar, h, delta, bigM, side};
    auto& seg = path.segments;
    seg.emplace_back(LineSeg{{tL, 0.0}, {tR, 0.0}});
    seg.emplace_back(LineSeg{{tR, 0.0}, {tR, h - delta}});
    seg.emplace_back(ArcSeg{cR, delta, upA0, upA1});
    seg.emplace_back(LineSeg{{tR, h + delta}, {tR, bigM}});
    seg.emplace_back(LineSeg{{tR, bigM}, {tL, bigM}});
    seg.emplace_back(LineSeg{{tL, bigM}, {tL, h + delta}});
    // down-going mirror of the dodge at tL: top -> bottom through the same side
    seg.emplace_back(ArcSeg{cL, delta, 0.5 * kPi, 0.5 * kPi - (upA1 - upA0)});
    seg.emplace_back(LineSeg{{tL, h - delta}, {tL, 0.0}});
    return path;
}

ContourPath build_double_circle(Complex center, double radius, double Tstar) {
    ContourPath path;
    path.Tstar = Tstar;
    path.segments.emplace_back(ArcSeg{center, radius, -0.5 * kPi, -0.5 * kPi + kTwoPi});
    path.segments.emplace_back(
        ArcSeg{center, radius, -0.5 * kPi + kTwoPi, -0.5 * kPi + 2.0 * kTwoPi});
    return path;
}

// ---------------------------------------------------------------------------
// Quadrature: 16-node Gauss-Legendre panels with adaptive bisection.  The
// error estimate for a panel is |whole - (left + right)|.
// ---------------------------------------------------------------------------

namespace {

// nodes/weights on [-1, 1]
constexpr std::array<double, 8> kGLx = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
    0.9445750230732326, 0.9894009349916499};
constexpr std::array<double, 8> kGLw = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
    0.0622535239386479, 0.0271524594117541};

struct PanelEval {
    const Segment* seg;
    const std::function<Complex(double, Complex)>* f;
    std::size_t* nodes;

    Complex gl16(double lo, double hi) const {
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        Complex acc{0.0, 0.0};
        for (int i = 0; i < 8; ++i) {
            for (const double sgn : {-1.0, 1.0}) {
                const double sigma = mid + sgn * half * kGLx[i];
                const Complex z = seg_point(*seg, sigma);
                acc += kGLw[i] * (*f)(sigma, z) * seg_deriv(*seg, sigma);
            }
        }
        *nodes += 16;
        return acc * half;
    }

    // returns value; accumulates error estimate
    Complex refine(double lo, double hi, Complex whole, double tol, int depth,
                   double* err, bool* ok) const {
        const double mid = 0.5 * (lo + hi);
        const Complex left = gl16(lo, mid), right = gl16(mid, hi);
        const double disc = std::abs(whole - (left + right));
        if (disc < tol || depth <= 0) {
            if (depth <= 0 && disc >= tol) *ok = false;
            *err += disc;
            return left + right;
        }
        return refine(lo, mid, left, 0.5 * tol, depth - 1, err, ok) +
               refine(mid, hi, right, 0.5 * tol, depth - 1, err, ok);
    }
};

}  // namespace

QuadratureResult integrate_segment(const Segment& seg,
                                   const std::function<Complex(double, Complex)>& f,
                                   double tol, int max_depth) {
    QuadratureResult r;
    PanelEval pe{&seg, &f, &r.nodes_used};
    const Complex whole = pe.gl16(0.0, 1.0);
    r.value = pe.refine(0.0, 1.0, whole, tol, max_depth, &r.error_estimate, &r.converged);
    return r;
}

CumulativeResult cumulative_segment(const Segment& seg,
                                    const std::function<Complex(double, Complex)>& f,
                                    int n) {
    const int N = 2 * n;
    const double h = 1.0 / N;
    std::vector<Complex> g(N + 1), dz(N + 1), F(N + 1);
    for (int j = 0; j <= N; ++j) {
        const double sigma = j * h;
        dz[j] = seg_deriv(seg, sigma);
        g[j] = f(sigma, seg_point(seg, sigma)) * dz[j];
    }
    F[0] = {0.0, 0.0};
    for (int j = 0; j + 2 <= N; j += 2) {
        F[j + 1] = F[j] + (h / 12.0) * (5.0 * g[j] + 8.0 * g[j + 1] - g[j + 2]);
        F[j + 2] = F[j] + (h / 3.0) * (g[j] + 4.0 * g[j + 1] + g[j + 2]);
    }
    CumulativeResult out;
    out.integral = F[N];
    for (int j = 0; j + 2 <= N; j += 2) {
        out.iterated += (h / 3.0) * (F[j] * dz[j] + 4.0 * F[j + 1] * dz[j + 1] +
                                     F[j + 2] * dz[j + 2]);
    }
    return out;
}

QuadratureResult integrate(const ContourPath& path, const Integrand& f, double tol) {
    QuadratureResult total;
    const double len = std::max(path.total_length(), 1e-300);
    for (std::size_t i = 0; i < path.segments.size(); ++i) {
        const Segment& seg = path.segments[i];
        const double tol_i = std::max(tol * seg_length(seg) / len, 1e-16);
        auto fi = [&](double sigma, Complex z) { return f(i, sigma, z); };
        const QuadratureResult r = integrate_segment(seg, fi, tol_i);
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        total.nodes_used += r.nodes_used;
        total.converged = total.converged && r.converged;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Continuation spine
// ---------------------------------------------------------------------------

namespace {

// One predictor/corrector step of the E-continuation from (t_prev, E_prev)
// to t_next.  Returns false when the corrector strays too far from the
// predictor (step must be bisected).
bool step_E(const KeplerOrbit& orbit, Complex t_prev, Complex E_prev, Complex t_next,
            Complex* E_next, double max_dE) {
    const double w1 = orbit.omega1();
    const Complex rho = 1.0 - orbit.e * std::cos(E_prev);
    if (std::abs(rho) < 1e-12) return false;
    const Complex predicted = E_prev + w1 * (t_next - t_prev) / rho;
    if (std::abs(predicted - E_prev) > max_dE) return false;
    Complex E;
    try {
        E = solve_kepler_E(orbit.e, w1 * t_next, predicted);
    } catch (const KeplerError&) {
        return false;
    }
    if (std::abs(E - predicted) > max_dE) return false;  // likely sheet jump
    *E_next = E;
    return true;
}

}  // namespace

Spine build_spine(const KeplerOrbit& orbit, std::span<const Segment> legs,
                  Complex E0, double max_dE) {
    Spine sp;
    sp.orbit = orbit;
    sp.legs.assign(legs.begin(), legs.end());
    sp.knots.resize(legs.size());
    sp.E_start = E0;

    Complex E = E0;
    for (std::size_t li = 0; li < legs.size(); ++li) {
        const Segment& leg = legs[li];
        auto& kn = sp.knots[li];
        double sigma = 0.0;
        Complex t = seg_point(leg, 0.0);
        kn.push_back({sigma, t, E});
        double step = 1.0 / 64.0;
        const double min_step = std::ldexp(1.0, -20);
        while (sigma < 1.0) {
            const double next = std::min(1.0, sigma + step);
            const Complex t_next = seg_point(leg, next);
            Complex E_next;
            if (step_E(orbit, t, E, t_next, &E_next, max_dE)) {
                sigma = next;
                t = t_next;
                E = E_next;
                kn.push_back({sigma, t, E});
                if (step < 1.0 / 64.0) step *= 2.0;
            } else {
                step *= 0.5;
                if (step < min_step)
                    throw ContinuationError("build_spine: step underflow (path too close to a singular time)");
            }
        }
    }
    sp.E_end = E;
    return sp;
}

EccState Spine::eval(std::size_t leg, double sigma) const {
    const auto& kn = knots.at(leg);
    // bracketing knot below sigma
    auto it = std::upper_bound(kn.begin(), kn.end(), sigma,
                               [](double s, const SpineKnot& k) { return s < k.sigma; });
    const SpineKnot& lo = (it == kn.begin()) ? kn.front() : *(it - 1);
    const SpineKnot& hi = (it == kn.end()) ? kn.back() : *it;
    const Complex t = seg_point(legs[leg], sigma);
    Complex seed;
    if (hi.sigma > lo.sigma) {
        const double w = (sigma - lo.sigma) / (hi.sigma - lo.sigma);
        seed = lo.E + w * (hi.E - lo.E);
    } else {
        seed = lo.E;
    }
    const Complex E = solve_kepler_E(orbit.e, orbit.omega1() * t, seed);
    return ecc_state(orbit.e, E);
}

std::vector<PhiNode> continue_phi(const KeplerOrbit& orbit, const ContourPath& path) {
    if (path.segments.empty()) return {};
    const Complex z0 = seg_start(path.segments.front());
    if (std::abs(z0.imag()) > 1e-12)
        throw ContinuationError("continue_phi: path must start on the real axis");
    const Complex E0 = solve_kepler_real(orbit.e, orbit.omega1() * z0.real());

    const Spine sp = build_spine(orbit, path.segments, E0);

    std::vector<PhiNode> out;
    // initial phi consistent with the winding of E
    {
        const EccState s = ecc_state(orbit.e, E0);
        const Complex w = unit_phase(orbit.e, s);
        const double turns = std::floor((E0.real() + kPi) / kTwoPi);
        const Complex phi0 = std::atan2(w.imag(), w.real()) + turns * kTwoPi;
        out.push_back({seg_start(path.segments.front()), phi0, E0});
    }
    // Append the node at (li, sigma_b); if the phase step from the previous
    // node is too large for the log-unwrap to be trustworthy, bisect the
    // sigma interval first.  Keeps |dphi| <= 1 between consecutive nodes.
    const auto append_to = [&](auto&& self, std::size_t li, double sigma_a,
                               const Complex& w_a, double sigma_b,
                               const EccState& s_b, int depth) -> Complex {
        const Complex w_b = unit_phase(orbit.e, s_b);
        const Complex dphi = -kI * std::log(w_b / w_a);
        if (std::abs(dphi) > 1.0 && depth < 24) {
            const double sigma_m = 0.5 * (sigma_a + sigma_b);
            const EccState s_m = sp.eval(li, sigma_m);
            const Complex w_m =
                self(self, li, sigma_a, w_a, sigma_m, s_m, depth + 1);
            return self(self, li, sigma_m, w_m, sigma_b, s_b, depth + 1);
        }
        out.push_back({seg_point(path.segments[li], sigma_b),
                       out.back().phi + dphi, s_b.E});
        return w_b;
    };

    Complex w_prev = unit_phase(orbit.e, ecc_state(orbit.e, E0));
    for (std::size_t li = 0; li < sp.knots.size(); ++li) {
        double sigma_prev = 0.0;
        for (std::size_t ki = 1; ki < sp.knots[li].size(); ++ki) {
            const SpineKnot& k = sp.knots[li][ki];
            w_prev = append_to(append_to, li, sigma_prev, w_prev, k.sigma,
                               ecc_state(orbit.e, k.E), 0);
            sigma_prev = k.sigma;
        }
    }
    return out;
}

}  // namespace melcert
