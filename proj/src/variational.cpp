#include "melcert/variational.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>

#include <json.hpp>

namespace melcert {

namespace {

using nlohmann::json;

json json_cvec(const VectorXcd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back({v[i].real(), v[i].imag()});
    return a;
}

json json_cmat(const MatrixXcd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

json json_rvec(const VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json json_ivec(const VectorXi& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json json_rmat(const MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

void check_compatible(const UnipotentElement& a, const UnipotentElement& b) {
    if (a.ell() != b.ell() || a.m() != b.m())
        throw std::invalid_argument("unipotent: dimension mismatch");
}

void check_shape(const UnipotentElement& a) {
    if (a.C3.rows() != a.C2.size() || a.C3.cols() != a.C1.size())
        throw std::invalid_argument("unipotent: C3 must be m x ell");
}

}  // namespace

UnipotentElement UnipotentElement::identity(int ell, int m) {
    UnipotentElement u;
    u.C1 = VectorXcd::Zero(ell);
    u.C2 = VectorXcd::Zero(m);
    u.C3 = MatrixXcd::Zero(m, ell);
    return u;
}

MatrixXcd UnipotentElement::to_matrix() const {
    check_shape(*this);
    const int l = ell(), mm = m();
    MatrixXcd M = MatrixXcd::Identity(l + mm + 1, l + mm + 1);
    M.block(0, l + mm, l, 1) = C1;
    M.block(l, 0, mm, l) = C3;
    M.block(l, l + mm, mm, 1) = C2;
    return M;
}

std::string UnipotentElement::to_json() const {
    json j{{"C1", json_cvec(C1)},
           {"C2", json_cvec(C2)},
           {"C3", json_cmat(C3)},
           {"error", error}};
    return j.dump();
}

UnipotentElement unipotent_product(const UnipotentElement& a,
                                   const UnipotentElement& b) {
    check_compatible(a, b);
    check_shape(a);
    check_shape(b);
    UnipotentElement out;
    out.C1 = a.C1 + b.C1;
    out.C2 = a.C3 * b.C1 + a.C2 + b.C2;
    out.C3 = a.C3 + b.C3;
    out.error = a.error + b.error;
    return out;
}

UnipotentElement unipotent_power(const UnipotentElement& a, long long k) {
    check_shape(a);
    UnipotentElement out;
    const double kd = static_cast<double>(k);
    const double half = 0.5 * kd * static_cast<double>(k - 1);
    out.C1 = kd * a.C1;
    out.C2 = half * (a.C3 * a.C1) + kd * a.C2;
    out.C3 = kd * a.C3;
    out.error = std::abs(kd) * a.error;
    return out;
}

UnipotentElement unipotent_inverse(const UnipotentElement& a) {
    check_shape(a);
    UnipotentElement out;
    out.C1 = -a.C1;
    out.C2 = a.C3 * a.C1 - a.C2;
    out.C3 = -a.C3;
    out.error = a.error;
    return out;
}

bool commutes(const UnipotentElement& a, const UnipotentElement& b) {
    check_compatible(a, b);
    const VectorXcd lhs = a.C3 * b.C1;
    const VectorXcd rhs = b.C3 * a.C1;
    for (Eigen::Index i = 0; i < lhs.size(); ++i)
        if (lhs[i] != rhs[i]) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Resonance detection.
// ---------------------------------------------------------------------------

namespace {

struct Rational {
    std::int64_t p = 0;
    std::int64_t q = 1;
};

bool ratio_ok(double x, std::int64_t p, std::int64_t q, double tol) {
    return std::abs(x - static_cast<double>(p) / static_cast<double>(q)) <
           tol * std::max(1.0, std::abs(x)) / static_cast<double>(q);
}

// Best rational p/q ~ x with q <= Q via continued-fraction convergents,
// accepted only within the scaled tolerance.
std::optional<Rational> rationalize(double x, double tol, std::int64_t Q) {
    if (!std::isfinite(x)) return std::nullopt;
    const double xr = std::round(x);
    if (std::abs(xr) < 9.0e15 && ratio_ok(x, static_cast<std::int64_t>(xr), 1, tol))
        return Rational{static_cast<std::int64_t>(xr), 1};
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double frac = x;
    for (int it = 0; it < 64; ++it) {
        const double af = std::floor(frac);
        if (std::abs(af) > 9.0e15) break;
        const std::int64_t a = static_cast<std::int64_t>(af);
        const std::int64_t p2 = a * p1 + p0;
        const std::int64_t q2 = a * q1 + q0;
        if (q2 > Q || q2 <= 0) break;
        if (ratio_ok(x, p2, q2, tol)) return Rational{p2, q2};
        const double rem = frac - af;
        if (rem < 1e-18) break;
        frac = 1.0 / rem;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    return std::nullopt;
}

bool exact_integer(double x) {
    return std::abs(x) < 9.0e15 && x == std::round(x);
}

}  // namespace

std::optional<ResonanceMatch> detect_resonance(const VectorXd& omega_vec,
                                               double tol,
                                               std::int64_t max_denominator) {
    const Eigen::Index n = omega_vec.size();
    if (n == 0) return std::nullopt;

    Eigen::Index ref = 0;
    for (Eigen::Index j = 1; j < n; ++j)
        if (std::abs(omega_vec[j]) > std::abs(omega_vec[ref])) ref = j;
    if (omega_vec[ref] == 0.0) return std::nullopt;

    // Exact-integer input: gcd shortcut (desk-scale inputs are often exact).
    bool all_int = true;
    for (Eigen::Index j = 0; j < n; ++j) all_int = all_int && exact_integer(omega_vec[j]);
    if (all_int) {
        std::int64_t g = 0;
        for (Eigen::Index j = 0; j < n; ++j)
            g = std::gcd(g, static_cast<std::int64_t>(std::abs(omega_vec[j])));
        ResonanceMatch match;
        match.omega_star = static_cast<double>(g);
        match.k_vec = VectorXi(n);
        for (Eigen::Index j = 0; j < n; ++j)
            match.k_vec[j] = static_cast<int>(omega_vec[j] / static_cast<double>(g));
        return match;
    }

    std::vector<Rational> ratios(static_cast<std::size_t>(n));
    std::int64_t lcm_q = 1;
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto r = rationalize(omega_vec[j] / omega_vec[ref], tol, max_denominator);
        if (!r) return std::nullopt;
        ratios[static_cast<std::size_t>(j)] = *r;
        const std::int64_t g = std::gcd(lcm_q, r->q);
        if (static_cast<double>(lcm_q / g) * static_cast<double>(r->q) > 9.0e15)
            return std::nullopt;
        lcm_q = (lcm_q / g) * r->q;
    }

    const double sgn = (omega_vec[ref] > 0.0) ? 1.0 : -1.0;
    ResonanceMatch match;
    match.omega_star = std::abs(omega_vec[ref]) / static_cast<double>(lcm_q);
    match.k_vec = VectorXi(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Rational& r = ratios[static_cast<std::size_t>(j)];
        const std::int64_t kj = r.p * (lcm_q / r.q);
        if (std::abs(static_cast<double>(kj)) >
            static_cast<double>(std::numeric_limits<int>::max()))
            return std::nullopt;
        match.k_vec[j] = static_cast<int>(sgn > 0 ? kj : -kj);
        // Consistency: omega_j / omega_star must sit on the integer.
        const double check = omega_vec[j] / match.omega_star;
        if (std::abs(check - static_cast<double>(match.k_vec[j])) >
            tol * std::max(1.0, std::abs(check)) * 16.0)
            return std::nullopt;
    }
    return match;
}

ResonanceData make_resonance_data(const GenericSystem& sys, const VectorXd& I_star,
                                  int subharmonic_n, double tol) {
    if (subharmonic_n < 1)
        throw std::invalid_argument("make_resonance_data: subharmonic_n >= 1");
    const VectorXd om = sys.omega(I_star);
    const auto match = detect_resonance(om, tol);
    if (!match)
        throw std::invalid_argument(
            "make_resonance_data: frequency vector is not resonant within tol");
    ResonanceData res;
    res.I_star = I_star;
    res.omega_star = match->omega_star / static_cast<double>(subharmonic_n);
    res.k_vec = match->k_vec * subharmonic_n;
    res.T_star = kTwoPi / res.omega_star;
    res.d_omega = sys.d_omega(I_star);
    return res;
}

// ---------------------------------------------------------------------------
// Variational-equation quadrature along paths (pointwise evaluation).
// ---------------------------------------------------------------------------

namespace {

struct ComponentIter {
    Complex integral{0.0, 0.0};
    Complex iterated{0.0, 0.0};
    double error = 0.0;
};

ComponentIter iter_once(std::span<const Segment> legs,
                        const std::function<Complex(Complex)>& f, int n) {
    ComponentIter out;
    for (const Segment& leg : legs) {
        const CumulativeResult c =
            cumulative_segment(leg, [&](double, Complex z) { return f(z); }, n);
        const Complex dtau = seg_end(leg) - seg_start(leg);
        out.iterated += out.integral * dtau + c.iterated;
        out.integral += c.integral;
    }
    return out;
}

ComponentIter iter_richardson(std::span<const Segment> legs,
                              const std::function<Complex(Complex)>& f,
                              double tol) {
    int n = 64;
    ComponentIter prev = iter_once(legs, f, n);
    for (;;) {
        n *= 2;
        ComponentIter cur = iter_once(legs, f, n);
        cur.error = (std::abs(cur.integral - prev.integral) +
                     std::abs(cur.iterated - prev.iterated)) /
                    15.0;
        if (cur.error < tol || n >= 4096) return cur;
        prev = cur;
    }
}

QuadratureResult integrate_legs(std::span<const Segment> legs,
                                const std::function<Complex(Complex)>& f,
                                double tol) {
    QuadratureResult total;
    double len = 0.0;
    for (const Segment& l : legs) len += seg_length(l);
    for (const Segment& leg : legs) {
        const double tol_i =
            (len > 0.0) ? std::max(tol * seg_length(leg) / len, 1e-16) : tol;
        const QuadratureResult r = integrate_segment(
            leg, [&](double, Complex z) { return f(z); }, tol_i);
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        total.nodes_used += r.nodes_used;
        total.converged = total.converged && r.converged;
    }
    return total;
}

// Integrals of h_k (plain and iterated) and g_k along the legs, evaluated
// pointwise at angles omega(I*) z + theta.
struct PathData {
    VectorXcd int_h;   // ell: integral of h
    VectorXcd iter_h;  // ell: integral of the running integral of h
    VectorXcd int_g;   // m: integral of g
    double error = 0.0;
};

PathData eval_legs(const GenericSystem& sys, const ResonanceData& res,
                   const std::vector<double>& theta,
                   std::span<const Segment> legs, double tol) {
    if (static_cast<int>(theta.size()) != sys.m)
        throw std::invalid_argument("variational: theta size != m");
    const VectorXd om = sys.omega(res.I_star);
    auto angles = [&om, &theta](Complex z) {
        VectorXcd th(om.size());
        for (Eigen::Index j = 0; j < om.size(); ++j)
            th[j] = om[j] * z + theta[static_cast<std::size_t>(j)];
        return th;
    };

    PathData out;
    out.int_h = VectorXcd::Zero(sys.ell);
    out.iter_h = VectorXcd::Zero(sys.ell);
    out.int_g = VectorXcd::Zero(sys.m);
    for (int c = 0; c < sys.ell; ++c) {
        auto fc = [&](Complex z) { return sys.h_k(res.I_star, angles(z))[c]; };
        const ComponentIter ci = iter_richardson(legs, fc, tol);
        out.int_h[c] = ci.integral;
        out.iter_h[c] = ci.iterated;
        out.error += ci.error;
    }
    for (int c = 0; c < sys.m; ++c) {
        auto gc = [&](Complex z) { return sys.g_k(res.I_star, angles(z))[c]; };
        const QuadratureResult r = integrate_legs(legs, gc, tol);
        out.int_g[c] = r.value;
        out.error += r.error_estimate;
    }
    return out;
}

double guarded_margin(double numerator, double scale, double err) {
    if (!(numerator > 0.0)) return 0.0;
    const double denom = scale * err;
    if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
    return numerator / denom;
}

}  // namespace

MatrixXcd fundamental_matrix(const GenericSystem& sys, const ResonanceData& res,
                             const std::vector<double>& theta, Complex t,
                             const std::optional<ContourPath>& path, double tol) {
    const int l = sys.ell, mm = sys.m;
    MatrixXcd Phi = MatrixXcd::Identity(l + mm + 1, l + mm + 1);
    Phi.block(l, 0, mm, l) = res.d_omega.cast<Complex>() * t;
    if (!path && std::abs(t) == 0.0) return Phi;

    std::vector<Segment> line;
    std::span<const Segment> legs;
    if (path) {
        if (path->segments.empty())
            throw std::invalid_argument("fundamental_matrix: empty path");
        const double scale = 1.0 + std::abs(t);
        if (std::abs(seg_start(path->segments.front())) > 1e-9 * scale ||
            std::abs(seg_end(path->segments.back()) - t) > 1e-9 * scale)
            throw std::invalid_argument(
                "fundamental_matrix: path must run from 0 to t");
        legs = path->segments;
    } else {
        line.emplace_back(LineSeg{{0.0, 0.0}, t});
        legs = line;
    }

    const PathData d = eval_legs(sys, res, theta, legs, tol);
    Phi.block(0, l + mm, l, 1) = d.int_h;
    Phi.block(l, l + mm, mm, 1) =
        res.d_omega.cast<Complex>() * d.iter_h + d.int_g;
    return Phi;
}

UnipotentElement monodromy_gamma(const GenericSystem& sys,
                                 const ResonanceData& res,
                                 const std::vector<double>& theta,
                                 const ContourPath& gamma, double tol) {
    if (gamma.segments.empty())
        throw std::invalid_argument("monodromy_gamma: empty loop");
    if (!gamma.closed())
        throw std::invalid_argument("monodromy_gamma: loop is not closed");
    UnipotentElement u;
    u.C3 = MatrixXcd::Zero(sys.m, sys.ell);
    if (sys.loop_eval) {
        LoopIntegrals li = sys.loop_eval(gamma, res.I_star, theta, tol);
        u.C1 = std::move(li.C1);
        u.C2 = std::move(li.C2);
        u.error = li.error;
        return u;
    }
    const PathData d = eval_legs(sys, res, theta, gamma.segments, tol);
    u.C1 = d.int_h;
    u.C2 = res.d_omega.cast<Complex>() * d.iter_h + d.int_g;
    u.error = d.error;
    return u;
}

UnipotentElement monodromy_period(const GenericSystem& sys,
                                  const ResonanceData& res,
                                  const std::vector<double>& theta, double tol) {
    std::vector<Segment> line;
    line.emplace_back(LineSeg{{0.0, 0.0}, {res.T_star, 0.0}});
    const PathData d = eval_legs(sys, res, theta, line, tol);
    UnipotentElement u;
    u.C1 = d.int_h;
    u.C2 = res.d_omega.cast<Complex>() * d.iter_h + d.int_g;
    u.C3 = (res.d_omega * res.T_star).cast<Complex>();
    u.error = d.error;
    return u;
}

std::string to_string(Verdict v) {
    return v == Verdict::Positive ? "POSITIVE" : "INCONCLUSIVE";
}

Certificate certify_nonintegrability(const GenericSystem& sys,
                                     const ResonanceData& res,
                                     const std::vector<double>& theta,
                                     const ContourPath& gamma, double tol) {
    Certificate cert;
    cert.system = sys.name;
    cert.I_star = res.I_star;
    cert.k_vec = res.k_vec;
    cert.theta = theta;

    const UnipotentElement mg = monodromy_gamma(sys, res, theta, gamma, tol);
    cert.C1_hat = mg.C1;
    cert.C2_hat = mg.C2;
    // The C3 block of the real-period monodromy is available in closed form;
    // no quadrature enters it.
    cert.C3_bar = res.d_omega * res.T_star;
    cert.error_estimate = mg.error;

    const VectorXcd wA2 = res.d_omega.cast<Complex>() * mg.C1;
    const VectorXcd wLemma = cert.C3_bar.cast<Complex>() * mg.C1;
    cert.margin_A2 = guarded_margin(wA2.norm(), res.d_omega.norm(), mg.error);
    cert.margin_lemma =
        guarded_margin(wLemma.norm(), cert.C3_bar.norm(), mg.error);
    cert.verdict = (cert.margin_A2 > 10.0 && cert.margin_lemma > 10.0)
                       ? Verdict::Positive
                       : Verdict::Inconclusive;
    return cert;
}

std::string Certificate::to_json() const {
    json j{{"system", system},
           {"I_star", json_rvec(I_star)},
           {"k_vec", json_ivec(k_vec)},
           {"theta", theta},
           {"C1_hat", json_cvec(C1_hat)},
           {"C2_hat", json_cvec(C2_hat)},
           {"C3_bar", json_rmat(C3_bar)},
           {"margins", {{"A2", margin_A2}, {"lemma", margin_lemma}}},
           {"error", error_estimate},
           {"verdict", melcert::to_string(verdict)}};
    return j.dump();
}

}  // namespace melcert
