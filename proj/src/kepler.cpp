#include "melcert/kepler.hpp"

#include <cmath>

namespace melcert {

KeplerOrbit::KeplerOrbit(double mu_, double e_, double p_phi_)
    : mu(mu_), e(e_), p_phi(p_phi_) {
    if (!(mu >= 0.0 && mu < 1.0)) throw KeplerError("mu outside [0,1)");
    if (!(e >= 0.0 && e < 1.0)) throw KeplerError("e outside [0,1)");
    if (!(p_phi > 0.0)) throw KeplerError("p_phi must be positive");
}

double KeplerOrbit::canonical_L() const { return p_phi / std::sqrt(1.0 - e * e); }

double KeplerOrbit::omega1() const {
    const double g = gm();
    return g * g * std::pow(1.0 - e * e, 1.5) / (p_phi * p_phi * p_phi);
}

double KeplerOrbit::action_I1() const { return canonical_L() / std::cbrt(gm()); }

KeplerOrbit KeplerOrbit::from_actions(double mu, double I1, double I2) {
    const double L = I1 * std::cbrt(1.0 - mu);
    const double ratio = I2 / L;
    if (!(ratio > 0.0 && ratio <= 1.0))
        throw KeplerError("actions do not describe a bound orbit (need 0 < I2 <= I1 (1-mu)^{1/3})");
    const double e = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
    return KeplerOrbit(mu, e, I2);
}

double k1_of_e(double e) {
    if (!(e > 0.0 && e < 1.0)) throw KeplerError("k1_of_e: e outside (0,1)");
    const double s = std::sqrt(1.0 - e * e);
    return 2.0 * std::atanh((1.0 - e) / s) - s;
}

double k2_of_e(double e) {
    if (!(e > 0.0 && e < 1.0)) throw KeplerError("k2_of_e: e outside (0,1)");
    return std::acosh(1.0 / e);
}

std::vector<Complex> singular_times(const KeplerOrbit& orbit, double Tstar) {
    const double h = k1_of_e(orbit.e) / orbit.omega1();
    const double T = orbit.period();
    std::vector<Complex> out;
    for (int n = 0; n * T < Tstar - 1e-12 * Tstar; ++n)
        out.emplace_back(n * T, h);
    return out;
}

EccState ecc_state(double e, Complex E) {
    EccState s;
    s.E = E;
    s.cosE = std::cos(E);
    s.sinE = std::sin(E);
    s.rho = 1.0 - e * s.cosE;
    return s;
}

Complex solve_kepler_E(double e, Complex z, Complex E0, double tol, int max_iter) {
    Complex E = E0;
    for (int it = 0; it < max_iter; ++it) {
        const Complex f = E - e * std::sin(E) - z;
        if (std::abs(f) < tol) return E;
        const Complex df = 1.0 - e * std::cos(E);
        if (std::abs(df) < 1e-14) throw KeplerError("solve_kepler_E: derivative vanished (branch point)");
        E -= f / df;
    }
    throw KeplerError("solve_kepler_E: Newton did not converge");
}

double solve_kepler_real(double e, double mean_anomaly, double tol) {
    // reduce to [0, 2*pi), solve, restore the winding
    const double turns = std::floor(mean_anomaly / kTwoPi);
    const double m = mean_anomaly - turns * kTwoPi;
    double E = (e < 0.8) ? m : kPi;  // standard starters
    for (int it = 0; it < 80; ++it) {
        const double f = E - e * std::sin(E) - m;
        if (std::abs(f) < tol) break;
        E -= f / (1.0 - e * std::cos(E));
    }
    return E + turns * kTwoPi;
}

Complex cos_phi(double e, const EccState& s) { return (s.cosE - e) / s.rho; }

Complex sin_phi(double e, const EccState& s) {
    return std::sqrt(1.0 - e * e) * s.sinE / s.rho;
}

Complex one_plus_e_cos_phi(double e, const EccState& s) {
    return (1.0 - e * e) / s.rho;
}

Complex unit_phase(double e, const EccState& s) {
    return (s.cosE - e + Complex(0.0, 1.0) * std::sqrt(1.0 - e * e) * s.sinE) / s.rho;
}

Complex radius_of_phi(const KeplerOrbit& orbit, Complex phi) {
    const Complex denom = 1.0 + orbit.e * std::cos(phi);
    if (std::abs(denom) < 1e-10)
        throw KeplerError("radius_of_phi: pole of the orbit (1 + e cos phi ~ 0)");
    return orbit.p_phi * orbit.p_phi / (orbit.gm() * denom);
}

Complex time_of_flight(const KeplerOrbit& orbit, Complex phi, TofBranch branch) {
    const double e = orbit.e;
    const double s1 = std::sqrt(1.0 - e * e);
    const Complex denom = 1.0 + e * std::cos(phi);
    if (std::abs(denom) < 1e-10)
        throw KeplerError("time_of_flight: pole of the orbit (1 + e cos phi ~ 0)");
    const Complex common = e * s1 * std::sin(phi) / denom;
    Complex w1t;
    if (branch == TofBranch::Principal) {
        if (std::abs(phi.real()) >= kPi)
            throw KeplerError("time_of_flight: Re(phi) outside (-pi, pi) on the principal branch");
        w1t = 2.0 * std::atan((1.0 - e) * std::tan(0.5 * phi) / s1) - common;
    } else {
        if (!(phi.real() > 0.0 && phi.real() < kTwoPi))
            throw KeplerError("time_of_flight: Re(phi) outside (0, 2*pi) on the shifted branch");
        const Complex cot = std::cos(0.5 * (phi + kPi)) / std::sin(0.5 * (phi + kPi));
        // acot(x) = atan(1/x)
        w1t = 2.0 * std::atan(s1 / ((1.0 - e) * cot)) - common + kPi;
    }
    return w1t / orbit.omega1();
}

Complex phi_rate(const KeplerOrbit& orbit, Complex phi) {
    const double e = orbit.e;
    const Complex u = 1.0 + e * std::cos(phi);
    return orbit.omega1() * u * u / std::pow(1.0 - e * e, 1.5);
}

Complex phi_of_time(const KeplerOrbit& orbit, Complex t, Complex seed) {
    // Reduce the seed into a closed-form branch window and the target time by
    // whole periods (the inverse is only defined mod one period once paths are
    // allowed to wind past the anomaly branch cuts), then restore the winding.
    const double T = orbit.period();
    double winding = std::floor((seed.real() + kPi) / kTwoPi);  // Re into (-pi, pi]
    Complex phi = seed - winding * kTwoPi;
    TofBranch branch = TofBranch::Principal;
    if (std::abs(phi.real()) > 0.5 * kPi) {
        branch = TofBranch::Shifted;
        if (phi.real() <= 0.0) {  // move (-pi, -pi/2] into (pi, 3*pi/2]
            phi += kTwoPi;
            winding -= 1.0;
        }
    }
    Complex target = t - winding * T;
    target -= std::round((target - time_of_flight(orbit, phi, branch)).real() / T) * T;
    for (int it = 0; it < 50; ++it) {
        const Complex resid = time_of_flight(orbit, phi, branch) - target;
        if (std::abs(resid) < 1e-12) return phi + winding * kTwoPi;
        phi -= resid * phi_rate(orbit, phi);  // dt/dphi = 1/phi_rate
    }
    throw KeplerError("phi_of_time: Newton did not converge (bad seed or near a singular time)");
}

}  // namespace melcert
