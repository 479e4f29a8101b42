// Command-line front end: parameter sweeps, figure-data emission, monodromy
// and certificate runs.  All output is deterministic; JSON-lines records are
// emitted in grid order and stamped with a hash of the run configuration.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "melcert/delaunay.hpp"
#include "melcert/melnikov.hpp"
#include "melcert/sweep.hpp"
#include "melcert/variational.hpp"

using nlohmann::json;

namespace {

struct CommonParams {
    double e = 0.5;
    double mu = 0.3;
    double I1 = 1.0;
    int theta_n = 8;
    double delta_rel = 0.05;
    double bigM_rel = 10.0;
    double tol = 1e-10;
    std::string side = "left";
    std::string out = "-";
    int jobs = 1;
};

void add_common(CLI::App* cmd, CommonParams& p, bool with_grid = true) {
    cmd->add_option("--e", p.e, "orbit eccentricity in (0,1)")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9));
    cmd->add_option("--mu", p.mu, "mass ratio in [0,1)")
        ->check(CLI::Range(0.0, 1.0 - 1e-12));
    cmd->add_option("--i1", p.I1, "radial action I1 > 0")
        ->check(CLI::PositiveNumber);
    if (with_grid)
        cmd->add_option("--theta-grid", p.theta_n,
                        "number N of grid angles j*pi/N, j = 0..N-1")
            ->check(CLI::NonNegativeNumber);
    cmd->add_option("--delta", p.delta_rel,
                    "arc radius relative to the singularity height");
    cmd->add_option("--big-m", p.bigM_rel,
                    "loop height relative to the singularity height");
    cmd->add_option("--tol", p.tol, "quadrature tolerance");
    cmd->add_option("--side", p.side, "arc detour side: left or right")
        ->check(CLI::IsMember({"left", "right"}));
    cmd->add_option("--out", p.out, "output file, '-' for stdout");
    cmd->add_option("--jobs", p.jobs,
                    "worker threads: 1 = serial, 0 = all cores");
}

melcert::ContourParams contour_params(const CommonParams& p) {
    melcert::ContourParams cp;
    cp.delta_rel = p.delta_rel;
    cp.bigM_rel = p.bigM_rel;
    cp.tol = p.tol;
    cp.side = (p.side == "right") ? melcert::ArcSide::Right
                                  : melcert::ArcSide::Left;
    return cp;
}

std::vector<double> theta_grid(int n) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        g.push_back(static_cast<double>(j) * melcert::kPi / static_cast<double>(n));
    return g;
}

std::string config_hash(const std::string& command, const CommonParams& p) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%s|e=%.17g|mu=%.17g|i1=%.17g|n=%d|delta=%.17g|bigM=%.17g|"
                  "tol=%.17g|side=%s",
                  command.c_str(), p.e, p.mu, p.I1, p.theta_n, p.delta_rel,
                  p.bigM_rel, p.tol, p.side.c_str());
    char hex[24];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(melcert::sweep::fnv1a(buf)));
    return hex;
}

// Output sink: stdout or a file.
class Sink {
  public:
    explicit Sink(const std::string& path) {
        if (path != "-") {
            file_.open(path);
            if (!file_) throw std::runtime_error("cannot open output file: " + path);
        }
    }
    std::ostream& out() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

json params_json(const CommonParams& p, const char* theta_key, double theta) {
    return json{{"e", p.e},       {"mu", p.mu},
                {"I1", p.I1},     {theta_key, theta},
                {"delta", p.delta_rel}, {"bigM", p.bigM_rel},
                {"tol", p.tol},   {"side", p.side}};
}

int run_melnikov(const CommonParams& p, bool spatial) {
    const std::string cmd = spatial ? "melnikov-spatial" : "melnikov";
    const std::string hash = config_hash(cmd, p);
    const std::vector<double> grid = theta_grid(p.theta_n);
    const melcert::ContourParams cp = contour_params(p);
    const auto backend = (p.jobs == 1) ? melcert::sweep::Backend::Serial
                                       : melcert::sweep::Backend::OpenMP;
    Sink sink(p.out);
    int failures = 0;
    std::vector<melcert::MelnikovResult> results;
    try {
        results = spatial
                      ? melcert::sweep::run_theta_sweep_spatial(
                            p.e, p.mu, p.I1, grid, cp, backend, p.jobs)
                      : melcert::sweep::run_theta_sweep(p.e, p.mu, p.I1, grid,
                                                        cp, backend, p.jobs);
    } catch (const std::exception& ex) {
        json rec{{"config", hash}, {"error", ex.what()}};
        sink.out() << rec.dump() << '\n';
        return 1;
    }
    const char* key = spatial ? "theta3" : "theta2";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const melcert::MelnikovResult& r = results[i];
        json rec{{"config", hash},
                 {"params", params_json(p, key, grid[i])},
                 {"value", {r.value[0].real(), r.value[0].imag()}},
                 {"abs", r.abs_value()},
                 {"error", r.error_estimate},
                 {"margin", r.margin},
                 {"verdict", r.nonzero_verdict ? "nonzero" : "inconclusive"}};
        sink.out() << rec.dump() << '\n';
    }
    return failures == 0 ? 0 : 1;
}

int run_monodromy(const CommonParams& p, bool spatial) {
    const std::string cmd = spatial ? "monodromy-spatial" : "monodromy";
    const std::string hash = config_hash(cmd, p);
    const std::vector<double> grid = theta_grid(p.theta_n);
    const melcert::ContourParams cp = contour_params(p);
    Sink sink(p.out);

    const melcert::GenericSystem sys = spatial
                                           ? melcert::make_crtbp_spatial(p.mu)
                                           : melcert::make_crtbp_planar(p.mu);
    const melcert::VectorXd I =
        spatial ? melcert::crtbp_spatial_actions(p.mu, p.I1, p.e)
                : melcert::crtbp_planar_actions(p.mu, p.I1, p.e);
    int failures = 0;
    for (double th : grid) {
        json rec{{"config", hash}, {"params", params_json(p, spatial ? "theta3" : "theta2", th)}};
        try {
            const melcert::ResonanceData res =
                melcert::make_resonance_data(sys, I, 3);
            const melcert::KeplerOrbit orbit =
                melcert::KeplerOrbit::from_actions(p.mu, I[0], I[1]);
            const melcert::ContourPath gamma = melcert::standard_gamma(orbit, cp);
            std::vector<double> theta =
                spatial ? std::vector<double>{0.0, 0.0, th}
                        : std::vector<double>{0.0, th};
            const melcert::UnipotentElement mg =
                melcert::monodromy_gamma(sys, res, theta, gamma, p.tol);
            const melcert::UnipotentElement mp =
                melcert::monodromy_period(sys, res, theta, p.tol);
            rec["gamma"] = json::parse(mg.to_json());
            rec["period"] = json::parse(mp.to_json());
        } catch (const std::exception& ex) {
            rec["error"] = ex.what();
            ++failures;
        }
        sink.out() << rec.dump() << '\n';
    }
    return failures == 0 ? 0 : 1;
}

int run_certify(const CommonParams& p, bool spatial) {
    const std::string cmd = spatial ? "certify-spatial" : "certify";
    const std::string hash = config_hash(cmd, p);
    const std::vector<double> grid = theta_grid(p.theta_n);
    const melcert::ContourParams cp = contour_params(p);
    Sink sink(p.out);

    const melcert::GenericSystem sys = spatial
                                           ? melcert::make_crtbp_spatial(p.mu)
                                           : melcert::make_crtbp_planar(p.mu);
    const melcert::VectorXd I =
        spatial ? melcert::crtbp_spatial_actions(p.mu, p.I1, p.e)
                : melcert::crtbp_planar_actions(p.mu, p.I1, p.e);
    int failures = 0;
    for (double th : grid) {
        json rec{{"config", hash}};
        try {
            const melcert::ResonanceData res =
                melcert::make_resonance_data(sys, I, 3);
            const melcert::KeplerOrbit orbit =
                melcert::KeplerOrbit::from_actions(p.mu, I[0], I[1]);
            const melcert::ContourPath gamma = melcert::standard_gamma(orbit, cp);
            std::vector<double> theta =
                spatial ? std::vector<double>{0.0, 0.0, th}
                        : std::vector<double>{0.0, th};
            const melcert::Certificate cert =
                melcert::certify_nonintegrability(sys, res, theta, gamma, p.tol);
            rec["certificate"] = json::parse(cert.to_json());
        } catch (const std::exception& ex) {
            rec["error"] = ex.what();
            ++failures;
        }
        sink.out() << rec.dump() << '\n';
    }
    return failures == 0 ? 0 : 1;
}

int run_k1_curve(double e_min, double e_max, int n, const std::string& out) {
    if (!(e_min > 0.0 && e_min < e_max && e_max < 1.0))
        throw CLI::ValidationError("k1-curve requires 0 < e-min < e-max < 1");
    Sink sink(out);
    sink.out() << "e,K1\n";
    char buf[80];
    for (int j = 0; j < n; ++j) {
        const double e =
            (n == 1) ? e_min
                     : e_min + (e_max - e_min) * static_cast<double>(j) /
                                   static_cast<double>(n - 1);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", e, melcert::k1_of_e(e));
        sink.out() << buf;
    }
    return 0;
}

int run_gamma_dump(const CommonParams& p) {
    const melcert::ContourParams cp = contour_params(p);
    const melcert::KeplerOrbit orbit = melcert::KeplerOrbit::from_actions(
        p.mu, p.I1,
        p.I1 * std::cbrt(1.0 - p.mu) * std::sqrt(1.0 - p.e * p.e));
    const melcert::ContourPath path = melcert::standard_gamma(orbit, cp);
    Sink sink(p.out);
    json rec = json::parse(path.to_json());
    rec["config"] = config_hash("gamma-dump", p);
    rec["closed"] = path.closed();
    rec["total_length"] = path.total_length();
    sink.out() << rec.dump() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "melcert: Melnikov integrals, monodromy matrices and "
        "nonintegrability certificates for the restricted three-body problem"};
    app.require_subcommand(1);

    // k1-curve
    double e_min = 0.05, e_max = 0.95;
    int curve_n = 200;
    std::string curve_out = "-";
    CLI::App* k1 = app.add_subcommand(
        "k1-curve", "CSV of the singularity-height constant K1 against e");
    k1->add_option("--e-min", e_min, "smallest eccentricity");
    k1->add_option("--e-max", e_max, "largest eccentricity");
    k1->add_option("--n", curve_n, "number of rows")->check(CLI::PositiveNumber);
    k1->add_option("--out", curve_out, "output file, '-' for stdout");

    CommonParams mp, sp, mo, ce, gd;
    CLI::App* mel = app.add_subcommand(
        "melnikov", "planar Melnikov values over a theta2 grid (JSON lines)");
    add_common(mel, mp);
    CLI::App* mels = app.add_subcommand(
        "melnikov-spatial",
        "spatial (equatorial-family) Melnikov values over a theta3 grid");
    add_common(mels, sp);
    CLI::App* mono = app.add_subcommand(
        "monodromy", "loop and period monodromy elements over a theta grid");
    add_common(mono, mo);
    bool mono_spatial = false;
    mono->add_flag("--spatial", mono_spatial, "use the spatial registration");
    CLI::App* cert = app.add_subcommand(
        "certify", "nonintegrability certificates over a theta grid");
    add_common(cert, ce);
    bool cert_spatial = false;
    cert->add_flag("--spatial", cert_spatial, "use the spatial registration");
    CLI::App* gamma = app.add_subcommand(
        "gamma-dump", "emit the standard loop geometry as JSON");
    add_common(gamma, gd, /*with_grid=*/false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (k1->parsed()) return run_k1_curve(e_min, e_max, curve_n, curve_out);
        if (mel->parsed()) return run_melnikov(mp, false);
        if (mels->parsed()) return run_melnikov(sp, true);
        if (mono->parsed()) return run_monodromy(mo, mono_spatial);
        if (cert->parsed()) return run_certify(ce, cert_spatial);
        if (gamma->parsed()) return run_gamma_dump(gd);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return 0;
}
