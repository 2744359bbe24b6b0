// subspace-qsl: speed limits for the Schroedinger evolution of a subspace.
//
// Exit codes: 0 success, 1 property violation, 2 input validation,
// 3 numerical failure.

#include "subspace_qsl/subspace_qsl.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace qsl = subspace_qsl;

namespace {

constexpr int kExitViolation = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

int exit_code_for(qsl::ErrorKind kind)
{
    switch (kind) {
    case qsl::ErrorKind::EigensolverFailure:
    case qsl::ErrorKind::SvdFailure:
    case qsl::ErrorKind::NumericalInconsistency:
    case qsl::ErrorKind::OptimizerDidNotConverge:
        return kExitNumerical;
    default:
        return kExitValidation;
    }
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw qsl::Error(qsl::ErrorKind::IoError, "cannot open " + path + " for writing");
    out << text;
    if (!out)
        throw qsl::Error(qsl::ErrorKind::IoError, "failed writing " + path);
}

/// JSON to --out when given (table on stdout), otherwise JSON on stdout and
/// table on stderr.
void emit(const nlohmann::json& j, const std::string& table, const std::string& out_path)
{
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
        std::cerr << table;
    } else {
        write_text(out_path, text);
        std::cout << table;
    }
}

std::string time_cell(const std::optional<double>& t)
{
    if (!t)
        return "never";
    std::ostringstream os;
    os << std::setprecision(10) << *t;
    return os.str();
}

int cmd_bounds(const std::string& config_path, std::vector<double> thetas, const std::string& out, bool degrees)
{
    const auto cfg = qsl::load_config(config_path);
    if (thetas.empty())
        thetas.push_back(std::numbers::pi / 2);
    const auto report = qsl::bounds_report(cfg.hamiltonian, cfg.subspace(), thetas, cfg.tolerances.optimizer);

    auto j = qsl::bounds_report_to_json(report, degrees);
    j["label"] = cfg.label;
    std::ostringstream table;
    table << std::setprecision(10);
    table << "label                " << cfg.label << "\n"
          << "V (off-diagonal)     " << report.v_speed << "\n"
          << "dE_P0 (dispersion)   " << report.subspace_dispersion
          << (report.dispersion_converged ? "" : "  (optimizer not converged)") << "\n"
          << "(Emax - Emin) / 2    " << report.spectral_halfwidth << "\n"
          << "Omega                " << report.omega << "\n";
    table << "theta            theta/V          theta/dE_P0      2theta/Omega\n";
    for (const auto& tb : report.per_theta)
        table << std::left << std::setw(17) << qsl::display_angle(tb.theta, degrees) << std::setw(17)
              << time_cell(tb.t_bound_v) << std::setw(17) << time_cell(tb.t_bound_dispersion)
              << time_cell(tb.t_brachistochrone) << "\n";

    if (cfg.state) {
        const auto& h = cfg.hamiltonian;
        const auto& psi = *cfg.state;
        nlohmann::json st;
        st["dispersion"] = qsl::state_dispersion(h, psi);
        st["mean_excess_energy"] = qsl::mean_excess_energy(h, psi);
        auto guarded = [](auto&& f) -> nlohmann::json {
            try {
                return f();
            } catch (const qsl::Error& e) {
                if (e.kind() == qsl::ErrorKind::ZeroDispersion || e.kind() == qsl::ErrorKind::ZeroMeanExcess)
                    return "never";
                throw;
            }
        };
        st["mandelshtam_tamm"] = guarded([&] { return qsl::mandelshtam_tamm_bound(h, psi); });
        st["margolus_levitin"] = guarded([&] { return qsl::margolus_levitin_bound(h, psi); });
        auto fl = nlohmann::json::array();
        for (double theta : thetas)
            fl.push_back({{"theta", qsl::display_angle(theta, degrees)},
                          {"fleming", guarded([&] { return qsl::fleming_bound(h, psi, theta); })}});
        st["fleming"] = std::move(fl);
        j["state"] = std::move(st);
    }
    emit(j, table.str(), out);
    return 0;
}

int cmd_evolve(const std::string& config_path, double t_max, int points, const std::string& out)
{
    const auto cfg = qsl::load_config(config_path);
    const auto f = cfg.subspace();
    const double v = qsl::off_diagonal_speed(cfg.hamiltonian, f);
    const double de = qsl::subspace_dispersion(cfg.hamiltonian, f, cfg.tolerances.optimizer).value;
    const auto tr = qsl::angle_trajectory(cfg.hamiltonian, f, t_max, points, v, de);
    std::ostringstream csv;
    qsl::write_trajectory_csv(csv, tr);
    if (out.empty())
        std::cout << csv.str();
    else
        write_text(out, csv.str());
    return 0;
}

int cmd_t_theta(const std::string& config_path, const std::vector<double>& thetas, std::optional<double> horizon,
                std::optional<double> tol, const std::string& out, bool degrees)
{
    if (thetas.size() != 1)
        throw qsl::Error(qsl::ErrorKind::InvalidArgument, "t-theta takes exactly one --theta");
    const auto cfg = qsl::load_config(config_path);
    const auto f = cfg.subspace();
    const double v = qsl::off_diagonal_speed(cfg.hamiltonian, f);
    const double hz = horizon ? *horizon : qsl::default_horizon(cfg.hamiltonian, v);
    const double ct = tol ? *tol : cfg.tolerances.crossing_tol;
    const auto r = qsl::first_crossing_time(cfg.hamiltonian, f, thetas.front(), hz, ct);

    auto j = qsl::crossing_to_json(r, degrees);
    j["label"] = cfg.label;
    j["crossing_tol"] = ct;
    j["v_speed"] = v;
    std::ostringstream table;
    table << std::setprecision(12) << "theta " << qsl::display_angle(r.theta_target, degrees) << ": "
          << (r.attained ? "T_theta = " + time_cell(r.t_theta) : std::string("not reached before horizon")) << "\n";
    emit(j, table.str(), out);
    return 0;
}

int cmd_example(double e1, double e2, const std::string& out)
{
    const auto cfg = qsl::make_two_level(e1, e2);
    const std::string text = qsl::config_to_json(cfg).dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else
        write_text(out, text);
    return 0;
}

int cmd_verify(const qsl::VerifySettings& s, const std::string& out)
{
    const auto report = qsl::run_verification(s);
    const auto j = qsl::verify_report_to_json(report);
    const std::string text = j.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
        for (std::size_t p = 0; p < report.tallies.size(); ++p) {
            const auto& t = report.tallies[p];
            std::cout << std::left << std::setw(36) << qsl::kPropertyNames[p] << (t.failures ? "FAIL " : "ok   ")
                      << t.checks << " checks, " << t.skipped << " skipped\n";
        }
    }
    return report.all_passed() ? 0 : kExitViolation;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Quantum speed limits for the evolution of a subspace"};
    app.require_subcommand(1);

    std::string config, out;
    std::vector<double> thetas;
    bool degrees = false;

    auto* bounds = app.add_subcommand("bounds", "Evaluate every speed-limit quantity for an instance");
    bounds->add_option("--config", config, "Instance config (JSON)")->required();
    bounds->add_option("--theta", thetas, "Target angle in radians (repeatable)");
    bounds->add_option("--out", out, "Write the JSON report here");
    bounds->add_flag("--degrees", degrees, "Display angles in degrees");

    double t_max = 0.0;
    int points = 0;
    auto* evolve = app.add_subcommand("evolve", "Sample theta(P0, P(t)) on a uniform grid as CSV");
    evolve->add_option("--config", config, "Instance config (JSON)")->required();
    evolve->add_option("--t-max", t_max, "End of the time grid")->required();
    evolve->add_option("--points", points, "Number of grid points (>= 2)")->required();
    evolve->add_option("--out", out, "CSV output path (default stdout)");

    std::optional<double> horizon, tol;
    auto* tth = app.add_subcommand("t-theta", "First time the maximal angle reaches theta");
    tth->add_option("--config", config, "Instance config (JSON)")->required();
    tth->add_option("--theta", thetas, "Target angle in radians")->required();
    tth->add_option("--horizon", horizon, "Search window end");
    tth->add_option("--tol", tol, "Crossing tolerance");
    tth->add_option("--out", out, "Write the JSON result here");
    tth->add_flag("--degrees", degrees, "Display angles in degrees");

    double e1 = 0.0, e2 = 1.0;
    auto* example = app.add_subcommand("example", "Emit the two-level instance config");
    example->add_option("--e1", e1, "First level energy")->capture_default_str();
    example->add_option("--e2", e2, "Second level energy")->capture_default_str();
    example->add_option("--out", out, "Config output path (default stdout)");

    qsl::VerifySettings vs;
    auto* verify = app.add_subcommand("verify", "Check every inequality on seeded random instances");
    verify->add_option("--n-max", vs.n_max, "Largest Hilbert-space dimension")->capture_default_str();
    verify->add_option("--k-max", vs.k_max, "Largest subspace dimension")->capture_default_str();
    verify->add_option("--trials", vs.trials, "Number of random instances")->capture_default_str();
    verify->add_option("--seed", vs.seed, "Master seed")->capture_default_str();
    verify->add_option("--tol", vs.crossing_tol, "Crossing tolerance")->capture_default_str();
    verify->add_option("--threads", vs.threads, "Worker threads (0: SUBSPACE_QSL_THREADS or all cores)");
    verify->add_option("--out", out, "Report path");
    verify->add_flag("--corrupt-hamiltonian", vs.corrupt_hamiltonian)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*bounds)
            return cmd_bounds(config, thetas, out, degrees);
        if (*evolve)
            return cmd_evolve(config, t_max, points, out);
        if (*tth)
            return cmd_t_theta(config, thetas, horizon, tol, out, degrees);
        if (*example)
            return cmd_example(e1, e2, out);
        if (*verify)
            return cmd_verify(vs, out);
    } catch (const qsl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    }
    return kExitValidation;
}
