// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "oracles.hpp"

#include "subspace_qsl/subspace_qsl.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace subspace_qsl;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what)
    {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

struct Criterion {
    int id;
    const char* name;
    double time_limit; // seconds, 0 = none
    std::function<Outcome()> body;
};

std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

struct Instance {
    HermitianOperator h;
    Frame f;
};

/// n in [2, n_max], k in [1, min(k_max, n)].
Instance random_instance(std::uint64_t seed, Index n_max, Index k_max)
{
    SplitMix64 g(seed);
    const Index n = 2 + static_cast<Index>(g.next() % static_cast<std::uint64_t>(n_max - 1));
    const Index k = 1 + static_cast<Index>(g.next() % static_cast<std::uint64_t>(std::min(k_max, n)));
    return {random_hermitian(n, derive_seed(seed, 0)), random_frame(n, k, derive_seed(seed, 1))};
}

Frame two_level_frame() { return *make_two_level(0.0, 1.0).frame; }
HermitianOperator two_level_h() { return make_two_level(0.0, 1.0).hamiltonian; }

double commutator_norm_oracle(const Matrix& h, const Matrix& f)
{
    const Matrix p = f * f.adjoint();
    return Eigen::JacobiSVD<Matrix>(p * h - h * p).singularValues()(0);
}

Outcome two_level_tightness()
{
    Outcome o;
    const auto h = two_level_h();
    const auto f = two_level_frame();
    const double v = off_diagonal_speed(h, f);
    const double de = subspace_dispersion(h, f).value;
    const double hw = spectral_halfwidth_bound(h);
    o.require(std::abs(v - 0.5) <= 1e-10, "V = " + fmt(v));
    o.require(std::abs(de - 0.5) <= 1e-10, "dE = " + fmt(de));
    o.require(std::abs(hw - 0.5) <= 1e-10, "halfwidth = " + fmt(hw));

    const auto cross = first_crossing_time(h, f, pi / 2, 10.0, 1e-9);
    o.require(cross.attained, "T_pi/2 not attained");
    if (cross.attained) {
        o.require(std::abs(*cross.t_theta - pi) <= 1e-9, "T_pi/2 = " + fmt(*cross.t_theta));
        o.require(std::abs(*cross.t_theta * v - pi / 2) <= 1e-9, "T V - pi/2 = " + fmt(*cross.t_theta * v - pi / 2));
    }

    const auto tr = angle_trajectory(h, f, 2 * pi, 1000, v, de);
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        worst = std::max(worst, std::abs(tr.theta[i] - oracle::two_level_angle(tr.times[i])));
    o.require(worst <= 1e-9, "trajectory error " + fmt(worst));
    return o;
}

Outcome state_sharpness()
{
    Outcome o;
    const auto h = two_level_h();
    const auto psi = StateVector::from_vector(two_level_frame().columns().col(0));
    const double mt = mandelshtam_tamm_bound(h, psi);
    const double ml = margolus_levitin_bound(h, psi);
    const auto cross = first_crossing_time(h, psi.as_frame(), pi / 2, 10.0, 1e-10);
    o.require(cross.attained, "state T_perp not attained");
    if (!cross.attained)
        return o;
    const double t = *cross.t_theta;
    // Cross-check the measured time against the exact overlap.
    const Vector psi_t = oracle::pade_propagator(h.matrix(), t) * psi.entries();
    o.require(std::abs(psi.entries().dot(psi_t)) <= 1e-9, "overlap at T_perp " + fmt(std::abs(psi.entries().dot(psi_t))));
    o.require(std::abs(mt - pi) <= 1e-9, "MT = " + fmt(mt));
    o.require(std::abs(ml - pi) <= 1e-9, "ML = " + fmt(ml));
    o.require(std::abs(t - mt) <= 1e-9, "T_perp - MT = " + fmt(t - mt));
    o.require(std::abs(t - ml) <= 1e-9, "T_perp - ML = " + fmt(t - ml));
    return o;
}

Outcome subspace_speed_bound()
{
    Outcome o;
    long violations = 0;
    double worst_oracle = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto [h, f] = random_instance(derive_seed(3, s), 8, 4);
        const double v = off_diagonal_speed(h, f);
        worst_oracle = std::max(worst_oracle, std::abs(v - commutator_norm_oracle(h.matrix(), f.columns())));
        const Matrix p0 = f.columns() * f.columns().adjoint();
        const double t_end = 10.0 / h.norm();
        for (int i = 0; i < 100; ++i) {
            const double t = t_end * i / 99.0;
            const double theta = maximal_angle(f, evolve_frame(h, f, t));
            if (theta > v * t + 1e-8)
                ++violations;
            if (i % 10 == 0)
                worst_oracle =
                    std::max(worst_oracle, std::abs(std::sin(theta) - oracle::pade_projector_distance(h.matrix(), p0, t)));
        }
    }
    o.require(violations == 0, std::to_string(violations) + " violations");
    o.require(worst_oracle <= 1e-9, "oracle disagreement " + fmt(worst_oracle));
    return o;
}

Outcome rate_chain()
{
    Outcome o;
    double worst = 0.0, worst_full = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto [h, f] = random_instance(derive_seed(3, s), 8, 4);
        const double v = off_diagonal_speed(h, f);
        const double de = subspace_dispersion(h, f).value;
        const double hw = spectral_halfwidth_bound(h);
        worst = std::max({worst, v - de, de - hw});
        const auto full = random_frame(h.dim(), h.dim(), derive_seed(4, s));
        worst_full = std::max(worst_full, std::abs(subspace_dispersion(h, full).value - hw));
    }
    o.require(worst <= 1e-8, "chain violated by " + fmt(worst));
    o.require(worst_full <= 1e-8, "full-space dispersion off by " + fmt(worst_full));
    return o;
}

Outcome dispersion_oracle()
{
    Outcome o;
    std::mt19937_64 rng(5);
    double worst_low = 0.0, worst_high = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto [h, f] = random_instance(derive_seed(5, s), 6, 3);
        const double value = subspace_dispersion(h, f).value;
        const double sampled = std::sqrt(std::max(0.0, oracle::sampled_max_variance(h.matrix(), f.columns(), 100000, rng)));
        worst_low = std::max(worst_low, sampled - value);
        worst_high = std::max(worst_high, value - spectral_halfwidth_bound(h));
    }
    o.require(worst_low <= 1e-9, "sampled max exceeds optimizer by " + fmt(worst_low));
    o.require(worst_high <= 1e-8, "optimizer exceeds halfwidth by " + fmt(worst_high));
    return o;
}

Projector random_projector(Index n, Index rank, std::uint64_t seed)
{
    if (rank == 0)
        return Projector::from_matrix(Matrix::Zero(n, n));
    return projector_from_frame(random_frame(n, rank, seed));
}

Outcome angle_metric()
{
    Outcome o;
    double slack = std::numeric_limits<double>::infinity(), asym = 0.0, self = 0.0;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        SplitMix64 g(derive_seed(6, s));
        const Index n = 1 + static_cast<Index>(g.next() % 8);
        std::vector<Projector> ps;
        for (std::uint64_t i = 0; i < 3; ++i)
            ps.push_back(random_projector(n, static_cast<Index>(g.next() % static_cast<std::uint64_t>(n + 1)),
                                          derive_seed(g.next(), i)));
        const double a12 = maximal_angle(ps[0], ps[1]), a23 = maximal_angle(ps[1], ps[2]);
        slack = std::min(slack, a12 + a23 - maximal_angle(ps[0], ps[2]));
        asym = std::max(asym, std::abs(a12 - maximal_angle(ps[1], ps[0])));
        self = std::max(self, maximal_angle(ps[0], ps[0]));
    }
    o.require(slack >= -1e-10, "triangle slack " + fmt(slack));
    o.require(asym <= 1e-12, "asymmetry " + fmt(asym));
    o.require(self <= 1e-12, "theta(P, P) = " + fmt(self));
    return o;
}

Outcome cauchy_consistency()
{
    Outcome o;
    double lo = 1e300, hi = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        // A proper subspace; P0 = I would commute with H and leave only round-off.
        SplitMix64 g(derive_seed(7, s));
        const Index n = 2 + static_cast<Index>(g.next() % 7);
        const Index k = 1 + static_cast<Index>(g.next() % static_cast<std::uint64_t>(std::min<Index>(4, n - 1)));
        const auto h = random_hermitian(n, derive_seed(g.next(), 0));
        const auto p0 = projector_from_frame(random_frame(n, k, derive_seed(g.next(), 1)));
        const double scale = h.norm();
        const double t = (0.1 + 0.2 * static_cast<double>(s % 5)) / scale;
        const double r1 = projector_derivative_residual(h, p0, t, 1e-3 / scale);
        const double r2 = projector_derivative_residual(h, p0, t, 5e-4 / scale);
        lo = std::min(lo, r1 / r2);
        hi = std::max(hi, r1 / r2);
    }
    o.require(lo >= 3.5 && hi <= 4.5, "ratio range [" + fmt(lo) + ", " + fmt(hi) + "]");
    return o;
}

Outcome state_fleming()
{
    Outcome o;
    long violations = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        SplitMix64 g(derive_seed(8, s));
        const Index n = 2 + static_cast<Index>(g.next() % 7);
        const auto h = random_hermitian(n, derive_seed(g.next(), 0));
        const auto psi = random_state(n, derive_seed(g.next(), 1));
        const double de = std::sqrt(oracle::variance(h.matrix(), psi.entries()));
        const double t_end = 10.0 / h.norm();
        for (int i = 0; i < 100; ++i) {
            const double t = t_end * i / 99.0;
            const Vector psi_t = oracle::pade_propagator(h.matrix(), t) * psi.entries();
            const double angle = oracle::acute_angle(psi.entries(), psi_t);
            if (angle > de * t + 1e-8 || state_angle(psi, evolve_state(h, psi, t)) > state_dispersion(h, psi) * t + 1e-8)
                ++violations;
        }
    }
    o.require(violations == 0, std::to_string(violations) + " violations");
    return o;
}

Outcome brachistochrone()
{
    Outcome o;
    const double tol = kDefaultCrossingTol;
    double worst = std::numeric_limits<double>::infinity();
    long measured = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto [h0, f] = random_instance(derive_seed(9, s), 8, 4);
        const auto h = HermitianOperator::validate(h0.matrix() / h0.spectrum().width());
        const double v = off_diagonal_speed(h, f);
        for (double theta : {pi / 6, pi / 4, pi / 2}) {
            const auto r = first_crossing_time(h, f, theta, default_horizon(h, v), tol);
            if (!r.attained)
                continue;
            ++measured;
            worst = std::min(worst, *r.t_theta - 2.0 * theta);
        }
    }
    o.require(measured > 0, "no crossing attained");
    o.require(worst >= -tol, "T_theta - 2 theta = " + fmt(worst));

    const auto h = two_level_h();
    const auto f = two_level_frame();
    for (double theta : {pi / 6, pi / 4, pi / 2}) {
        const auto r = first_crossing_time(h, f, theta, 10.0, tol);
        o.require(r.attained && std::abs(*r.t_theta - 2.0 * theta) <= 1e-6, "two-level misses 2 theta at " + fmt(theta));
    }
    return o;
}

Outcome min_transition()
{
    Outcome o;
    std::mt19937_64 rng(10);
    double worst_low = 0.0, worst_gap = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        SplitMix64 g(derive_seed(10, s));
        const Index n = 2 + static_cast<Index>(g.next() % 3);
        const Index k1 = 1 + static_cast<Index>(g.next() % 2);
        const Index k2 = 1 + static_cast<Index>(g.next() % static_cast<std::uint64_t>(n - 1));
        const auto f1 = random_frame(n, k1, derive_seed(g.next(), 0));
        const auto p2 = projector_from_frame(random_frame(n, k2, derive_seed(g.next(), 1)));
        const double cos2 = std::pow(std::cos(relative_maximal_angle(projector_from_frame(f1), p2)), 2);
        const double sampled = oracle::sampled_min_transition(f1.columns(), p2.matrix(), 10000, rng);
        worst_low = std::max(worst_low, cos2 - sampled);
        worst_gap = std::max(worst_gap, sampled - cos2);
    }
    o.require(worst_low <= 1e-9, "sampled minimum below cos^2 by " + fmt(worst_low));
    o.require(worst_gap <= 1e-3, "sampled minimum above cos^2 by " + fmt(worst_gap));
    return o;
}

int run_shell(const std::string& cmd)
{
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome determinism()
{
    Outcome o;
    const std::string cli = SUBSPACE_QSL_CLI;
    const std::string dir = TEST_WORK_DIR;
    const std::string base = "'" + cli + "' verify --n-max 6 --k-max 3 --trials 100 --seed 1 --out ";
    const std::vector<std::pair<std::string, std::string>> runs{
        {"", "--threads 1"}, {"", "--threads 1"}, {"", "--threads 4"},
        {"SUBSPACE_QSL_THREADS=1 ", ""}, {"SUBSPACE_QSL_THREADS=4 ", ""}};
    std::vector<std::string> outputs;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const std::string path = dir + "/acceptance_verify_" + std::to_string(i) + ".json";
        const int rc = run_shell(runs[i].first + base + "'" + path + "' " + runs[i].second + " > /dev/null");
        o.require(rc == 0, "verify run " + std::to_string(i) + " exited with " + std::to_string(rc));
        outputs.push_back(slurp(path));
    }
    o.require(!outputs.front().empty(), "empty report");
    for (std::size_t i = 1; i < outputs.size(); ++i)
        o.require(outputs[i] == outputs.front(), "report " + std::to_string(i) + " differs from report 0");
    return o;
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "two-level tightness of the subspace speed bound", 1.0, two_level_tightness},
        {2, "state-level MT and ML sharpness on the two-level state", 0.0, state_sharpness},
        {3, "maximal angle stays below V t on 200 random instances", 30.0, subspace_speed_bound},
        {4, "V <= dE_P0 <= (Emax - Emin) / 2 and full-space equality", 0.0, rate_chain},
        {5, "dispersion optimizer against 1e5-sample brute force", 60.0, dispersion_oracle},
        {6, "maximal angle is a metric on random projector triples", 0.0, angle_metric},
        {7, "second-order decay of the projector derivative residual", 0.0, cauchy_consistency},
        {8, "state-level Fleming bound on 100 random instances", 0.0, state_fleming},
        {9, "measured T_theta >= 2 theta / Omega, attained by two levels", 120.0, brachistochrone},
        {10, "sampled minimum transition probability vs cos^2 phi", 0.0, min_transition},
        {11, "verify output is byte-identical across runs and threads", 0.0, determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.time_limit > 0.0 && secs >= c.time_limit)
            o.require(false, "took " + fmt(secs) + " s, limit " + fmt(c.time_limit) + " s");
        std::printf("%s criterion %2d: %s (%.2f s)%s%s\n", o.ok ? "PASS" : "FAIL", c.id, c.name, secs,
                    o.ok ? "" : " -- ", o.detail.c_str());
        std::fflush(stdout);
        failures += o.ok ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
