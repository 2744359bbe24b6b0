#pragma once

// Randomized verification of every speed-limit inequality and metric axiom on
// seeded instances. Each trial draws its own sub-seed from the master seed by
// trial index, so the report does not depend on how trials are scheduled.

#include "subspace_qsl/bounds.hpp"
#include "subspace_qsl/config.hpp"
#include "subspace_qsl/dynamics.hpp"
#include "subspace_qsl/geometry.hpp"
#include "subspace_qsl/operators.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace subspace_qsl {

struct VerifySettings {
    int n_max = 6;
    int k_max = 3;
    int trials = 100;
    std::uint64_t seed = 1;
    unsigned threads = 0; // 0: SUBSPACE_QSL_THREADS, else hardware concurrency
    double crossing_tol = kDefaultCrossingTol;
    bool corrupt_hamiltonian = false; // test hook: inject a non-Hermitian H in trial 0
};

enum class Property : std::size_t {
    SubspaceSpeedBound,
    SpeedLeDispersion,
    DispersionLeHalfwidth,
    CrossingGeThetaOverV,
    CrossingGeThetaOverDispersion,
    CrossingGeBrachistochrone,
    FlemingState,
    MandelshtamTammState,
    MargolusLevitinState,
    AngleSymmetry,
    AngleIdentity,
    AngleTriangle,
    DistanceTriangle,
    Count
};

inline constexpr std::array<const char*, static_cast<std::size_t>(Property::Count)> kPropertyNames{
    "subspace_speed_bound",
    "speed_le_dispersion",
    "dispersion_le_halfwidth",
    "crossing_ge_theta_over_v",
    "crossing_ge_theta_over_dispersion",
    "crossing_ge_brachistochrone",
    "fleming_state",
    "mandelshtam_tamm_state",
    "margolus_levitin_state",
    "maximal_angle_symmetry",
    "maximal_angle_identity",
    "maximal_angle_triangle",
    "distance_triangle",
};

struct PropertyTally {
    long checks = 0;
    long failures = 0;
    long skipped = 0;
    double worst_margin = std::numeric_limits<double>::infinity(); // min of rhs - lhs
    int worst_trial = -1;
};

struct Violation {
    Property property;
    int trial;
    std::uint64_t trial_seed;
    double margin;
    nlohmann::json instance;
};

struct VerifyReport {
    VerifySettings settings;
    std::vector<PropertyTally> tallies;
    std::vector<Violation> violations;

    bool all_passed() const { return violations.empty(); }
};

namespace detail {

struct TrialOutcome {
    std::array<PropertyTally, static_cast<std::size_t>(Property::Count)> tallies{};
    std::vector<Violation> violations;
};

class TrialChecker {
public:
    TrialChecker(TrialOutcome& out, int trial, std::uint64_t seed) : out_(out), trial_(trial), seed_(seed) {}

    void set_instance(nlohmann::json instance) { instance_ = std::move(instance); }

    /// Records lhs <= rhs + tol.
    void check(Property p, double lhs, double rhs, double tol)
    {
        auto& t = out_.tallies[static_cast<std::size_t>(p)];
        const double margin = rhs - lhs;
        ++t.checks;
        if (margin < t.worst_margin) {
            t.worst_margin = margin;
            t.worst_trial = trial_;
        }
        if (!(margin >= -tol)) {
            ++t.failures;
            out_.violations.push_back({p, trial_, seed_, margin, instance_});
        }
    }

    void skip(Property p) { ++out_.tallies[static_cast<std::size_t>(p)].skipped; }

private:
    TrialOutcome& out_;
    int trial_;
    std::uint64_t seed_;
    nlohmann::json instance_;
};

inline Matrix random_projector_matrix(Index n, Index rank, std::uint64_t seed)
{
    if (rank == 0)
        return Matrix::Zero(n, n);
    const Frame f = random_frame(n, rank, seed);
    return f.columns() * f.columns().adjoint();
}

inline TrialOutcome run_trial(const VerifySettings& s, int trial)
{
    TrialOutcome out;
    const std::uint64_t tseed = derive_seed(s.seed, static_cast<std::uint64_t>(trial));
    TrialChecker check(out, trial, tseed);
    SplitMix64 gen(tseed);
    const Index n = 2 + static_cast<Index>(gen.next() % static_cast<std::uint64_t>(std::max(s.n_max - 1, 1)));
    const Index k = 1 + static_cast<Index>(gen.next() % static_cast<std::uint64_t>(std::min<Index>(s.k_max, n)));

    Matrix hm = random_hermitian(n, derive_seed(tseed, 1)).matrix();
    if (s.corrupt_hamiltonian && trial == 0)
        hm(0, 1) += cplx(1.0, 0.0);
    HermitianOperator h = [&] {
        try {
            return HermitianOperator::validate(hm);
        } catch (const Error& e) {
            throw Error(ErrorKind::ValidationError, "trial " + std::to_string(trial) + ": " + e.what(), e.value());
        }
    }();
    const Frame f = random_frame(n, k, derive_seed(tseed, 2));
    const StateVector psi = random_state(n, derive_seed(tseed, 3));
    check.set_instance({{"trial", trial},
                        {"trial_seed", tseed},
                        {"hamiltonian", matrix_to_json(h.matrix())},
                        {"frame", matrix_to_json(f.columns())},
                        {"state", vector_to_json(psi.entries())}});

    // Speed bound along the path and the rate chain.
    const double v = off_diagonal_speed(h, f);
    const auto disp = subspace_dispersion(h, f);
    const double halfwidth = spectral_halfwidth_bound(h);
    const double t_end = 10.0 / h.norm();
    for (int i = 0; i < 100; ++i) {
        const double t = t_end * i / 99.0;
        check.check(Property::SubspaceSpeedBound, maximal_angle(f, evolve_frame(h, f, t)),
                    subspace_angle_bound(v, t), 1e-8);
    }
    check.check(Property::SpeedLeDispersion, v, disp.value, 1e-8);
    check.check(Property::DispersionLeHalfwidth, disp.value, halfwidth, 1e-8);

    // First-crossing times for H rescaled to unit spectral width.
    const double omega = h.spectrum().width();
    const HermitianOperator hn = HermitianOperator::validate(h.matrix() / omega);
    const double vn = v / omega;
    const double dn = disp.value / omega;
    const double horizon = default_horizon(hn, vn);
    for (double theta : {std::numbers::pi / 6, std::numbers::pi / 4, std::numbers::pi / 2}) {
        const auto cr = first_crossing_time(hn, f, theta, horizon, s.crossing_tol);
        if (!cr.attained) {
            check.skip(Property::CrossingGeThetaOverV);
            check.skip(Property::CrossingGeThetaOverDispersion);
            check.skip(Property::CrossingGeBrachistochrone);
            continue;
        }
        check.check(Property::CrossingGeThetaOverV, subspace_time_bound_v(vn, theta), *cr.t_theta, s.crossing_tol);
        check.check(Property::CrossingGeThetaOverDispersion, subspace_time_bound_dispersion(dn, theta), *cr.t_theta,
                    s.crossing_tol);
        check.check(Property::CrossingGeBrachistochrone, brachistochrone_time(theta, 1.0), *cr.t_theta,
                    s.crossing_tol);
    }

    // State-level bounds.
    const double de = state_dispersion(h, psi);
    for (int i = 0; i < 100; ++i) {
        const double t = t_end * i / 99.0;
        check.check(Property::FlemingState, state_angle(psi, evolve_state(h, psi, t)), de * t, 1e-8);
    }
    // A generic state never becomes exactly orthogonal to itself, so the
    // orthogonalization bounds use an equal-weight superposition of two
    // eigenvectors, which is orthogonalized at pi / |E_i - E_j|.
    const auto& spec = h.spectrum();
    const auto i = static_cast<Index>(gen.next() % static_cast<std::uint64_t>(n));
    const auto j = (i + 1 + static_cast<Index>(gen.next() % static_cast<std::uint64_t>(n - 1))) % n;
    const double phase = 2.0 * std::numbers::pi * gen.uniform();
    const StateVector pair = StateVector::normalized(spec.eigenvectors.col(i) +
                                                     std::polar(1.0, phase) * spec.eigenvectors.col(j));
    const double pair_de = state_dispersion(h, pair);
    const auto cross_perp = pair_de > detail::degenerate_level(h)
                                ? first_crossing_time(h, pair.as_frame(), std::numbers::pi / 2,
                                                      default_horizon(h, pair_de), s.crossing_tol)
                                : CrossingResult{false, std::nullopt, std::numbers::pi / 2, 0.0, 0.0, 0};
    if (cross_perp.attained) {
        check.check(Property::MandelshtamTammState, mandelshtam_tamm_bound(h, pair), *cross_perp.t_theta,
                    s.crossing_tol);
        check.check(Property::MargolusLevitinState, margolus_levitin_bound(h, pair), *cross_perp.t_theta,
                    s.crossing_tol);
    } else {
        check.skip(Property::MandelshtamTammState);
        check.skip(Property::MargolusLevitinState);
    }

    // Metric axioms on a triple of projectors of mixed ranks (0..n).
    std::array<Projector, 3> ps{Projector::from_matrix(Matrix::Zero(n, n)), Projector::from_matrix(Matrix::Zero(n, n)),
                                Projector::from_matrix(Matrix::Zero(n, n))};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto rank = static_cast<Index>(gen.next() % static_cast<std::uint64_t>(n + 1));
        ps[i] = Projector::from_matrix(random_projector_matrix(n, rank, derive_seed(tseed, 10 + i)));
    }
    const double a12 = maximal_angle(ps[0], ps[1]);
    const double a21 = maximal_angle(ps[1], ps[0]);
    const double a23 = maximal_angle(ps[1], ps[2]);
    const double a13 = maximal_angle(ps[0], ps[2]);
    check.check(Property::AngleSymmetry, std::abs(a12 - a21), 0.0, 1e-12);
    check.check(Property::AngleIdentity, maximal_angle(ps[0], ps[0]), 0.0, 1e-12);
    check.check(Property::AngleTriangle, a13, a12 + a23, 1e-10);
    check.check(Property::DistanceTriangle, projector_distance(ps[0], ps[2]),
                projector_distance(ps[0], ps[1]) + projector_distance(ps[1], ps[2]), 1e-10);
    return out;
}

inline unsigned resolve_threads(unsigned requested)
{
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("SUBSPACE_QSL_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0)
            return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace detail

inline VerifyReport run_verification(const VerifySettings& s)
{
    if (s.trials < 1)
        throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
    if (s.n_max < 2 || s.k_max < 1)
        throw Error(ErrorKind::InvalidArgument, "need n_max >= 2 and k_max >= 1");

    const auto trials = static_cast<std::size_t>(s.trials);
    std::vector<detail::TrialOutcome> outcomes(trials);
    std::vector<std::exception_ptr> errors(trials);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < trials; i = next++) {
            try {
                outcomes[i] = detail::run_trial(s, static_cast<int>(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n_threads = std::min<unsigned>(detail::resolve_threads(s.threads), static_cast<unsigned>(trials));
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < n_threads; ++i)
        pool.emplace_back(worker);
    worker();
    pool.clear();

    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    VerifyReport report{s, std::vector<PropertyTally>(static_cast<std::size_t>(Property::Count)), {}};
    for (const auto& o : outcomes) {
        for (std::size_t p = 0; p < o.tallies.size(); ++p) {
            auto& acc = report.tallies[p];
            const auto& t = o.tallies[p];
            acc.checks += t.checks;
            acc.failures += t.failures;
            acc.skipped += t.skipped;
            if (t.worst_margin < acc.worst_margin) {
                acc.worst_margin = t.worst_margin;
                acc.worst_trial = t.worst_trial;
            }
        }
        report.violations.insert(report.violations.end(), o.violations.begin(), o.violations.end());
    }
    return report;
}

/// Thread count is deliberately left out so that reports compare byte for byte.
inline nlohmann::json verify_report_to_json(const VerifyReport& r)
{
    nlohmann::json j;
    j["settings"] = {{"n_max", r.settings.n_max},
                     {"k_max", r.settings.k_max},
                     {"trials", r.settings.trials},
                     {"seed", r.settings.seed},
                     {"crossing_tol", r.settings.crossing_tol}};
    nlohmann::json props = nlohmann::json::object();
    for (std::size_t p = 0; p < r.tallies.size(); ++p) {
        const auto& t = r.tallies[p];
        nlohmann::json entry{{"checks", t.checks}, {"failures", t.failures}, {"skipped", t.skipped}};
        if (t.checks > 0) {
            entry["worst_margin"] = t.worst_margin;
            entry["worst_trial"] = t.worst_trial;
            entry["worst_trial_seed"] = derive_seed(r.settings.seed, static_cast<std::uint64_t>(t.worst_trial));
        } else {
            entry["worst_margin"] = nullptr;
        }
        props[kPropertyNames[p]] = std::move(entry);
    }
    j["properties"] = std::move(props);
    auto viol = nlohmann::json::array();
    for (const auto& v : r.violations)
        viol.push_back({{"property", kPropertyNames[static_cast<std::size_t>(v.property)]},
                        {"trial", v.trial},
                        {"trial_seed", v.trial_seed},
                        {"margin", v.margin},
                        {"instance", v.instance}});
    j["violations"] = std::move(viol);
    j["all_passed"] = r.all_passed();
    return j;
}

} // namespace subspace_qsl
