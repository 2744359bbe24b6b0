#pragma once

// Speed-limit quantities for a Hamiltonian H and an initial subspace P0.
//
//   V      = ||P0 H P0_perp||                      off-diagonal speed
//   dE(psi) = (<H^2 psi,psi> - <H psi,psi>^2)^1/2  state dispersion
//   dE_P0  = sup over unit psi in P0 of dE(psi)     subspace dispersion
//   Omega  = E_max - E_min
//
// with 0 <= V <= dE_P0 <= Omega / 2 and the first-crossing time bounded by
// T_theta >= theta / V >= theta / dE_P0 >= 2 theta / Omega.

#include "subspace_qsl/geometry.hpp"
#include "subspace_qsl/operators.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

namespace subspace_qsl {

/// Relative level below which V, dE or delta-E are treated as exactly zero.
inline constexpr double kDegenerateRel = 1e-14;

/// Consistency slack for the identities ||P0 H P0_perp|| = ||P0_perp H P0|| = ||[P0, H]||.
inline constexpr double kIdentityTol = 1e-10;

namespace detail {

inline double degenerate_level(const HermitianOperator& h) { return kDegenerateRel * std::max(1.0, h.norm()); }

inline void require_theta(double theta)
{
    if (!(theta > 0.0 && theta <= std::numbers::pi / 2))
        throw Error(ErrorKind::InvalidTheta, "theta must lie in (0, pi/2], got " + fmt_double(theta), theta);
}

} // namespace detail

inline double off_diagonal_speed(const HermitianOperator& h, const Projector& p0)
{
    detail::require_same_dim(h.dim(), p0.dim(), "off_diagonal_speed");
    const Matrix& p = p0.matrix();
    const Matrix& hm = h.matrix();
    const Matrix q = Matrix::Identity(p.rows(), p.cols()) - p;
    const double upper = operator_norm(p * hm * q);
    const double lower = operator_norm(q * hm * p);
    const double comm = operator_norm(commutator(p, hm));
    const double slack = kIdentityTol * std::max(1.0, h.norm());
    if (std::abs(upper - lower) > slack || std::abs(upper - comm) > slack)
        throw Error(ErrorKind::NumericalInconsistency, "off-diagonal block norms disagree",
                    std::max(std::abs(upper - lower), std::abs(upper - comm)));
    return upper;
}

/// ||(I - P0) H F||, the n x k form of the same quantity.
inline double off_diagonal_speed(const HermitianOperator& h, const Frame& f)
{
    detail::require_same_dim(h.dim(), f.ambient_dim(), "off_diagonal_speed");
    const Matrix hf = h.matrix() * f.columns();
    return operator_norm(hf - f.columns() * (f.columns().adjoint() * hf));
}

inline double state_dispersion(const HermitianOperator& h, const StateVector& psi)
{
    detail::require_same_dim(h.dim(), psi.dim(), "state_dispersion");
    const Vector& v = psi.entries();
    const Vector hv = h.matrix() * v;
    const double mean = v.dot(hv).real();
    const double second = hv.squaredNorm();
    const double raw = second - mean * mean;
    if (raw < -1e-12 * std::max(1.0, second))
        throw Error(ErrorKind::NumericalInconsistency, "negative energy variance", raw);
    // The centred residual is free of the cancellation in second - mean^2.
    return (hv - mean * v).norm();
}

inline double mean_excess_energy(const HermitianOperator& h, const StateVector& psi)
{
    detail::require_same_dim(h.dim(), psi.dim(), "mean_excess_energy");
    const double mean = psi.entries().dot(h.matrix() * psi.entries()).real();
    const double excess = mean - h.spectrum().e_min();
    if (excess < -1e-10 * std::max(1.0, h.norm()))
        throw Error(ErrorKind::NumericalInconsistency, "mean energy below the spectrum", excess);
    return std::max(excess, 0.0);
}

inline double fleming_bound(const HermitianOperator& h, const StateVector& psi0, double theta)
{
    detail::require_theta(theta);
    const double de = state_dispersion(h, psi0);
    if (de <= detail::degenerate_level(h))
        throw Error(ErrorKind::ZeroDispersion, "stationary state has zero energy dispersion", de);
    return theta / de;
}

inline double mandelshtam_tamm_bound(const HermitianOperator& h, const StateVector& psi0)
{
    return fleming_bound(h, psi0, std::numbers::pi / 2);
}

inline double margolus_levitin_bound(const HermitianOperator& h, const StateVector& psi0)
{
    const double excess = mean_excess_energy(h, psi0);
    if (excess <= detail::degenerate_level(h))
        throw Error(ErrorKind::ZeroMeanExcess, "state has zero mean energy above the ground level", excess);
    return (std::numbers::pi / 2) / excess;
}

struct OptimizerSettings {
    int starts = 32;
    int max_iterations = 10000;
    double rel_tol = 1e-12;
    std::uint64_t seed = 0x5EED;
};

struct DispersionResult {
    double value;
    StateVector maximizer;
    double mean_at_maximizer;
    int starts_used;
    bool converged;
};

namespace detail {

/// f(c) = <Bc,c> - <Ac,c>^2 for the compressions A = F*HF, B = F*H^2F.
struct CompressedVariance {
    Matrix a;
    Matrix b;

    double operator()(const Vector& c) const
    {
        const double mean = c.dot(a * c).real();
        return c.dot(b * c).real() - mean * mean;
    }

    /// Gradient of f projected on the tangent space of the unit sphere at c.
    Vector tangent_gradient(const Vector& c) const
    {
        const Vector ac = a * c;
        const double mean = c.dot(ac).real();
        const Vector g = 2.0 * (b * c) - 4.0 * mean * ac;
        return g - c * c.dot(g);
    }
};

struct AscentOutcome {
    Vector point;
    double objective;
    bool converged;
};

/// Projected gradient ascent with Armijo backtracking. Every accepted step
/// strictly increases f; if trace is given it receives f after each step.
inline AscentOutcome ascend(const CompressedVariance& f, Vector c, const OptimizerSettings& opts,
                            std::vector<double>* trace = nullptr)
{
    const double scale = std::max({operator_norm(f.b), std::pow(operator_norm(f.a), 2), 1e-300});
    double eta = 1.0 / scale;
    const double eta_min = 1e-16 / scale;
    double value = f(c);
    if (trace)
        trace->push_back(value);

    for (int it = 0; it < opts.max_iterations; ++it) {
        const Vector g = f.tangent_gradient(c);
        const double g2 = g.squaredNorm();
        if (g2 <= std::pow(1e-14 * scale, 2))
            return {c, value, true};

        bool accepted = false;
        while (eta >= eta_min) {
            Vector trial = c + eta * g;
            trial.normalize();
            const double trial_value = f(trial);
            if (trial_value >= value + 1e-4 * eta * g2) {
                const double change = trial_value - value;
                c = std::move(trial);
                value = trial_value;
                if (trace)
                    trace->push_back(value);
                accepted = true;
                if (change <= opts.rel_tol * std::max(std::abs(value), 1e-300))
                    return {c, value, true};
                eta *= 2.0;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) // no ascent left at machine resolution
            return {c, value, true};
    }
    return {c, value, false};
}

inline std::vector<Vector> dispersion_starts(const Matrix& a, const OptimizerSettings& opts)
{
    const Index k = a.rows();
    std::vector<Vector> starts;
    if (k == 1) {
        starts.push_back(Vector::Ones(1));
        return starts;
    }
    const Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::EigensolverFailure, "compressed eigensolver did not converge");
    const Matrix& v = solver.eigenvectors();
    const auto n_starts = static_cast<std::size_t>(std::max(opts.starts, 1));

    // Extreme pair first: it is the full-space maximizer.
    std::vector<std::pair<Index, Index>> pairs{{0, k - 1}};
    for (Index i = 0; i < k; ++i)
        for (Index j = i + 1; j < k; ++j)
            if (!(i == 0 && j == k - 1))
                pairs.emplace_back(i, j);
    for (const auto& [i, j] : pairs) {
        if (starts.size() >= n_starts)
            break;
        starts.push_back((v.col(i) + v.col(j)) / std::numbers::sqrt2);
    }
    for (std::uint64_t r = 0; starts.size() < n_starts; ++r) {
        SplitMix64 gen(derive_seed(opts.seed, r));
        Vector c(k);
        for (Index i = 0; i < k; ++i)
            c(i) = gen.complex_gaussian();
        starts.push_back(c.normalized());
    }
    return starts;
}

} // namespace detail

/// Maximal energy dispersion over unit vectors of span(F). The returned value
/// is the dispersion of an actual unit vector of the subspace, so it is always
/// a lower bound on the supremum; multi-start ascent targets the global max.
inline DispersionResult subspace_dispersion(const HermitianOperator& h, const Frame& f,
                                            const OptimizerSettings& opts = {})
{
    detail::require_same_dim(h.dim(), f.ambient_dim(), "subspace_dispersion");
    const Matrix hf = h.matrix() * f.columns();
    const detail::CompressedVariance objective{f.columns().adjoint() * hf, hf.adjoint() * hf};

    const auto starts = detail::dispersion_starts(objective.a, opts);
    std::optional<detail::AscentOutcome> best;
    bool any_converged = false;
    for (const auto& c0 : starts) {
        auto outcome = detail::ascend(objective, c0, opts);
        any_converged = any_converged || outcome.converged;
        if (!best || outcome.objective > best->objective) // ties keep the lowest index
            best = std::move(outcome);
    }

    const StateVector psi = StateVector::normalized(f.columns() * best->point);
    return DispersionResult{state_dispersion(h, psi), psi, psi.entries().dot(h.matrix() * psi.entries()).real(),
                            static_cast<int>(starts.size()), any_converged};
}

/// Raw V t; deliberately not capped at pi/2.
inline double subspace_angle_bound(double v_speed, double t)
{
    if (!(v_speed >= 0.0) || !(t >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "subspace_angle_bound needs v >= 0 and t >= 0");
    return v_speed * t;
}

inline double subspace_time_bound_v(double v_speed, double theta)
{
    detail::require_theta(theta);
    if (!(v_speed > 0.0))
        throw Error(ErrorKind::ZeroSpeed, "invariant subspace never reaches theta", v_speed);
    return theta / v_speed;
}

inline double subspace_time_bound_dispersion(double dispersion, double theta)
{
    detail::require_theta(theta);
    if (!(dispersion > 0.0))
        throw Error(ErrorKind::ZeroDispersion, "subspace dispersion is zero", dispersion);
    return theta / dispersion;
}

inline double spectral_halfwidth_bound(const HermitianOperator& h) { return 0.5 * h.spectrum().width(); }

/// 2 theta / Omega, the least first-crossing time over all H of spectral width Omega.
inline double brachistochrone_time(double theta, double omega)
{
    detail::require_theta(theta);
    if (!(omega > 0.0))
        throw Error(ErrorKind::ZeroWidth, "spectral width must be positive", omega);
    return 2.0 * theta / omega;
}

struct ThetaBounds {
    double theta;
    // nullopt means "never": the corresponding rate is zero.
    std::optional<double> t_bound_v;
    std::optional<double> t_bound_dispersion;
    std::optional<double> t_brachistochrone;
};

struct BoundsReport {
    double v_speed;
    double subspace_dispersion;
    double spectral_halfwidth;
    double e_min;
    double e_max;
    double omega;
    bool dispersion_converged;
    std::vector<ThetaBounds> per_theta;
};

inline BoundsReport bounds_report(const HermitianOperator& h, const Frame& f, const std::vector<double>& thetas,
                                  const OptimizerSettings& opts = {})
{
    for (double theta : thetas)
        detail::require_theta(theta);
    const auto& spec = h.spectrum();
    const double zero = detail::degenerate_level(h);

    BoundsReport r{};
    r.v_speed = off_diagonal_speed(h, f);
    const auto disp = subspace_dispersion(h, f, opts);
    r.subspace_dispersion = disp.value;
    r.dispersion_converged = disp.converged;
    r.spectral_halfwidth = spectral_halfwidth_bound(h);
    r.e_min = spec.e_min();
    r.e_max = spec.e_max();
    r.omega = spec.width();

    for (double theta : thetas) {
        ThetaBounds tb{theta, std::nullopt, std::nullopt, std::nullopt};
        if (r.v_speed > zero)
            tb.t_bound_v = subspace_time_bound_v(r.v_speed, theta);
        if (r.subspace_dispersion > zero)
            tb.t_bound_dispersion = subspace_time_bound_dispersion(r.subspace_dispersion, theta);
        if (r.omega > zero)
            tb.t_brachistochrone = brachistochrone_time(theta, r.omega);
        r.per_theta.push_back(tb);
    }
    return r;
}

} // namespace subspace_qsl
