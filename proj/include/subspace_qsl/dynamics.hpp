#pragma once

// Schroedinger evolution of states and subspaces, P(t) = U(t) P0 U(t)*, and
// first-crossing times of the maximal angle theta(P0, P(t)).

#include "subspace_qsl/bounds.hpp"
#include "subspace_qsl/geometry.hpp"
#include "subspace_qsl/operators.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

namespace subspace_qsl {

struct AngleTrajectory {
    std::vector<double> times;
    std::vector<double> norm_diff;
    std::vector<double> theta;
    std::vector<double> v_bound;
    std::vector<double> dispersion_bound;
};

struct CrossingResult {
    bool attained;
    std::optional<double> t_theta;
    double theta_target;
    double sup_angle_observed;
    double horizon;
    long evaluations;
};

inline StateVector evolve_state(const HermitianOperator& h, const StateVector& psi0, double t)
{
    detail::require_same_dim(h.dim(), psi0.dim(), "evolve_state");
    return StateVector::from_vector(h.spectrum().evolve(psi0.entries(), t).col(0), 1e-10);
}

inline Frame evolve_frame(const HermitianOperator& h, const Frame& f0, double t)
{
    detail::require_same_dim(h.dim(), f0.ambient_dim(), "evolve_frame");
    return Frame::from_columns(h.spectrum().evolve(f0.columns(), t));
}

inline Projector evolve_projector(const HermitianOperator& h, const Projector& p0, double t)
{
    detail::require_same_dim(h.dim(), p0.dim(), "evolve_projector");
    const auto& spec = h.spectrum();
    const Matrix up = spec.evolve(p0.matrix(), t);         // U P0
    const Matrix p = spec.evolve(Matrix(up.adjoint()), t); // U (U P0)* = U P0 U*
    return Projector::from_matrix(0.5 * (p + p.adjoint()));
}

/// Acute angle arccos|<psi0, psi>| between two states, in a form that keeps
/// full precision near pi/2.
inline double state_angle(const StateVector& psi0, const StateVector& psi)
{
    detail::require_same_dim(psi0.dim(), psi.dim(), "state_angle");
    const cplx overlap = psi0.entries().dot(psi.entries());
    const double away = (psi.entries() - overlap * psi0.entries()).norm();
    return std::atan2(away, std::abs(overlap));
}

/// Suggested search window: four times the fastest possible orthogonalization
/// time, capped at 10^3 / ||H||.
inline double default_horizon(const HermitianOperator& h, double v_speed)
{
    const double eps = std::numeric_limits<double>::epsilon();
    const double fastest = std::numbers::pi / (2.0 * std::max(v_speed, eps));
    const double norm = h.norm();
    return norm > 0.0 ? std::min(4.0 * fastest, 1e3 / norm) : 4.0 * fastest;
}

inline double default_residual_step(const HermitianOperator& h) { return 1e-4 / std::max(h.norm(), 1e-300); }

/// theta(P0, P(t)) and ||P(t) - P0|| on a uniform grid with both endpoints.
inline AngleTrajectory angle_trajectory(const HermitianOperator& h, const Frame& f0, double t_max, int num_points,
                                        double v_speed, double dispersion)
{
    detail::require_same_dim(h.dim(), f0.ambient_dim(), "angle_trajectory");
    if (!(t_max > 0.0))
        throw Error(ErrorKind::InvalidArgument, "t_max must be positive");
    if (num_points < 2)
        throw Error(ErrorKind::InvalidArgument, "need at least two grid points");
    if (!(v_speed >= 0.0) || !(dispersion >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "rates must be nonnegative");

    const auto n = static_cast<std::size_t>(num_points);
    AngleTrajectory tr;
    tr.times.resize(n);
    tr.norm_diff.resize(n);
    tr.theta.resize(n);
    tr.v_bound.resize(n);
    tr.dispersion_bound.resize(n);

    const Matrix p0 = f0.columns() * f0.columns().adjoint();
    for (std::size_t i = 0; i < n; ++i) {
        const double t = i + 1 == n ? t_max : t_max * static_cast<double>(i) / static_cast<double>(n - 1);
        const Frame ft = evolve_frame(h, f0, t);
        tr.times[i] = t;
        tr.norm_diff[i] =
            detail::clamp_unit(operator_norm(ft.columns() * ft.columns().adjoint() - p0), "||P(t) - P0||");
        tr.theta[i] = maximal_angle(f0, ft);
        tr.v_bound[i] = v_speed * t;
        tr.dispersion_bound[i] = dispersion * t;
    }
    return tr;
}

inline AngleTrajectory angle_trajectory(const HermitianOperator& h, const Projector& p0, double t_max, int num_points,
                                        double v_speed, double dispersion)
{
    return angle_trajectory(h, frame_from_projector(p0), t_max, num_points, v_speed, dispersion);
}

/// First time the maximal angle between span(F0) and its evolution reaches
/// theta_target.
///
/// The angle is V-Lipschitz along the path, so from a sample with angle a the
/// target cannot be reached before (theta - a) / V has elapsed. Stepping by
/// exactly that amount never skips a crossing. The scan stops once the angle
/// is within crossing_tol * min(1, V) of the target, which keeps both the
/// angle error below crossing_tol and the time error of every lower bound
/// theta / rate (rate >= V) below crossing_tol.
inline CrossingResult first_crossing_time(const HermitianOperator& h, const Frame& f0, double theta_target,
                                          double horizon, double crossing_tol)
{
    detail::require_same_dim(h.dim(), f0.ambient_dim(), "first_crossing_time");
    if (!(theta_target > 0.0 && theta_target <= std::numbers::pi / 2))
        throw Error(ErrorKind::InvalidTheta, "theta must lie in (0, pi/2]", theta_target);
    if (!(horizon > 0.0))
        throw Error(ErrorKind::NonpositiveHorizon, "horizon must be positive", horizon);
    if (!(crossing_tol > 0.0))
        throw Error(ErrorKind::InvalidArgument, "crossing tolerance must be positive", crossing_tol);

    CrossingResult r{false, std::nullopt, theta_target, 0.0, horizon, 0};
    const double v = off_diagonal_speed(h, f0);
    if (v <= detail::degenerate_level(h)) { // reducing subspace; nothing moves
        r.sup_angle_observed = maximal_angle(f0, evolve_frame(h, f0, horizon));
        r.evaluations = 1;
        return r;
    }

    const double gap_tol = crossing_tol * std::min(1.0, v);
    const double max_evaluations = std::ceil(horizon * v / gap_tol) + 16.0;
    double t = 0.0;
    double angle = 0.0;
    for (;;) {
        const double gap = theta_target - angle;
        if (gap <= gap_tol) {
            r.attained = true;
            r.t_theta = t;
            return r;
        }
        const double next = t + gap / v;
        if (next > horizon)
            return r;
        if (static_cast<double>(r.evaluations) > max_evaluations)
            throw Error(ErrorKind::NumericalInconsistency, "crossing scan exceeded its step budget");
        t = next;
        angle = maximal_angle(f0, evolve_frame(h, f0, t));
        ++r.evaluations;
        r.sup_angle_observed = std::max(r.sup_angle_observed, angle);
    }
}

inline CrossingResult first_crossing_time(const HermitianOperator& h, const Projector& p0, double theta_target,
                                          double horizon, double crossing_tol)
{
    return first_crossing_time(h, frame_from_projector(p0), theta_target, horizon, crossing_tol);
}

/// Central-difference residual of the projector equation of motion,
/// ||(P(t+h) - P(t-h)) / 2h - i [P(t), H]||. For P(t) = U P0 U* one has
/// i dP/dt = [H, P], so the residual is O(h^2).
inline double projector_derivative_residual(const HermitianOperator& h, const Projector& p0, double t, double step)
{
    if (!(step > 0.0))
        throw Error(ErrorKind::InvalidArgument, "difference step must be positive", step);
    const Matrix fwd = evolve_projector(h, p0, t + step).matrix();
    const Matrix bwd = evolve_projector(h, p0, t - step).matrix();
    const Matrix mid = evolve_projector(h, p0, t).matrix();
    const Matrix rhs = cplx(0.0, 1.0) * commutator(mid, h.matrix());
    return operator_norm((fwd - bwd) / (2.0 * step) - rhs);
}

/// Length of the Schroedinger path on [0, t]: ||[P0, H]|| t (the speed is constant).
inline double path_length(const HermitianOperator& h, const Projector& p0, double t)
{
    detail::require_same_dim(h.dim(), p0.dim(), "path_length");
    if (!(t >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "path length needs t >= 0", t);
    return operator_norm(commutator(p0.matrix(), h.matrix())) * t;
}

} // namespace subspace_qsl
