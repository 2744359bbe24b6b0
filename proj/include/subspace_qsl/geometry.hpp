#pragma once

// Distances and angles between subspaces.
//
// rho(Q1, Q2)  = ||Q1 - Q2||                       (operator-norm metric)
// theta(Q1,Q2) = arcsin ||Q1 - Q2||                (maximal angle, also a metric)
// phi(Q1, Q2)  = arcsin ||(I - Q2) Q1||            (relative maximal angle)
//
// Angles are evaluated as atan2(sine, cosine) from orthonormal bases so they
// keep full precision all the way to pi/2.
//
// theta = max(phi(Q1,Q2), phi(Q2,Q1)) whenever both subspaces are nonzero.

#include "subspace_qsl/operators.hpp"

#include <cmath>
#include <numbers>

namespace subspace_qsl {

/// Values that may exceed their range only by round-off.
inline constexpr double kClampSlack = 1e-9;

namespace detail {

inline double clamp_unit(double x, const char* what)
{
    if (x > 1.0 + kClampSlack)
        throw Error(ErrorKind::NumericalInconsistency, std::string(what) + " exceeds 1 by more than round-off", x);
    return std::clamp(x, 0.0, 1.0);
}

inline void require_nonzero(const Projector& p, const char* what)
{
    if (p.matrix().trace().real() < 0.5)
        throw Error(ErrorKind::ZeroSubspace, std::string(what) + " is the zero subspace");
}

} // namespace detail

struct AnglePair {
    double phi_12; // phi(Q1, Q2)
    double phi_21; // phi(Q2, Q1)
    double theta;  // maximal angle
};

inline double projector_distance(const Projector& p1, const Projector& p2)
{
    detail::require_same_dim(p1.dim(), p2.dim(), "projector_distance");
    return detail::clamp_unit(operator_norm(p1.matrix() - p2.matrix()), "||P1 - P2||");
}

/// phi(span F1, span F2) as atan2(||(I - P2) F1||, cos), where the cosine is
/// the smallest singular value of F2* F1 (zero when dim F1 > dim F2).
inline double relative_maximal_angle(const Frame& f1, const Frame& f2)
{
    detail::require_same_dim(f1.ambient_dim(), f2.ambient_dim(), "relative_maximal_angle");
    const Matrix overlap = f2.columns().adjoint() * f1.columns();
    const double sine =
        detail::clamp_unit(operator_norm(f1.columns() - f2.columns() * overlap), "||(I - P2) P1||");
    double cosine = 0.0;
    if (f1.rank() <= f2.rank()) {
        const Eigen::JacobiSVD<Matrix> svd(overlap);
        cosine = detail::clamp_unit(svd.singularValues().minCoeff(), "cosine of relative angle");
    }
    return std::atan2(sine, cosine);
}

/// Maximal angle between the spans of two frames, evaluated as
/// atan2(||P1 - P2||, cos) so that it stays accurate near pi/2, where
/// arcsin of the norm loses half the significant digits.
inline double maximal_angle(const Frame& f1, const Frame& f2)
{
    detail::require_same_dim(f1.ambient_dim(), f2.ambient_dim(), "maximal_angle");
    if (f1.rank() != f2.rank())
        return std::numbers::pi / 2; // some unit vector of the larger one is orthogonal to the smaller
    const Matrix diff = f1.columns() * f1.columns().adjoint() - f2.columns() * f2.columns().adjoint();
    const double sine = detail::clamp_unit(operator_norm(diff), "||P1 - P2||");
    const Eigen::JacobiSVD<Matrix> svd(f1.columns().adjoint() * f2.columns());
    const double cosine = detail::clamp_unit(svd.singularValues().minCoeff(), "cosine of maximal angle");
    return std::atan2(sine, cosine);
}

/// arcsin ||P1 - P2||. For nonzero projectors the value is computed through
/// orthonormal bases of the ranges, which agrees with the arcsin form but
/// keeps full accuracy near pi/2.
inline double maximal_angle(const Projector& p1, const Projector& p2)
{
    detail::require_same_dim(p1.dim(), p2.dim(), "maximal_angle");
    if (p1.rank() != p2.rank())
        return std::numbers::pi / 2;
    if (p1.rank() == 0)
        return 0.0;
    return maximal_angle(frame_from_projector(p1), frame_from_projector(p2));
}

inline double relative_maximal_angle(const Projector& p1, const Projector& p2)
{
    detail::require_same_dim(p1.dim(), p2.dim(), "relative_maximal_angle");
    detail::require_nonzero(p1, "first subspace");
    if (p2.rank() == 0)
        return std::numbers::pi / 2;
    return relative_maximal_angle(frame_from_projector(p1), frame_from_projector(p2));
}

inline AnglePair angle_pair(const Projector& p1, const Projector& p2)
{
    detail::require_nonzero(p2, "second subspace");
    AnglePair a{relative_maximal_angle(p1, p2), relative_maximal_angle(p2, p1), maximal_angle(p1, p2)};
    return a;
}

/// arccos of the singular values of F1* F2, ascending.
inline RealVector principal_angles(const Frame& f1, const Frame& f2)
{
    detail::require_same_dim(f1.ambient_dim(), f2.ambient_dim(), "principal_angles");
    const Matrix overlap = f1.columns().adjoint() * f2.columns();
    if (!overlap.allFinite())
        throw Error(ErrorKind::SvdFailure, "frame overlap has non-finite entries");
    const Eigen::JacobiSVD<Matrix> svd(overlap);
    const RealVector& s = svd.singularValues(); // descending
    RealVector angles(s.size());
    for (Index i = 0; i < s.size(); ++i)
        angles(i) = std::acos(detail::clamp_unit(s(i), "singular value of F1*F2"));
    return angles;
}

/// cos^2 of the maximal angle: the smallest probability that a system in a
/// state of either subspace is found in the other one.
inline double min_transition_probability(const Projector& p1, const Projector& p2)
{
    detail::require_nonzero(p1, "first subspace");
    detail::require_nonzero(p2, "second subspace");
    const double d = projector_distance(p1, p2);
    return 1.0 - d * d;
}

} // namespace subspace_qsl
