#pragma once

// Dense Hamiltonians, subspace frames, orthogonal projectors and unit states,
// together with the spectral machinery behind the propagator e^{-iHt}.

#include "subspace_qsl/error.hpp"
#include "subspace_qsl/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>

namespace subspace_qsl {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kHermiticityTol = 1e-10;
inline constexpr double kFrameTol = 1e-10;
inline constexpr double kProjectorTol = 1e-10;
inline constexpr double kStateTol = 1e-12;
inline constexpr double kRankTol = 1e-10;

/// Relative tolerance for the eigen-reconstruction and eigenvector orthonormality.
inline double spectral_tol(Index n) { return 1e-12 * static_cast<double>(std::max<Index>(n, 1)); }

namespace detail {

inline std::string fmt_double(double x)
{
    std::ostringstream os;
    os.precision(3);
    os << x;
    return os.str();
}

inline void require_square(const Matrix& m, const char* what)
{
    if (m.rows() != m.cols())
        throw Error(ErrorKind::NotSquare, std::string(what) + " is " + std::to_string(m.rows()) + "x" +
                                              std::to_string(m.cols()));
}

inline void require_same_dim(Index a, Index b, const char* what)
{
    if (a != b)
        throw Error(ErrorKind::DimensionMismatch,
                    std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
}

} // namespace detail

/// Largest singular value.
inline double operator_norm(const Matrix& m)
{
    if (m.size() == 0)
        return 0.0;
    if (!m.allFinite())
        throw Error(ErrorKind::SvdFailure, "matrix has non-finite entries");
    const Eigen::JacobiSVD<Matrix> svd(m);
    const double s = svd.singularValues()(0);
    if (!std::isfinite(s))
        throw Error(ErrorKind::SvdFailure, "singular value is not finite");
    return s;
}

inline Matrix commutator(const Matrix& a, const Matrix& b)
{
    detail::require_square(a, "commutator operand");
    detail::require_square(b, "commutator operand");
    detail::require_same_dim(a.rows(), b.rows(), "commutator");
    return a * b - b * a;
}

struct SpectralDecomposition {
    RealVector eigenvalues; // ascending
    Matrix eigenvectors;    // orthonormal columns

    double e_min() const { return eigenvalues(0); }
    double e_max() const { return eigenvalues(eigenvalues.size() - 1); }
    double width() const { return e_max() - e_min(); }

    /// X -> e^{-iHt} X, applied in the eigenbasis (O(n^2 k) for n x k input).
    Matrix evolve(const Matrix& x, double t) const
    {
        detail::require_same_dim(x.rows(), eigenvectors.rows(), "evolve");
        Matrix coeffs = eigenvectors.adjoint() * x;
        for (Index i = 0; i < coeffs.rows(); ++i)
            coeffs.row(i) *= std::polar(1.0, -eigenvalues(i) * t);
        return eigenvectors * coeffs;
    }
};

inline SpectralDecomposition spectral_decomposition_of(const Matrix& h)
{
    const Index n = h.rows();
    const Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::EigensolverFailure, "Hermitian eigensolver did not converge");

    SpectralDecomposition sd{solver.eigenvalues(), solver.eigenvectors()};
    const double scale = operator_norm(h);
    const double recon =
        operator_norm(sd.eigenvectors * sd.eigenvalues.cast<cplx>().asDiagonal() * sd.eigenvectors.adjoint() - h);
    const double ortho = operator_norm(sd.eigenvectors.adjoint() * sd.eigenvectors - Matrix::Identity(n, n));
    if (recon > spectral_tol(n) * scale + 1e-300 || ortho > spectral_tol(n))
        throw Error(ErrorKind::EigensolverFailure, "eigen-decomposition residual too large", std::max(recon, ortho));
    return sd;
}

/// Validated Hermitian matrix. The spectral decomposition is computed once on
/// first request and shared between copies.
class HermitianOperator {
public:
    static HermitianOperator validate(const Matrix& m, double tol = kHermiticityTol)
    {
        detail::require_square(m, "Hamiltonian");
        if (m.rows() < 1)
            throw Error(ErrorKind::InvalidArgument, "Hamiltonian must have dimension >= 1");
        if (!(tol >= 0.0))
            throw Error(ErrorKind::InvalidArgument, "hermiticity tolerance must be nonnegative");
        if (!m.allFinite())
            throw Error(ErrorKind::NotHermitian, "Hamiltonian has non-finite entries");
        const double asym = operator_norm(m - m.adjoint());
        if (asym > tol * std::max(1.0, operator_norm(m)))
            throw Error(ErrorKind::NotHermitian, "||M - M*|| = " + detail::fmt_double(asym), asym);
        return HermitianOperator(0.5 * (m + m.adjoint()), tol);
    }

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    double hermiticity_tol() const { return tol_; }

    const SpectralDecomposition& spectrum() const
    {
        std::call_once(cache_->once, [this] {
            try {
                cache_->value = spectral_decomposition_of(m_);
            } catch (...) {
                cache_->error = std::current_exception();
            }
        });
        if (cache_->error)
            std::rethrow_exception(cache_->error);
        return cache_->value;
    }

    /// ||H|| = max |E_i|.
    double norm() const
    {
        const auto& s = spectrum();
        return std::max(std::abs(s.e_min()), std::abs(s.e_max()));
    }

private:
    struct Cache {
        std::once_flag once;
        SpectralDecomposition value;
        std::exception_ptr error;
    };

    HermitianOperator(Matrix m, double tol) : m_(std::move(m)), tol_(tol), cache_(std::make_shared<Cache>()) {}

    Matrix m_;
    double tol_;
    std::shared_ptr<Cache> cache_;
};

inline HermitianOperator validate_hermitian(const Matrix& m, double tol = kHermiticityTol)
{
    return HermitianOperator::validate(m, tol);
}

inline SpectralDecomposition spectral_decomposition(const HermitianOperator& h) { return h.spectrum(); }

/// U(t) = e^{-iHt} = V e^{-i Lambda t} V*.
inline Matrix propagator(const HermitianOperator& h, double t)
{
    return h.spectrum().evolve(Matrix::Identity(h.dim(), h.dim()), t);
}

/// n x k matrix with orthonormal columns; represents the subspace it spans.
class Frame {
public:
    static Frame from_columns(const Matrix& f, double tol = kFrameTol)
    {
        if (f.cols() < 1 || f.cols() > f.rows())
            throw Error(ErrorKind::InvalidFrame, "frame rank must satisfy 1 <= k <= n");
        const double resid = operator_norm(f.adjoint() * f - Matrix::Identity(f.cols(), f.cols()));
        if (!(resid <= tol))
            throw Error(ErrorKind::InvalidFrame, "||F*F - I|| = " + detail::fmt_double(resid), resid);
        return Frame(f);
    }

    Index ambient_dim() const { return f_.rows(); }
    Index rank() const { return f_.cols(); }
    const Matrix& columns() const { return f_; }

private:
    explicit Frame(Matrix f) : f_(std::move(f)) {}
    Matrix f_;
};

class Projector {
public:
    static Projector from_matrix(const Matrix& p, double tol = kProjectorTol)
    {
        detail::require_square(p, "projector");
        const double herm = operator_norm(p - p.adjoint());
        const double idem = operator_norm(p * p - p);
        if (!(herm <= tol) || !(idem <= tol))
            throw Error(ErrorKind::InvalidProjector,
                        "||P - P*|| = " + detail::fmt_double(herm) + ", ||P^2 - P|| = " + detail::fmt_double(idem),
                        std::max(herm, idem));
        const double tr = p.trace().real();
        if (std::abs(tr - std::round(tr)) > tol * static_cast<double>(std::max<Index>(p.rows(), 1)) + 1e-8)
            throw Error(ErrorKind::InvalidProjector, "trace is not an integer", tr);
        return Projector(p);
    }

    Index dim() const { return p_.rows(); }
    const Matrix& matrix() const { return p_; }
    Index rank() const { return static_cast<Index>(std::llround(p_.trace().real())); }

private:
    explicit Projector(Matrix p) : p_(std::move(p)) {}
    Matrix p_;
};

class StateVector {
public:
    static StateVector from_vector(const Vector& v, double tol = kStateTol)
    {
        if (v.size() < 1)
            throw Error(ErrorKind::InvalidArgument, "state must have dimension >= 1");
        const double norm = v.norm();
        if (!(std::abs(norm - 1.0) <= tol))
            throw Error(ErrorKind::NotUnitVector, "||psi|| = " + detail::fmt_double(norm), norm);
        return StateVector(v);
    }

    /// Rescales any nonzero vector to unit norm.
    static StateVector normalized(const Vector& v)
    {
        const double norm = v.norm();
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw Error(ErrorKind::NotUnitVector, "cannot normalize a zero vector");
        return StateVector(v / norm);
    }

    Index dim() const { return v_.size(); }
    const Vector& entries() const { return v_; }

    Frame as_frame() const { return Frame::from_columns(v_); }

private:
    explicit StateVector(Vector v) : v_(std::move(v)) {}
    Vector v_;
};

/// Modified Gram-Schmidt with a second reorthogonalization pass.
inline Frame orthonormalize(const Matrix& vectors, double rank_tol = kRankTol)
{
    if (vectors.cols() < 1)
        throw Error(ErrorKind::InvalidArgument, "need at least one vector");
    if (vectors.cols() > vectors.rows())
        throw Error(ErrorKind::RankDeficient, "more vectors than the ambient dimension");
    Matrix q(vectors.rows(), vectors.cols());
    for (Index j = 0; j < vectors.cols(); ++j) {
        Vector v = vectors.col(j);
        const double norm0 = v.norm();
        if (!(norm0 > 0.0))
            throw Error(ErrorKind::RankDeficient, "column " + std::to_string(j) + " is zero", 0.0);
        for (int pass = 0; pass < 2; ++pass)
            for (Index i = 0; i < j; ++i)
                v -= q.col(i) * q.col(i).dot(v);
        const double resid = v.norm();
        if (resid < rank_tol * norm0)
            throw Error(ErrorKind::RankDeficient,
                        "column " + std::to_string(j) + " residual " + detail::fmt_double(resid / norm0),
                        resid / norm0);
        q.col(j) = v / resid;
    }
    return Frame::from_columns(q);
}

/// P = F F*.
inline Projector projector_from_frame(const Frame& f)
{
    const Matrix p = f.columns() * f.columns().adjoint();
    return Projector::from_matrix(0.5 * (p + p.adjoint()));
}

/// Orthonormal basis of Ran(P) from the eigenvectors with eigenvalue ~1.
inline Frame frame_from_projector(const Projector& p)
{
    const Index k = p.rank();
    if (k < 1)
        throw Error(ErrorKind::ZeroSubspace, "projector has rank 0");
    const Eigen::SelfAdjointEigenSolver<Matrix> solver(p.matrix());
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::EigensolverFailure, "projector eigensolver did not converge");
    return Frame::from_columns(solver.eigenvectors().rightCols(k));
}

inline Projector complement_projector(const Projector& p)
{
    return Projector::from_matrix(Matrix::Identity(p.dim(), p.dim()) - p.matrix());
}

/// n x k matrix of independent complex Gaussians, filled row by row.
inline Matrix random_gaussian_matrix(Index rows, Index cols, std::uint64_t seed)
{
    SplitMix64 gen(seed);
    Matrix g(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            g(i, j) = gen.complex_gaussian();
    return g;
}

/// (G + G*)/2 with G a seeded complex Gaussian matrix.
inline HermitianOperator random_hermitian(Index n, std::uint64_t seed)
{
    if (n < 1)
        throw Error(ErrorKind::InvalidArgument, "dimension must be >= 1");
    const Matrix g = random_gaussian_matrix(n, n, seed);
    return HermitianOperator::validate(0.5 * (g + g.adjoint()), 0.0);
}

inline Frame random_frame(Index n, Index k, std::uint64_t seed)
{
    if (k < 1 || k > n)
        throw Error(ErrorKind::InvalidArgument, "random_frame needs 1 <= k <= n");
    constexpr int max_retries = 3;
    for (int attempt = 0;; ++attempt) {
        const std::uint64_t s = attempt == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(attempt));
        try {
            return orthonormalize(random_gaussian_matrix(n, k, s));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::RankDeficient || attempt >= max_retries)
                throw;
        }
    }
}

inline StateVector random_state(Index n, std::uint64_t seed)
{
    return StateVector::normalized(random_gaussian_matrix(n, 1, seed).col(0));
}

inline Matrix random_unitary(Index n, std::uint64_t seed) { return random_frame(n, n, seed).columns(); }

} // namespace subspace_qsl
