#pragma once

// Dense complex linear algebra kernels shared by every other module.
//
// Matrices are Eigen::MatrixXcd. All routines are pure; tolerances travel in
// an explicit Tolerances record instead of globals.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "halmos/error.hpp"

namespace halmos {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// The shared tolerance family. `scaled(f)` multiplies every member by f.
struct Tolerances {
    double orth = 1e-10;       // orthonormality of bases
    double hermitian = 1e-10;  // ||M - M*||_max, relative to max(1, ||M||_max)
    double idempotent = 1e-9;  // ||P^2 - P||_max
    double gap = 1e-8;         // cluster radius around -1, 0, +1; h kept in [gap, 1-gap]
    double gray = 1e-6;        // outer edge of the ambiguous band around a cluster
    double rank = 1e-8;        // relative singular value cut-off
    double residual = 1e-9;    // per-dimension bound on structural residuals

    Tolerances scaled(double f) const {
        Tolerances t = *this;
        t.orth *= f;
        t.hermitian *= f;
        t.idempotent *= f;
        t.gap *= f;
        t.gray *= f;
        t.rank *= f;
        t.residual *= f;
        return t;
    }
};

inline double max_abs(const CMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const CMatrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const Complex z = m.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
}

inline void require_square(const CMatrix& m, const char* who) {
    if (m.rows() != m.cols())
        fail(ErrorKind::NotSquare, std::string(who) + ": matrix is " + std::to_string(m.rows()) + "x" +
                                       std::to_string(m.cols()));
}

inline double hermitian_defect(const CMatrix& m) { return max_abs(m - m.adjoint()); }

inline CMatrix identity(Eigen::Index n) { return CMatrix::Identity(n, n); }

/// Orthonormal columns spanning a subspace of C^ambient.
class SubspaceBasis {
public:
    explicit SubspaceBasis(Eigen::Index ambient) : columns_(ambient, 0) {}

    explicit SubspaceBasis(CMatrix columns, double tol = 1e-10) : columns_(std::move(columns)) {
        if (columns_.cols() > 0) {
            const double defect = max_abs(columns_.adjoint() * columns_ - identity(columns_.cols()));
            if (defect > tol)
                fail(ErrorKind::NotOrthonormal, "basis defect " + format_value(defect));
        }
    }

    Eigen::Index ambient() const noexcept { return columns_.rows(); }
    Eigen::Index dim() const noexcept { return columns_.cols(); }
    bool empty() const noexcept { return columns_.cols() == 0; }
    const CMatrix& columns() const noexcept { return columns_; }

    /// Orthogonal projection onto the subspace.
    CMatrix projector() const { return columns_ * columns_.adjoint(); }

private:
    CMatrix columns_;
};

struct EigenSystem {
    RVector values;   // ascending
    CMatrix vectors;  // unitary, columns aligned with values
};

inline EigenSystem hermitian_eig(const CMatrix& m, const Tolerances& tol = {}) {
    require_square(m, "hermitian_eig");
    const double scale = std::max(1.0, max_abs(m));
    if (hermitian_defect(m) > tol.hermitian * scale)
        fail(ErrorKind::NotHermitian, "hermitian_eig: defect " + format_value(hermitian_defect(m)));
    if (m.rows() == 0) return {RVector(0), CMatrix(0, 0)};
    const CMatrix sym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
    if (solver.info() != Eigen::Success) fail(ErrorKind::NoConvergence, "hermitian_eig");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

struct SvdResult {
    CMatrix u;      // rows x rows, unitary
    RVector sigma;  // descending, length min(rows, cols)
    CMatrix v;      // cols x cols, unitary
};

inline SvdResult svd(const CMatrix& m) {
    if (m.size() == 0) return {identity(m.rows()), RVector(0), identity(m.cols())};
    Eigen::JacobiSVD<CMatrix> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (solver.info() != Eigen::Success) fail(ErrorKind::NoConvergence, "svd");
    return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

inline double spectral_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<CMatrix>(m).singularValues()(0);
}

/// Right null space: singular vectors with sigma <= tol * sigma_max, or
/// sigma <= tol when the matrix vanishes. `scale_floor` raises the reference
/// scale to max(sigma_max, scale_floor) for matrices with a known natural size.
inline SubspaceBasis null_basis(const CMatrix& m, double tol, double scale_floor = 0.0) {
    if (m.cols() == 0) return SubspaceBasis(Eigen::Index{0});
    const SvdResult s = svd(m);
    const double smax = std::max(s.sigma.size() > 0 ? s.sigma(0) : 0.0, scale_floor);
    const double cut = smax > 0.0 ? tol * smax : tol;
    Eigen::Index first = 0;
    while (first < s.sigma.size() && s.sigma(first) > cut) ++first;
    return SubspaceBasis(CMatrix(s.v.rightCols(m.cols() - first)));
}

inline CMatrix psd_sqrt(const CMatrix& m, const Tolerances& tol = {}) {
    const EigenSystem e = hermitian_eig(m, tol);
    if (e.values.size() == 0) return m;
    const double scale = std::max(1.0, e.values.cwiseAbs().maxCoeff());
    if (e.values(0) < -1e-8 * scale)
        fail(ErrorKind::NegativeEigenvalue, "psd_sqrt: eigenvalue " + format_value(e.values(0)));
    const RVector roots = e.values.cwiseMax(0.0).cwiseSqrt();
    return e.vectors * roots.cast<Complex>().asDiagonal() * e.vectors.adjoint();
}

/// Unitary factor V of the left polar form M = sqrt(M M*) V.
inline CMatrix polar_unitary_part(const CMatrix& m) {
    require_square(m, "polar_unitary_part");
    if (m.rows() == 0) return m;
    const SvdResult s = svd(m);
    const double smin = s.sigma(s.sigma.size() - 1);
    if (!(smin > 1e-10 * s.sigma(0)))
        fail(ErrorKind::SingularInput, "polar_unitary_part: sigma_min " + format_value(smin));
    return s.u * s.v.adjoint();
}

/// Orthonormal basis of container minus sub.
inline SubspaceBasis complement_within(const SubspaceBasis& sub, const SubspaceBasis& container) {
    if (sub.ambient() != container.ambient() && !sub.empty())
        fail(ErrorKind::SizeMismatch, "complement_within: ambient dimensions differ");
    if (sub.empty()) return container;
    const CMatrix& c = container.columns();
    const CMatrix coords = c.adjoint() * sub.columns();
    if (max_abs(sub.columns() - c * coords) > 1e-8)
        fail(ErrorKind::NotContained, "complement_within: subspace leaves container");
    if (sub.dim() == container.dim()) return SubspaceBasis(container.ambient());
    const SvdResult s = svd(coords);
    const CMatrix rest = s.u.rightCols(container.dim() - sub.dim());
    return SubspaceBasis(CMatrix(c * rest));
}

/// Sine of the largest principal angle; 1 when dimensions differ.
inline double max_principal_sine(const SubspaceBasis& a, const SubspaceBasis& b) {
    if (a.dim() != b.dim()) return 1.0;
    if (a.dim() == 0) return 0.0;
    const CMatrix residual = a.columns() - b.columns() * (b.columns().adjoint() * a.columns());
    return std::min(1.0, spectral_norm(residual));
}

inline double unitarity_defect(const CMatrix& u) {
    return max_abs(u.adjoint() * u - identity(u.cols()));
}

} // namespace halmos
