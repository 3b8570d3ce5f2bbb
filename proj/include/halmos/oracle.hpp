#pragma once

// Brute-force reference computations. Everything here works on raw matrices
// and uses only the numerics kernels, never the canonical form, so it can
// serve as an independent check of the formula-based modules.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <tuple>
#include <vector>

#include <Eigen/Eigenvalues>

#include "halmos/numerics.hpp"

namespace halmos::oracle {

/// Eigenvalues of a general square matrix, with multiplicity.
inline std::vector<Complex> brute_spectrum(const CMatrix& m) {
    require_square(m, "brute_spectrum");
    if (m.rows() == 0) return {};
    Eigen::ComplexEigenSolver<CMatrix> solver(m, false);
    if (solver.info() != Eigen::Success) fail(ErrorKind::NoConvergence, "brute_spectrum");
    const CVector ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

/// SVD pseudoinverse; singular values <= rcond * max(sigma_max, scale_floor) are dropped.
inline CMatrix brute_pinv(const CMatrix& m, double rcond = 1e-10, double scale_floor = 0.0) {
    const SvdResult s = svd(m);
    CMatrix out = CMatrix::Zero(m.cols(), m.rows());
    if (s.sigma.size() == 0) return out;
    const double cut = rcond * std::max(s.sigma(0), scale_floor);
    for (Eigen::Index k = 0; k < s.sigma.size(); ++k)
        if (s.sigma(k) > cut && s.sigma(k) > 0.0) out += (s.v.col(k) / s.sigma(k)) * s.u.col(k).adjoint();
    return out;
}

inline CMatrix matrix_power(const CMatrix& m, int k) {
    CMatrix out = identity(m.rows());
    for (int i = 0; i < k; ++i) out = out * m;
    return out;
}

/// A^D = A^k (A^(2k+1))^+ A^k with k >= index; k defaults to the matrix size.
/// The pseudoinverse cut is measured against ||A||^(2k+1), so a power that is
/// zero up to round-off (nilpotent A) is treated as zero.
inline CMatrix brute_drazin(const CMatrix& m, int k = -1, double rcond = 1e-10) {
    require_square(m, "brute_drazin");
    if (k < 0) k = static_cast<int>(m.rows());
    const CMatrix ak = matrix_power(m, k);
    const double floor = std::pow(spectral_norm(m), 2 * k + 1);
    return ak * brute_pinv(matrix_power(m, 2 * k + 1), rcond, floor) * ak;
}

/// Compatible range: A and A* agree on (ker A + ker A*)^perp.
inline bool brute_cor(const CMatrix& m, double tol = 1e-8) {
    require_square(m, "brute_cor");
    const Eigen::Index n = m.rows();
    const SubspaceBasis k1 = null_basis(m, tol);
    const SubspaceBasis k2 = null_basis(m.adjoint(), tol);
    CMatrix span(n, k1.dim() + k2.dim());
    span << k1.columns(), k2.columns();
    const SubspaceBasis perp = span.cols() == 0 ? SubspaceBasis(identity(n)) : null_basis(span.adjoint(), tol);
    if (perp.empty()) return true;
    const double scale = std::max(1.0, spectral_norm(m));
    return max_abs((m - m.adjoint()) * perp.columns()) <= tol * scale;
}

/// dim ker(P - Q - I) - dim ker(P - Q + I) by eigenvalue counting.
inline long brute_index(const CMatrix& p, const CMatrix& q, double radius = 1e-8) {
    const EigenSystem e = hermitian_eig(p - q);
    long index = 0;
    for (Eigen::Index k = 0; k < e.values.size(); ++k) {
        if (std::abs(e.values(k) - 1.0) <= radius) ++index;
        if (std::abs(e.values(k) + 1.0) <= radius) --index;
    }
    return index;
}

namespace detail {

inline double norm2(const Eigen::Matrix2cd& f) {
    return Eigen::JacobiSVD<Eigen::Matrix2cd>(f).singularValues()(0);
}

inline Eigen::Vector2cd unit_vector(double theta, double psi) {
    return {std::cos(theta), std::polar(std::sin(theta), psi)};
}

// Best ||p - v v*|| over unit v = (cos t, e^{i psi} sin t) with v* u v = 0,
// for fixed psi: scan t for sign changes of the constraint, then bisect.
inline double best_over_theta(const Eigen::Matrix2cd& p, const Eigen::Matrix2cd& u, double psi, int grid) {
    auto constraint = [&](double t) {
        const Eigen::Vector2cd v = unit_vector(t, psi);
        return (v.adjoint() * u * v)(0, 0).real();
    };
    auto distance = [&](double t) {
        const Eigen::Vector2cd v = unit_vector(t, psi);
        return norm2(p - v * v.adjoint());
    };
    double best = std::numeric_limits<double>::infinity();
    const double top = std::numbers::pi / 2.0;
    double t0 = 0.0, g0 = constraint(t0);
    if (g0 == 0.0) best = std::min(best, distance(t0));
    for (int i = 1; i <= grid; ++i) {
        const double t1 = top * i / grid;
        const double g1 = constraint(t1);
        if (g1 == 0.0) best = std::min(best, distance(t1));
        if (g0 * g1 < 0.0) {
            double lo = t0, hi = t1, glo = g0;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double gm = constraint(mid);
                if ((gm < 0.0) == (glo < 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            best = std::min(best, distance(0.5 * (lo + hi)));
        }
        t0 = t1;
        g0 = g1;
    }
    return best;
}

// min ||p - R|| over R in {0} and rank-one projections with R u R = 0.
inline double best_fiber_distance(const Eigen::Matrix2cd& p, const Eigen::Matrix2cd& u, int grid) {
    double best = norm2(p);  // R = 0
    const double two_pi = 2.0 * std::numbers::pi;
    int best_i = 0;
    for (int i = 0; i < grid; ++i) {
        const double d = best_over_theta(p, u, two_pi * i / grid, grid);
        if (d < best) {
            best = d;
            best_i = i;
        }
    }
    // Golden-section refinement in psi around the best grid cell.
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = two_pi * (best_i - 1) / grid, hi = two_pi * (best_i + 1) / grid;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = best_over_theta(p, u, x1, grid), f2 = best_over_theta(p, u, x2, grid);
    for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = best_over_theta(p, u, x1, grid);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = best_over_theta(p, u, x2, grid);
        }
    }
    return std::min({best, f1, f2});
}

} // namespace detail

/// Distance from P to the projections R of the algebra generated by P, Q with
/// R U R = 0 (U = 2Q - I), found by search. The fiber structure is rebuilt
/// geometrically: M = im P minus (im P & im Q) minus (im P & ker Q), e_j the
/// eigenvectors of the compression of Q to M and f_j ~ (I - P) Q e_j.
inline double brute_distance(const CMatrix& p, const CMatrix& q, int grid = 1000, double tol = 1e-8) {
    const Eigen::Index n = p.rows();
    const CMatrix id = identity(n);
    const CMatrix u = 2.0 * q - id;

    // Scalar blocks: R must be 0 or 1 there; keep the choices with R U R = 0.
    double dist = 0.0;
    const SubspaceBasis m00 = null_basis((id - p) + (id - q), tol, 1.0);
    const SubspaceBasis m01 = null_basis((id - p) + q, tol, 1.0);
    const SubspaceBasis m10 = null_basis(p + (id - q), tol, 1.0);
    const SubspaceBasis m11 = null_basis(p + q, tol, 1.0);
    for (const auto& [block, p_value, u_value] :
         {std::tuple{&m00, 1.0, 1.0}, std::tuple{&m01, 1.0, -1.0}, std::tuple{&m10, 0.0, 1.0},
          std::tuple{&m11, 0.0, -1.0}}) {
        if (block->empty()) continue;
        double best = std::numeric_limits<double>::infinity();
        for (double r : {0.0, 1.0})
            if (r * u_value * r == 0.0) best = std::min(best, std::abs(p_value - r));
        dist = std::max(dist, best);
    }

    const SubspaceBasis range_p = null_basis(id - p, tol, 1.0);
    CMatrix taken(n, m00.dim() + m01.dim());
    taken << m00.columns(), m01.columns();
    const SubspaceBasis m = complement_within(SubspaceBasis(taken, 1e-8), range_p);
    if (m.empty()) return dist;
    const EigenSystem eh = hermitian_eig(CMatrix(m.columns().adjoint() * q * m.columns()));
    for (Eigen::Index j = 0; j < m.dim(); ++j) {
        const CVector e = m.columns() * eh.vectors.col(j);
        CVector f = (id - p) * q * e;
        f /= f.norm();
        CMatrix frame(n, 2);
        frame << e, f;
        const Eigen::Matrix2cd p_fiber = frame.adjoint() * p * frame;
        const Eigen::Matrix2cd u_fiber = frame.adjoint() * u * frame;
        dist = std::max(dist, detail::best_fiber_distance(p_fiber, u_fiber, grid));
    }
    return dist;
}

} // namespace halmos::oracle
