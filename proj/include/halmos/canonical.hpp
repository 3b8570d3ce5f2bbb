#pragma once

// Two-projection canonical form.
//
// Given orthogonal projections P and Q, halmos_decompose finds a unitary T
// whose columns are ordered
//
//     M00 | M01 | M10 | M11 | M | M'
//
// such that T* P T = I + I + 0 + 0 + [I 0; 0 0] (x) 1 and
// T* Q T = I + 0 + I + 0 + [h, sqrt(h(1-h)); sqrt(h(1-h)), 1-h] per fiber,
// where the j-th fiber is spanned by the j-th M column and the j-th M'
// column. The decomposition is built from the relations A^2 + B^2 = I and
// AB + BA = 0 for A = P - Q, B = I - P - Q.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "halmos/error.hpp"
#include "halmos/numerics.hpp"

namespace halmos {

/// Block sizes of the canonical form; n = d00 + d01 + d10 + d11 + 2m.
struct Dims {
    Eigen::Index d00 = 0;
    Eigen::Index d01 = 0;
    Eigen::Index d10 = 0;
    Eigen::Index d11 = 0;
    Eigen::Index m = 0;

    Eigen::Index n() const noexcept { return d00 + d01 + d10 + d11 + 2 * m; }
    Eigen::Index offset_m() const noexcept { return d00 + d01 + d10 + d11; }
    Eigen::Index offset_mprime() const noexcept { return offset_m() + m; }

    /// Size and offset of the scalar block M_ij.
    Eigen::Index block_size(int i, int j) const noexcept {
        const Eigen::Index sizes[4] = {d00, d01, d10, d11};
        return sizes[2 * i + j];
    }
    Eigen::Index block_offset(int i, int j) const noexcept {
        const Eigen::Index sizes[4] = {d00, d01, d10, d11};
        Eigen::Index off = 0;
        for (int k = 0; k < 2 * i + j; ++k) off += sizes[k];
        return off;
    }

    friend bool operator==(const Dims&, const Dims&) = default;
};

/// A validated pair of orthogonal projections of equal size.
class ProjectionPair {
public:
    const CMatrix& p() const noexcept { return p_; }
    const CMatrix& q() const noexcept { return q_; }
    Eigen::Index size() const noexcept { return p_.rows(); }

    CMatrix difference() const { return p_ - q_; }                          // A = P - Q
    CMatrix complement_sum() const { return identity(size()) - p_ - q_; }   // B = I - P - Q

private:
    ProjectionPair(CMatrix p, CMatrix q) : p_(std::move(p)), q_(std::move(q)) {}
    friend ProjectionPair validate_pair(const CMatrix&, const CMatrix&, const Tolerances&);

    CMatrix p_;
    CMatrix q_;
};

namespace detail {

inline void check_projection(const CMatrix& x, const char* name, const Tolerances& tol) {
    if (!all_finite(x)) fail(ErrorKind::NonFinite, std::string(name) + " has non-finite entries");
    const double herm = hermitian_defect(x);
    if (herm > tol.hermitian)
        fail(ErrorKind::NotHermitian, std::string(name) + " != " + name + "*, defect " + format_value(herm));
    const double idem = max_abs(x * x - x);
    if (idem > tol.idempotent)
        fail(ErrorKind::NotIdempotent, std::string(name) + "^2 != " + name + ", defect " + format_value(idem));
}

} // namespace detail

inline ProjectionPair validate_pair(const CMatrix& p, const CMatrix& q, const Tolerances& tol = {}) {
    if (p.rows() != p.cols() || q.rows() != q.cols() || p.rows() != q.rows())
        fail(ErrorKind::SizeMismatch, "P is " + std::to_string(p.rows()) + "x" + std::to_string(p.cols()) +
                                          ", Q is " + std::to_string(q.rows()) + "x" + std::to_string(q.cols()));
    detail::check_projection(p, "P", tol);
    detail::check_projection(q, "Q", tol);
    return ProjectionPair(p, q);
}

/// M00 = im P & im Q, M01 = im P & ker Q, M10 = ker P & im Q, M11 = ker P & ker Q,
/// each read off as the null space of a positive semidefinite sum.
inline SubspaceBasis subspace_m(const ProjectionPair& pair, int i, int j, const Tolerances& tol = {}) {
    const CMatrix id = identity(pair.size());
    const CMatrix p_part = i == 0 ? CMatrix(id - pair.p()) : pair.p();
    const CMatrix q_part = j == 0 ? CMatrix(id - pair.q()) : pair.q();
    return null_basis(p_part + q_part, tol.gap, 1.0);
}

struct HalmosDecomposition {
    CMatrix basis;                  // T, unitary; column blocks M00 | M01 | M10 | M11 | M | M'
    Dims dims;
    std::vector<double> h_values;   // ascending, one per fiber, each inside (0, 1)

    Eigen::Index size() const noexcept { return dims.n(); }
};

/// The canonical P and Q in the adapted basis.
inline CMatrix canonical_p(const Dims& d) {
    CMatrix c = CMatrix::Zero(d.n(), d.n());
    for (Eigen::Index k = 0; k < d.d00 + d.d01; ++k) c(k, k) = 1.0;
    for (Eigen::Index j = 0; j < d.m; ++j) c(d.offset_m() + j, d.offset_m() + j) = 1.0;
    return c;
}

inline CMatrix canonical_q(const Dims& d, const std::vector<double>& h) {
    CMatrix c = CMatrix::Zero(d.n(), d.n());
    for (Eigen::Index k = 0; k < d.d00; ++k) c(k, k) = 1.0;
    for (Eigen::Index k = d.d00 + d.d01; k < d.d00 + d.d01 + d.d10; ++k) c(k, k) = 1.0;
    for (Eigen::Index j = 0; j < d.m; ++j) {
        const double t = h[static_cast<std::size_t>(j)];
        const double s = std::sqrt(t * (1.0 - t));
        const Eigen::Index a = d.offset_m() + j;
        const Eigen::Index b = d.offset_mprime() + j;
        c(a, a) = t;
        c(a, b) = s;
        c(b, a) = s;
        c(b, b) = 1.0 - t;
    }
    return c;
}

inline ProjectionPair reconstruct(const HalmosDecomposition& dec, const Tolerances& tol = {}) {
    const CMatrix& t = dec.basis;
    return validate_pair(t * canonical_p(dec.dims) * t.adjoint(),
                         t * canonical_q(dec.dims, dec.h_values) * t.adjoint(), tol);
}

namespace detail {

// Unit phase that makes the first non-negligible entry of v real positive.
inline Complex leading_phase(const CVector& v) {
    const double scale = v.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (std::abs(v(k)) > 1e-8 * scale) return std::conj(v(k)) / std::abs(v(k));
    }
    return 1.0;
}

inline void normalize_columns(CMatrix& block) {
    for (Eigen::Index c = 0; c < block.cols(); ++c) block.col(c) *= leading_phase(block.col(c));
}

inline CMatrix select_columns(const CMatrix& vectors, const std::vector<Eigen::Index>& idx) {
    CMatrix out(vectors.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = vectors.col(idx[k]);
    return out;
}

inline void check_block(const CMatrix& block, double bound, const char* name) {
    const double r = max_abs(block);
    if (r > bound)
        fail(ErrorKind::ToleranceViolation, std::string(name) + " should vanish, residual " + format_value(r));
}

} // namespace detail

inline HalmosDecomposition halmos_decompose(const ProjectionPair& pair, const Tolerances& tol = {}) {
    using detail::check_block;
    using detail::select_columns;

    const Eigen::Index n = pair.size();
    const CMatrix id = identity(n);
    const CMatrix a = pair.difference();
    const CMatrix b = pair.complement_sum();
    const double bound = tol.residual * static_cast<double>(std::max<Eigen::Index>(1, n));

    // Supersymmetry: A^2 + B^2 = I, AB + BA = 0.
    const double ss_square = max_abs(a * a + b * b - id);
    const double ss_anti = max_abs(a * b + b * a);
    if (ss_square > 10 * bound || ss_anti > 10 * bound)
        fail(ErrorKind::NotAPair, "supersymmetry residuals " + format_value(ss_square) + ", " +
                                      format_value(ss_anti));

    // Spectral split of A: +1 -> M01, -1 -> M10, 0 -> ker A, rest by sign.
    const EigenSystem ea = hermitian_eig(a, tol);
    std::vector<Eigen::Index> plus_one, minus_one, kernel, positive, negative;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double v = ea.values(k);
        const double nearest = std::min({std::abs(v - 1.0), std::abs(v + 1.0), std::abs(v)});
        if (std::abs(v - 1.0) <= tol.gap) plus_one.push_back(k);
        else if (std::abs(v + 1.0) <= tol.gap) minus_one.push_back(k);
        else if (std::abs(v) <= tol.gap) kernel.push_back(k);
        else if (nearest < tol.gray)
            fail(ErrorKind::ToleranceViolation,
                 "eigenvalue " + format_value(v) + " of P-Q lies in the ambiguous band around {-1,0,1}");
        else if (v > 0) positive.push_back(k);
        else negative.push_back(k);
    }
    CMatrix m01 = select_columns(ea.vectors, plus_one);
    CMatrix m10 = select_columns(ea.vectors, minus_one);
    const CMatrix ker = select_columns(ea.vectors, kernel);
    const CMatrix vp = select_columns(ea.vectors, positive);
    CMatrix vn = select_columns(ea.vectors, negative);

    // ker A is B-invariant and B is an involution there: -1 -> M00, +1 -> M11.
    std::vector<Eigen::Index> b_minus, b_plus;
    CMatrix ker_vectors(n, 0);
    if (ker.cols() > 0) {
        const EigenSystem eb = hermitian_eig(CMatrix(ker.adjoint() * b * ker), tol);
        for (Eigen::Index k = 0; k < eb.values.size(); ++k) {
            const double v = eb.values(k);
            if (std::abs(std::abs(v) - 1.0) > 10 * bound)
                fail(ErrorKind::ToleranceViolation, "B restricted to ker A has eigenvalue " + format_value(v));
            (v < 0 ? b_minus : b_plus).push_back(k);
        }
        ker_vectors = ker * eb.vectors;
    }
    CMatrix m00 = select_columns(ker_vectors, b_minus);
    CMatrix m11 = select_columns(ker_vectors, b_plus);

    if (vp.cols() != vn.cols())
        fail(ErrorKind::ToleranceViolation, "positive and negative spectral parts of P-Q differ in dimension");
    const Eigen::Index m = vp.cols();

    check_block(vp.adjoint() * b * vp, 10 * bound, "B11");
    check_block(vn.adjoint() * b * vn, 10 * bound, "B22");
    check_block(ker.adjoint() * b * vp, 10 * bound, "B01");
    check_block(ker.adjoint() * b * vn, 10 * bound, "B02");

    CMatrix fiber_m(n, m), fiber_mprime(n, m);
    std::vector<double> h(static_cast<std::size_t>(m));
    if (m > 0) {
        // Polar form B12 = C V; the similarity diag[I, V] turns B into [0 C; C 0].
        const CMatrix b12 = vp.adjoint() * b * vn;
        CMatrix v;
        try {
            v = polar_unitary_part(b12);
        } catch (const Error& e) {
            fail(ErrorKind::ToleranceViolation, std::string("B12 is not invertible: ") + e.what());
        }
        const CMatrix im = identity(m);
        const CMatrix c = psd_sqrt(CMatrix(b12 * b12.adjoint()), tol);
        const CMatrix s = psd_sqrt(CMatrix(im - c * c), tol);
        const CMatrix a_plus = vp.adjoint() * a * vp;
        const CMatrix a_minus = -(vn.adjoint() * a * vn);
        check_block(a_plus - s, 10 * bound, "A+ - S");
        check_block(v * a_minus * v.adjoint() - s, 10 * bound, "V A- V* - S");
        vn = vn * v.adjoint();

        // Involution J = (1/sqrt 2)(I+S)^(-1/2) [I+S, -C; -C, -(I+S)] takes
        // P to diag[I, 0] and Q to [C^2, CS; CS, S^2].
        const CMatrix ips = im + s;
        const CMatrix k = std::sqrt(0.5) * psd_sqrt(CMatrix(ips.inverse()), tol);
        const CMatrix kc = k * c;
        const CMatrix kips = k * ips;
        fiber_m = vp * kips - vn * kc;
        fiber_mprime = -vp * kc - vn * kips;

        // H = C^2; its eigenbasis is folded into both fiber blocks.
        const EigenSystem eh = hermitian_eig(CMatrix(c * c), tol);
        for (Eigen::Index j = 0; j < m; ++j) {
            const double t = eh.values(j);
            if (t < tol.gap || t > 1.0 - tol.gap)
                fail(ErrorKind::ToleranceViolation, "eigenvalue " + format_value(t) + " of H too close to 0 or 1");
            h[static_cast<std::size_t>(j)] = t;
        }
        fiber_m = fiber_m * eh.vectors;
        fiber_mprime = fiber_mprime * eh.vectors;
        for (Eigen::Index j = 0; j < m; ++j) {
            const Complex phase = detail::leading_phase(fiber_m.col(j));
            fiber_m.col(j) *= phase;
            fiber_mprime.col(j) *= phase;
        }
    }
    detail::normalize_columns(m00);
    detail::normalize_columns(m01);
    detail::normalize_columns(m10);
    detail::normalize_columns(m11);

    HalmosDecomposition dec;
    dec.dims = Dims{m00.cols(), m01.cols(), m10.cols(), m11.cols(), m};
    dec.h_values = std::move(h);
    dec.basis.resize(n, n);
    dec.basis << m00, m01, m10, m11, fiber_m, fiber_mprime;

    const CMatrix& t = dec.basis;
    const double rp = max_abs(t * canonical_p(dec.dims) * t.adjoint() - pair.p());
    const double rq = max_abs(t * canonical_q(dec.dims, dec.h_values) * t.adjoint() - pair.q());
    if (rp > 10 * bound || rq > 10 * bound)
        fail(ErrorKind::ToleranceViolation, "reconstruction residuals " + format_value(rp) + ", " + format_value(rq));
    return dec;
}

struct RandomPairSpec {
    Dims dims;
    std::vector<double> h_values;
    std::uint64_t seed = 0;
};

/// Haar-distributed unitary from a QR of a complex Gaussian matrix.
template <class Rng>
CMatrix random_unitary(Eigen::Index n, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix g(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = 0; r < n; ++r) g(r, c) = Complex(normal(rng), normal(rng));
    if (n == 0) return g;
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    const CMatrix r = qr.matrixQR();
    for (Eigen::Index k = 0; k < n; ++k) {
        const double mag = std::abs(r(k, k));
        if (mag > 0) q.col(k) *= r(k, k) / mag;
    }
    return q;
}

struct GeneratedPair {
    ProjectionPair pair;
    HalmosDecomposition truth;
};

inline GeneratedPair generate_pair(const RandomPairSpec& spec, const Tolerances& tol = {}) {
    const Dims& d = spec.dims;
    if (d.d00 < 0 || d.d01 < 0 || d.d10 < 0 || d.d11 < 0 || d.m < 0)
        fail(ErrorKind::InvalidSpec, "negative dimension");
    if (static_cast<Eigen::Index>(spec.h_values.size()) != d.m)
        fail(ErrorKind::InvalidSpec, "expected " + std::to_string(d.m) + " h values, got " +
                                         std::to_string(spec.h_values.size()));
    for (double t : spec.h_values)
        if (!(t > 0.0 && t < 1.0)) fail(ErrorKind::InvalidSpec, "h value " + format_value(t) + " outside (0,1)");

    std::mt19937_64 rng(spec.seed);
    HalmosDecomposition truth;
    truth.dims = d;
    truth.h_values = spec.h_values;
    std::sort(truth.h_values.begin(), truth.h_values.end());
    truth.basis = random_unitary(d.n(), rng);
    const CMatrix& u = truth.basis;
    const CMatrix p = u * canonical_p(d) * u.adjoint();
    const CMatrix q = u * canonical_q(d, truth.h_values) * u.adjoint();
    return {validate_pair(0.5 * (p + p.adjoint()), 0.5 * (q + q.adjoint()), tol), std::move(truth)};
}

} // namespace halmos
