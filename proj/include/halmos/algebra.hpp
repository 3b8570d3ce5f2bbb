#pragma once

// Elements of the algebra generated by P and Q, stored in the adapted basis
// of a HalmosDecomposition: one scalar a_ij per nonzero block M_ij and one
// 2x2 matrix Phi(h_j) per fiber. Every question about an element (spectrum,
// norm, kernel, generalized inverses, CoR) reduces to these small pieces.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "halmos/canonical.hpp"
#include "halmos/error.hpp"
#include "halmos/numerics.hpp"

namespace halmos {

using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;
using DecompositionPtr = std::shared_ptr<const HalmosDecomposition>;

struct Fiber {
    Mat2 phi;
    double lambda = 0.0;
};

/// Block order used for the scalar coefficients: M00, M01, M10, M11.
using Coefficients = std::array<std::optional<Complex>, 4>;

class AlgebraElement {
public:
    /// Coefficients for blocks with d_ij = 0 are dropped; `fibers` must have m entries.
    AlgebraElement(DecompositionPtr dec, const std::array<Complex, 4>& coeffs, std::vector<Mat2> fibers)
        : dec_(std::move(dec)) {
        if (!dec_) fail(ErrorKind::InvalidParams, "AlgebraElement without decomposition");
        if (static_cast<Eigen::Index>(fibers.size()) != dec_->dims.m)
            fail(ErrorKind::SizeMismatch, "expected " + std::to_string(dec_->dims.m) + " fibers, got " +
                                              std::to_string(fibers.size()));
        for (int b = 0; b < 4; ++b)
            if (dec_->dims.block_size(b / 2, b % 2) > 0) coeffs_[b] = coeffs[b];
        fibers_.reserve(fibers.size());
        for (std::size_t j = 0; j < fibers.size(); ++j) {
            if (!fibers[j].allFinite()) fail(ErrorKind::NonFinite, "fiber " + std::to_string(j));
            fibers_.push_back({fibers[j], dec_->h_values[j]});
        }
    }

    /// Element whose fiber at h is phi(h).
    template <class FiberFn>
    static AlgebraElement from_function(DecompositionPtr dec, const std::array<Complex, 4>& coeffs, FiberFn&& phi) {
        std::vector<Mat2> fibers;
        for (double t : dec->h_values) fibers.push_back(phi(t));
        return AlgebraElement(std::move(dec), coeffs, std::move(fibers));
    }

    static AlgebraElement zero(DecompositionPtr dec) {
        return from_function(std::move(dec), {0.0, 0.0, 0.0, 0.0}, [](double) { return Mat2::Zero().eval(); });
    }
    static AlgebraElement identity(DecompositionPtr dec) {
        return from_function(std::move(dec), {1.0, 1.0, 1.0, 1.0}, [](double) { return Mat2::Identity().eval(); });
    }
    static AlgebraElement p_symbol(DecompositionPtr dec) {
        return from_function(std::move(dec), {1.0, 1.0, 0.0, 0.0}, [](double) {
            Mat2 f;
            f << 1.0, 0.0, 0.0, 0.0;
            return f;
        });
    }
    static AlgebraElement q_symbol(DecompositionPtr dec) {
        return from_function(std::move(dec), {1.0, 0.0, 1.0, 0.0}, [](double t) {
            const double s = std::sqrt(t * (1.0 - t));
            Mat2 f;
            f << t, s, s, 1.0 - t;
            return f;
        });
    }

    const DecompositionPtr& decomposition() const noexcept { return dec_; }
    const HalmosDecomposition& dec() const noexcept { return *dec_; }
    const Coefficients& coefficients() const noexcept { return coeffs_; }
    const std::optional<Complex>& coefficient(int i, int j) const noexcept { return coeffs_[2 * i + j]; }
    const std::vector<Fiber>& fibers() const noexcept { return fibers_; }

    AlgebraElement& operator+=(const AlgebraElement& o) { return combine(o, [](auto x, auto y) { return x + y; }); }
    AlgebraElement& operator-=(const AlgebraElement& o) { return combine(o, [](auto x, auto y) { return x - y; }); }
    AlgebraElement& operator*=(const AlgebraElement& o) {
        return combine(o, [](const auto& x, const auto& y) {
            using T = std::decay_t<decltype(x)>;
            return T(x * y);
        });
    }
    AlgebraElement& operator*=(Complex s) {
        for (auto& c : coeffs_)
            if (c) *c *= s;
        for (auto& f : fibers_) f.phi *= s;
        return *this;
    }

    friend AlgebraElement operator+(AlgebraElement x, const AlgebraElement& y) { return x += y; }
    friend AlgebraElement operator-(AlgebraElement x, const AlgebraElement& y) { return x -= y; }
    friend AlgebraElement operator*(AlgebraElement x, const AlgebraElement& y) { return x *= y; }
    friend AlgebraElement operator*(Complex s, AlgebraElement x) { return x *= s; }
    friend AlgebraElement operator*(AlgebraElement x, Complex s) { return x *= s; }
    friend AlgebraElement operator-(AlgebraElement x) { return x *= -1.0; }

    friend AlgebraElement adjoint(AlgebraElement x) {
        for (auto& c : x.coeffs_)
            if (c) *c = std::conj(*c);
        for (auto& f : x.fibers_) f.phi = f.phi.adjoint().eval();
        return x;
    }

private:
    template <class Op>
    AlgebraElement& combine(const AlgebraElement& o, Op op) {
        if (dec_ != o.dec_) fail(ErrorKind::DecompositionMismatch, "elements belong to different decompositions");
        for (int b = 0; b < 4; ++b)
            if (coeffs_[b]) coeffs_[b] = op(*coeffs_[b], *o.coeffs_[b]);
        for (std::size_t j = 0; j < fibers_.size(); ++j) fibers_[j].phi = op(fibers_[j].phi, o.fibers_[j].phi);
        return *this;
    }

    DecompositionPtr dec_;
    Coefficients coeffs_{};
    std::vector<Fiber> fibers_;
};

inline AlgebraElement scale(AlgebraElement x, Complex s) { return x *= s; }

/// Product of generators read left to right, e.g. "PQP"; whitespace ignored.
inline AlgebraElement symbol_of_word(std::string_view word, const DecompositionPtr& dec) {
    AlgebraElement acc = AlgebraElement::identity(dec);
    for (char ch : word) {
        switch (ch) {
        case 'P': acc *= AlgebraElement::p_symbol(dec); break;
        case 'Q': acc *= AlgebraElement::q_symbol(dec); break;
        case 'I': break;
        case ' ': case '\t': break;
        default: fail(ErrorKind::InvalidParams, std::string("symbol_of_word: unexpected '") + ch + "'");
        }
    }
    return acc;
}

struct WordTerm {
    Complex coefficient;
    std::string word;
};

inline AlgebraElement symbol_of_combination(std::span<const WordTerm> terms, const DecompositionPtr& dec) {
    AlgebraElement acc = AlgebraElement::zero(dec);
    for (const auto& term : terms) acc += term.coefficient * symbol_of_word(term.word, dec);
    return acc;
}

/// The element as a matrix in the original coordinates.
inline CMatrix assemble(const AlgebraElement& x) {
    const HalmosDecomposition& dec = x.dec();
    const Dims& d = dec.dims;
    CMatrix block = CMatrix::Zero(d.n(), d.n());
    for (int b = 0; b < 4; ++b) {
        if (!x.coefficients()[b]) continue;
        const Eigen::Index off = d.block_offset(b / 2, b % 2);
        for (Eigen::Index k = 0; k < d.block_size(b / 2, b % 2); ++k) block(off + k, off + k) = *x.coefficients()[b];
    }
    for (Eigen::Index j = 0; j < d.m; ++j) {
        const Mat2& f = x.fibers()[static_cast<std::size_t>(j)].phi;
        const Eigen::Index r[2] = {d.offset_m() + j, d.offset_mprime() + j};
        for (int u = 0; u < 2; ++u)
            for (int v = 0; v < 2; ++v) block(r[u], r[v]) = f(u, v);
    }
    return dec.basis * block * dec.basis.adjoint();
}

namespace detail {

inline std::array<Complex, 2> eig2(const Mat2& f) {
    const Complex half_trace = 0.5 * (f(0, 0) + f(1, 1));
    const Complex half_diff = 0.5 * (f(0, 0) - f(1, 1));
    const Complex root = std::sqrt(half_diff * half_diff + f(0, 1) * f(1, 0));
    return {half_trace + root, half_trace - root};
}

struct Svd2 {
    Eigen::Vector2d sigma;  // descending
    Mat2 u;
    Mat2 v;
};

inline Svd2 svd2(const Mat2& f) {
    Eigen::JacobiSVD<Mat2> s(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {s.singularValues(), s.matrixU(), s.matrixV()};
}

inline void push_unique(std::vector<Complex>& out, Complex z, double radius) {
    for (const Complex& w : out)
        if (std::abs(w - z) <= radius) return;
    out.push_back(z);
}

inline bool in_gray_band(double value, double cut) { return value > cut / 10.0 && value <= cut * 10.0; }

} // namespace detail

/// Distinct eigenvalues; values closer than `radius` are merged.
inline std::vector<Complex> spectrum(const AlgebraElement& x, double radius = 1e-10) {
    std::vector<Complex> out;
    for (const auto& c : x.coefficients())
        if (c) detail::push_unique(out, *c, radius);
    for (const auto& f : x.fibers())
        for (Complex z : detail::eig2(f.phi)) detail::push_unique(out, z, radius);
    return out;
}

inline double operator_norm(const AlgebraElement& x) {
    double best = 0.0;
    for (const auto& c : x.coefficients())
        if (c) best = std::max(best, std::abs(*c));
    for (const auto& f : x.fibers()) best = std::max(best, detail::svd2(f.phi).sigma(0));
    return best;
}

inline Complex trace(const AlgebraElement& x) {
    const Dims& d = x.dec().dims;
    Complex sum = 0.0;
    for (int b = 0; b < 4; ++b)
        if (x.coefficients()[b]) sum += *x.coefficients()[b] * static_cast<double>(d.block_size(b / 2, b % 2));
    for (const auto& f : x.fibers()) sum += f.phi.trace();
    return sum;
}

/// Absolute cut-off for "is zero" decisions: tol relative to the element norm.
inline double zero_cut(const AlgebraElement& x, double tol) {
    const double norm = operator_norm(x);
    return norm > 0.0 ? tol * norm : tol;
}

/// Fiber indices partitioned by rank; rank one is further split by the trace.
struct FiberRankProfile {
    std::vector<int> ranks;
    std::vector<Eigen::Index> delta0, delta1, delta2;
    std::vector<Eigen::Index> delta10;  // rank one, trace ~ 0 (nilpotent)
    std::vector<Eigen::Index> delta11;  // rank one, trace != 0
    std::array<bool, 4> zero_coefficient{};  // present a_ij judged zero
    bool indeterminate = false;              // some decision fell within a factor 10 of the cut
    double cut = 0.0;
};

inline FiberRankProfile rank_profile(const AlgebraElement& x, double tol = 1e-8) {
    FiberRankProfile p;
    p.cut = zero_cut(x, tol);
    for (int b = 0; b < 4; ++b) {
        const auto& c = x.coefficients()[b];
        if (!c) continue;
        p.zero_coefficient[b] = std::abs(*c) <= p.cut;
        p.indeterminate |= detail::in_gray_band(std::abs(*c), p.cut);
    }
    for (std::size_t j = 0; j < x.fibers().size(); ++j) {
        const Mat2& f = x.fibers()[j].phi;
        const auto s = detail::svd2(f).sigma;
        int r = 0;
        for (int k = 0; k < 2; ++k) {
            if (s(k) > p.cut) ++r;
            p.indeterminate |= detail::in_gray_band(s(k), p.cut);
        }
        p.ranks.push_back(r);
        const auto idx = static_cast<Eigen::Index>(j);
        if (r == 0) p.delta0.push_back(idx);
        else if (r == 2) p.delta2.push_back(idx);
        else {
            p.delta1.push_back(idx);
            const double tr = std::abs(f.trace());
            p.indeterminate |= detail::in_gray_band(tr, p.cut);
            (tr <= p.cut ? p.delta10 : p.delta11).push_back(idx);
        }
    }
    return p;
}

/// Kernel direction of a rank-one fiber from the closed form
/// (u chi_1, -chi_0); empty where the phase u is undefined.
inline std::optional<Vec2> kernel_closed_form(const Mat2& f, double tol = 1e-8) {
    const double phi = f.squaredNorm();
    if (phi <= 0.0) return std::nullopt;
    const double chi0 = std::sqrt((std::norm(f(0, 0)) + std::norm(f(1, 0))) / phi);
    const double chi1 = std::sqrt((std::norm(f(0, 1)) + std::norm(f(1, 1))) / phi);
    const Complex z = f(0, 1) * std::conj(f(0, 0)) + f(1, 1) * std::conj(f(1, 0));
    if (std::abs(z) <= tol * phi) return std::nullopt;
    const Complex u = z / std::abs(z);
    return Vec2(u * chi1, -chi0);
}

inline SubspaceBasis kernel_basis(const AlgebraElement& x, double tol = 1e-8) {
    const HalmosDecomposition& dec = x.dec();
    const Dims& d = dec.dims;
    const FiberRankProfile prof = rank_profile(x, tol);
    std::vector<CVector> cols;
    for (int b = 0; b < 4; ++b) {
        if (!x.coefficients()[b] || !prof.zero_coefficient[b]) continue;
        const Eigen::Index off = d.block_offset(b / 2, b % 2);
        for (Eigen::Index k = 0; k < d.block_size(b / 2, b % 2); ++k) cols.push_back(dec.basis.col(off + k));
    }
    for (Eigen::Index j = 0; j < d.m; ++j) {
        const auto tm = dec.basis.col(d.offset_m() + j);
        const auto tmp = dec.basis.col(d.offset_mprime() + j);
        const int r = prof.ranks[static_cast<std::size_t>(j)];
        if (r == 0) {
            cols.push_back(tm);
            cols.push_back(tmp);
        } else if (r == 1) {
            const Vec2 v = detail::svd2(x.fibers()[static_cast<std::size_t>(j)].phi).v.col(1);
            cols.push_back(v(0) * tm + v(1) * tmp);
        }
    }
    CMatrix basis(d.n(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = cols[k];
    return SubspaceBasis(std::move(basis), 1e-9);
}

inline bool is_invertible(const AlgebraElement& x, double tol = 1e-8) {
    const FiberRankProfile p = rank_profile(x, tol);
    for (bool z : p.zero_coefficient)
        if (z) return false;
    return p.delta2.size() == x.fibers().size();
}

inline AlgebraElement inverse(const AlgebraElement& x, double tol = 1e-8) {
    if (!is_invertible(x, tol)) fail(ErrorKind::SingularElement, "element is not invertible");
    std::array<Complex, 4> c{};
    for (int b = 0; b < 4; ++b)
        if (x.coefficients()[b]) c[b] = 1.0 / *x.coefficients()[b];
    std::vector<Mat2> fibers;
    for (const auto& f : x.fibers()) fibers.push_back(f.phi.inverse());
    return AlgebraElement(x.decomposition(), c, std::move(fibers));
}

inline AlgebraElement moore_penrose(const AlgebraElement& x, double tol = 1e-8) {
    const double cut = zero_cut(x, tol);
    std::array<Complex, 4> c{};
    for (int b = 0; b < 4; ++b) {
        const auto& a = x.coefficients()[b];
        if (a && std::abs(*a) > cut) c[b] = 1.0 / *a;
    }
    std::vector<Mat2> fibers;
    for (const auto& f : x.fibers()) {
        const auto s = detail::svd2(f.phi);
        Mat2 pinv = Mat2::Zero();
        for (int k = 0; k < 2; ++k)
            if (s.sigma(k) > cut) pinv += (s.v.col(k) / s.sigma(k)) * s.u.col(k).adjoint();
        fibers.push_back(pinv);
    }
    return AlgebraElement(x.decomposition(), c, std::move(fibers));
}

struct DrazinResult {
    int index = 0;
    AlgebraElement inverse;
    // Drazin-invertibility margins: min |det| over rank-two fibers and
    // min |trace| over rank-one fibers with nonzero trace (+inf when empty).
    double det_min = std::numeric_limits<double>::infinity();
    double trace_min = std::numeric_limits<double>::infinity();
};

/// Fiberwise: rank two -> inverse; rank one with trace tau -> F / tau^2;
/// nilpotent or zero -> 0.
inline DrazinResult drazin(const AlgebraElement& x, double tol = 1e-8) {
    const FiberRankProfile p = rank_profile(x, tol);
    std::array<Complex, 4> c{};
    bool coefficient_singular = false;
    for (int b = 0; b < 4; ++b) {
        const auto& a = x.coefficients()[b];
        if (!a) continue;
        if (p.zero_coefficient[b]) coefficient_singular = true;
        else c[b] = 1.0 / *a;
    }
    std::vector<Mat2> fibers(x.fibers().size(), Mat2::Zero());
    double det_min = std::numeric_limits<double>::infinity();
    double trace_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index j : p.delta2) {
        const Mat2& f = x.fibers()[static_cast<std::size_t>(j)].phi;
        fibers[static_cast<std::size_t>(j)] = f.inverse();
        det_min = std::min(det_min, std::abs(f.determinant()));
    }
    for (Eigen::Index j : p.delta11) {
        const Mat2& f = x.fibers()[static_cast<std::size_t>(j)].phi;
        const Complex tau = f.trace();
        fibers[static_cast<std::size_t>(j)] = f / (tau * tau);
        trace_min = std::min(trace_min, std::abs(tau));
    }
    int index = 1;
    if (!coefficient_singular && p.delta2.size() == x.fibers().size()) index = 0;
    else if (!p.delta10.empty()) index = 2;
    return {index, AlgebraElement(x.decomposition(), c, std::move(fibers)), det_min, trace_min};
}

struct CorResult {
    bool holds = true;
    bool indeterminate = false;
    std::vector<bool> fiber_ok;
};

/// Compatible-range test: real coefficients, and every fiber either
/// Hermitian or singular but not normal.
inline CorResult is_cor(const AlgebraElement& x, double tol = 1e-8) {
    CorResult r;
    const double cut = zero_cut(x, tol);
    for (const auto& a : x.coefficients()) {
        if (!a) continue;
        const double im = std::abs(a->imag());
        if (im > cut) r.holds = false;
        r.indeterminate |= detail::in_gray_band(im, cut);
    }
    for (const auto& f : x.fibers()) {
        const Mat2& phi = f.phi;
        const double herm = (phi - phi.adjoint()).cwiseAbs().maxCoeff();
        bool ok = herm <= cut;
        r.indeterminate |= detail::in_gray_band(herm, cut);
        if (!ok) {
            const double smin = detail::svd2(phi).sigma(1);
            const double normal_defect = (phi * phi.adjoint() - phi.adjoint() * phi).cwiseAbs().maxCoeff();
            r.indeterminate |= detail::in_gray_band(smin, cut);
            if (smin <= cut) {
                r.indeterminate |= detail::in_gray_band(normal_defect, cut);
                ok = normal_defect > cut;
            }
        }
        r.fiber_ok.push_back(ok);
        if (!ok) r.holds = false;
    }
    return r;
}

} // namespace halmos
