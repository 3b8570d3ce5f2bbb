#pragma once

// Pair-level quantities read off the canonical form: spectra of P - Q and
// PQ + QP, the Fredholm index and traces of powers of P - Q, the distance from
// P to projections orthogonal to their symmetry, and unitaries U with
// UP = QU, UQ = PU.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "halmos/algebra.hpp"
#include "halmos/canonical.hpp"
#include "halmos/error.hpp"
#include "halmos/numerics.hpp"

namespace halmos {

namespace detail {

inline void push_unique_real(std::vector<double>& out, double v, double radius = 1e-10) {
    for (double w : out)
        if (std::abs(w - v) <= radius) return;
    out.push_back(v);
}

} // namespace detail

/// sigma(P - Q) = {+-sqrt(1 - h)} plus 1, -1, 0 when M01, M10, M00 + M11 are nonzero.
inline std::vector<double> diff_spectrum(const HalmosDecomposition& dec) {
    const Dims& d = dec.dims;
    std::vector<double> out;
    for (double t : dec.h_values) {
        detail::push_unique_real(out, std::sqrt(1.0 - t));
        detail::push_unique_real(out, -std::sqrt(1.0 - t));
    }
    if (d.d01 > 0) detail::push_unique_real(out, 1.0);
    if (d.d10 > 0) detail::push_unique_real(out, -1.0);
    if (d.d00 + d.d11 > 0) detail::push_unique_real(out, 0.0);
    std::sort(out.begin(), out.end());
    return out;
}

/// ||PQ||: 1 on M00, sqrt(h) on a fiber, 0 elsewhere.
inline double pq_norm(const HalmosDecomposition& dec) {
    double best = dec.dims.d00 > 0 ? 1.0 : 0.0;
    for (double t : dec.h_values) best = std::max(best, std::sqrt(t));
    return best;
}

struct AnticommutatorAnalysis {
    std::vector<double> spectrum;  // ascending
    double norm = 0.0;
    double pq_norm = 0.0;
    double walters_residual = 0.0;  // | ||PQ+QP|| - (||PQ||^2 + ||PQ||) |
};

inline AnticommutatorAnalysis anticommutator_analysis(const HalmosDecomposition& dec) {
    const Dims& d = dec.dims;
    AnticommutatorAnalysis r;
    for (double t : dec.h_values) {
        detail::push_unique_real(r.spectrum, t + std::sqrt(t));
        detail::push_unique_real(r.spectrum, t - std::sqrt(t));
    }
    if (d.d00 > 0) detail::push_unique_real(r.spectrum, 2.0);
    if (d.d01 + d.d10 + d.d11 > 0) detail::push_unique_real(r.spectrum, 0.0);
    std::sort(r.spectrum.begin(), r.spectrum.end());
    for (double v : r.spectrum) r.norm = std::max(r.norm, std::abs(v));
    r.pq_norm = pq_norm(dec);
    r.walters_residual = std::abs(r.norm - (r.pq_norm * r.pq_norm + r.pq_norm));
    return r;
}

/// ind(P, Q) = dim M01 - dim M10; every finite-dimensional pair is Fredholm.
inline long fredholm_index(const HalmosDecomposition& dec) {
    return static_cast<long>(dec.dims.d01) - static_cast<long>(dec.dims.d10);
}

/// Smallest eigenvalue of H; in infinite dimensions the pair is Fredholm only
/// when this stays away from zero. +inf when there are no fibers.
inline double invertibility_margin(const HalmosDecomposition& dec) {
    double best = std::numeric_limits<double>::infinity();
    for (double t : dec.h_values) best = std::min(best, t);
    return best;
}

/// tr (P - Q)^k: d01 - d10 for odd k, d01 + d10 + 2 sum (1 - h)^(k/2) for even k.
inline double trace_power_diff(const HalmosDecomposition& dec, int k) {
    if (k < 1) fail(ErrorKind::InvalidParams, "trace_power_diff: k must be positive");
    const Dims& d = dec.dims;
    if (k % 2 == 1) return static_cast<double>(d.d01 - d.d10);
    double sum = static_cast<double>(d.d01 + d.d10);
    for (double t : dec.h_values) sum += 2.0 * std::pow(1.0 - t, k / 2);
    return sum;
}

enum class DistanceRegime { Generic, Degenerate };

inline const char* to_string(DistanceRegime r) { return r == DistanceRegime::Generic ? "Generic" : "Degenerate"; }

struct SymmetryDistance {
    double x = 0.0;      // ||P U P||, U = 2Q - I
    double value = 0.0;  // distance from P to {R in the algebra : R U R = 0}
    DistanceRegime regime = DistanceRegime::Generic;
};

inline SymmetryDistance symmetry_distance(const HalmosDecomposition& dec) {
    const Dims& d = dec.dims;
    SymmetryDistance r;
    // PUP is 1 on M00, -1 on M01, 0 on M10 and M11 and diag[2h - 1, 0] on a fiber.
    r.x = d.d00 + d.d01 > 0 ? 1.0 : 0.0;
    for (double t : dec.h_values) r.x = std::max(r.x, std::abs(2.0 * t - 1.0));
    if (d.d00 == 0 && d.d01 == 0) {
        r.regime = DistanceRegime::Generic;
        r.value = std::sqrt(0.5 * (1.0 - std::sqrt(std::max(0.0, 1.0 - r.x * r.x))));
    } else {
        r.regime = DistanceRegime::Degenerate;
        r.value = 1.0;
        if (std::abs(r.x - 1.0) > 1e-9)
            fail(ErrorKind::ToleranceViolation, "degenerate distance regime with ||PUP|| != 1");
    }
    return r;
}

inline bool intertwiner_exists(const HalmosDecomposition& dec) { return dec.dims.d01 == dec.dims.d10; }

/// Free parameters of an intertwiner. Empty matrices stand for identities.
struct IntertwinerParams {
    CMatrix u0;   // unitary on M00
    CMatrix u1;   // unitary on M11
    CMatrix u01;  // M10 -> M01
    CMatrix u10;  // M01 -> M10
    CMatrix v;    // unitary on M commuting with H = diag(h)
};

struct IntertwinerResiduals {
    double unitarity = 0.0;
    double up_qu = 0.0;  // ||UP - QU||_max
    double uq_pu = 0.0;  // ||UQ - PU||_max
};

inline IntertwinerResiduals intertwiner_residuals(const CMatrix& u, const CMatrix& p, const CMatrix& q) {
    return {unitarity_defect(u), max_abs(u * p - q * u), max_abs(u * q - p * u)};
}

inline CMatrix build_intertwiner(const HalmosDecomposition& dec, const IntertwinerParams& params = {}) {
    const Dims& d = dec.dims;
    if (!intertwiner_exists(dec))
        fail(ErrorKind::NoIntertwiner, "dim M01 = " + std::to_string(d.d01) + " but dim M10 = " + std::to_string(d.d10));

    auto block_or_identity = [](const CMatrix& given, Eigen::Index size, const char* name) -> CMatrix {
        if (given.size() == 0) return identity(size);
        if (given.rows() != size || given.cols() != size)
            fail(ErrorKind::InvalidParams, std::string(name) + " must be " + std::to_string(size) + "x" +
                                               std::to_string(size));
        if (unitarity_defect(given) > 1e-9) fail(ErrorKind::InvalidParams, std::string(name) + " is not unitary");
        return given;
    };
    const CMatrix u0 = block_or_identity(params.u0, d.d00, "U0");
    const CMatrix u1 = block_or_identity(params.u1, d.d11, "U1");
    const CMatrix u01 = block_or_identity(params.u01, d.d01, "U01");
    const CMatrix u10 = block_or_identity(params.u10, d.d10, "U10");
    const CMatrix v = block_or_identity(params.v, d.m, "V");
    const RVector h = Eigen::Map<const RVector>(dec.h_values.data(), d.m);
    const CMatrix hm = h.cast<Complex>().asDiagonal();
    if (max_abs(v * hm - hm * v) > 1e-8) fail(ErrorKind::InvalidParams, "V does not commute with H");

    const Eigen::Index n = d.n();
    CMatrix block = CMatrix::Zero(n, n);
    const Eigen::Index o01 = d.block_offset(0, 1), o10 = d.block_offset(1, 0), o11 = d.block_offset(1, 1);
    block.block(0, 0, d.d00, d.d00) = u0;
    block.block(o01, o10, d.d01, d.d10) = u01;
    block.block(o10, o01, d.d10, d.d01) = u10;
    block.block(o11, o11, d.d11, d.d11) = u1;
    const CMatrix root_h = h.cwiseSqrt().cast<Complex>().asDiagonal();
    const CMatrix root_c = (RVector::Ones(d.m) - h).cwiseSqrt().cast<Complex>().asDiagonal();
    const Eigen::Index om = d.offset_m(), omp = d.offset_mprime();
    block.block(om, om, d.m, d.m) = v * root_h;
    block.block(om, omp, d.m, d.m) = v * root_c;
    block.block(omp, om, d.m, d.m) = v * root_c;
    block.block(omp, omp, d.m, d.m) = -v * root_h;
    return dec.basis * block * dec.basis.adjoint();
}

/// Intertwiner inside the algebra: a0 on M00, a1 on M11 and
/// phi_j [sqrt h, sqrt(1-h); sqrt(1-h), -sqrt h] on fiber j.
inline AlgebraElement build_intertwiner_in_algebra(const DecompositionPtr& dec, Complex a0, Complex a1,
                                                   const std::vector<Complex>& phi) {
    const Dims& d = dec->dims;
    if (d.d01 != 0 || d.d10 != 0)
        fail(ErrorKind::Condition000Violated, "M01 and M10 must both vanish");
    if (static_cast<Eigen::Index>(phi.size()) != d.m)
        fail(ErrorKind::InvalidParams, "expected " + std::to_string(d.m) + " fiber phases");
    auto unimodular = [](Complex z) { return std::abs(std::abs(z) - 1.0) <= 1e-10; };
    if ((d.d00 > 0 && !unimodular(a0)) || (d.d11 > 0 && !unimodular(a1)))
        fail(ErrorKind::NotUnimodular, "block coefficients must have modulus one");
    std::vector<Mat2> fibers;
    for (std::size_t j = 0; j < phi.size(); ++j) {
        if (!unimodular(phi[j])) fail(ErrorKind::NotUnimodular, "fiber phase " + std::to_string(j));
        const double t = dec->h_values[j];
        Mat2 f;
        f << std::sqrt(t), std::sqrt(1.0 - t), std::sqrt(1.0 - t), -std::sqrt(t);
        fibers.push_back(phi[j] * f);
    }
    return AlgebraElement(dec, {a0, 0.0, 0.0, a1}, std::move(fibers));
}

/// Every pair-level answer for one decomposition.
struct PairReport {
    Dims dims;
    std::vector<double> h_values;
    std::vector<double> diff_spectrum;
    AnticommutatorAnalysis anticommutator;
    long fredholm_index = 0;
    double invertibility_margin = 0.0;
    std::map<int, double> trace_powers;  // odd k -> tr (P - Q)^k
    SymmetryDistance distance;
    bool intertwiner_exists = false;
};

inline PairReport analyze_pair(const HalmosDecomposition& dec) {
    PairReport r;
    r.dims = dec.dims;
    r.h_values = dec.h_values;
    r.diff_spectrum = diff_spectrum(dec);
    r.anticommutator = anticommutator_analysis(dec);
    r.fredholm_index = fredholm_index(dec);
    r.invertibility_margin = invertibility_margin(dec);
    for (int k : {1, 3, 5, 7}) r.trace_powers[k] = trace_power_diff(dec, k);
    r.distance = symmetry_distance(dec);
    r.intertwiner_exists = intertwiner_exists(dec);
    return r;
}

} // namespace halmos
