#include <gtest/gtest.h>

#include "halmos/oracle.hpp"
#include "support/test_support.hpp"

using namespace halmos;
using namespace halmos::testing;

namespace {

HalmosDecomposition fixture(double h) { return halmos_decompose(validate_pair(diag_matrix({1.0, 0.0}), q2(h))); }

HalmosDecomposition with_dims(Dims d, std::vector<double> h = {}) {
    HalmosDecomposition dec;
    dec.dims = d;
    dec.h_values = std::move(h);
    dec.basis = identity(d.n());
    return dec;
}

template <class F>
void expect_error(ErrorKind kind, F&& f) {
    try {
        f();
        ADD_FAILURE() << "expected " << to_string(kind);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
    }
}

} // namespace

TEST(DiffSpectrum, Examples) {
    const auto s = diff_spectrum(fixture(0.25));
    ASSERT_EQ(s.size(), 2u);
    EXPECT_NEAR(s[0], -std::sqrt(0.75), 1e-14);
    EXPECT_NEAR(s[1], std::sqrt(0.75), 1e-14);

    const auto pure = diff_spectrum(with_dims({1, 1, 1, 0, 0}));
    EXPECT_EQ(pure, (std::vector<double>{-1.0, 0.0, 1.0}));
    EXPECT_EQ(diff_spectrum(with_dims({2, 0, 0, 0, 0})), std::vector<double>{0.0});
}

TEST(DiffSpectrum, MatchesEigenvaluesOfTheDifference) {
    Rng rng(1);
    for (int trial = 0; trial < 25; ++trial) {
        const GeneratedPair g = generate_pair(random_spec(rng, 40));
        const std::vector<double> brute = hermitian_spectrum(g.pair.difference());
        EXPECT_TRUE(same_set(diff_spectrum(g.truth), brute, 1e-8)) << trial;
    }
}

TEST(Anticommutator, Examples) {
    const AnticommutatorAnalysis a = anticommutator_analysis(fixture(0.25));
    ASSERT_EQ(a.spectrum.size(), 2u);
    EXPECT_NEAR(a.spectrum[0], -0.25, 1e-14);
    EXPECT_NEAR(a.spectrum[1], 0.75, 1e-14);
    EXPECT_NEAR(a.norm, 0.75, 1e-14);
    EXPECT_NEAR(a.pq_norm, 0.5, 1e-14);
    EXPECT_LE(a.walters_residual, 1e-14);

    const AnticommutatorAnalysis same = anticommutator_analysis(with_dims({3, 0, 0, 1, 0}));  // P = Q
    EXPECT_DOUBLE_EQ(same.norm, 2.0);
    const AnticommutatorAnalysis orth = anticommutator_analysis(with_dims({0, 2, 1, 1, 0}));  // PQ = 0
    EXPECT_DOUBLE_EQ(orth.norm, 0.0);
    EXPECT_DOUBLE_EQ(orth.pq_norm, 0.0);
}

TEST(Anticommutator, MatchesOracleAndNormIdentity) {
    Rng rng(2);
    for (int trial = 0; trial < 25; ++trial) {
        const GeneratedPair g = generate_pair(random_spec(rng, 40));
        const CMatrix& p = g.pair.p();
        const CMatrix& q = g.pair.q();
        const AnticommutatorAnalysis a = anticommutator_analysis(g.truth);
        EXPECT_TRUE(same_set(a.spectrum, hermitian_spectrum(p * q + q * p), 1e-8)) << trial;
        EXPECT_NEAR(a.norm, spectral_norm(p * q + q * p), 1e-9);
        EXPECT_NEAR(a.pq_norm, spectral_norm(p * q), 1e-9);
        EXPECT_LE(a.walters_residual, 1e-9);
    }
}

TEST(FredholmIndex, Examples) {
    EXPECT_EQ(fredholm_index(with_dims({0, 2, 3, 0, 0})), -1);
    EXPECT_EQ(fredholm_index(fixture(0.25)), 0);
    EXPECT_NEAR(invertibility_margin(fixture(0.25)), 0.25, 1e-14);
    EXPECT_TRUE(std::isinf(invertibility_margin(with_dims({1, 0, 0, 0, 0}))));
}

TEST(TracePowers, Examples) {
    EXPECT_NEAR(trace_power_diff(fixture(0.25), 2), 1.5, 1e-14);
    EXPECT_NEAR(trace_power_diff(fixture(0.25), 3), 0.0, 0.0);
    EXPECT_NEAR(trace_power_diff(with_dims({0, 2, 3, 0, 0}), 5), -1.0, 0.0);
    expect_error(ErrorKind::InvalidParams, [] { trace_power_diff(fixture(0.25), 0); });
}

TEST(TracePowers, MatchMatrixPowersAndIndexOracle) {
    Rng rng(3);
    for (int trial = 0; trial < 25; ++trial) {
        const GeneratedPair g = generate_pair(random_spec(rng, 40));
        const CMatrix a = g.pair.difference();
        for (int k = 1; k <= 8; ++k) {
            const double direct = oracle::matrix_power(a, k).trace().real();
            EXPECT_NEAR(trace_power_diff(g.truth, k), direct, 1e-8) << "k=" << k;
        }
        EXPECT_EQ(fredholm_index(g.truth), oracle::brute_index(g.pair.p(), g.pair.q()));
    }
}

TEST(SymmetryDistance, Examples) {
    const SymmetryDistance half = symmetry_distance(fixture(0.5));
    EXPECT_NEAR(half.x, 0.0, 1e-14);
    EXPECT_NEAR(half.value, 0.0, 1e-14);
    EXPECT_EQ(half.regime, DistanceRegime::Generic);

    const SymmetryDistance d = symmetry_distance(fixture(0.8));
    EXPECT_NEAR(d.x, 0.6, 1e-12);
    EXPECT_NEAR(d.value, std::sqrt(0.1), 1e-12);

    const SymmetryDistance deg = symmetry_distance(with_dims({1, 0, 0, 0, 1}, {0.3}));
    EXPECT_EQ(deg.regime, DistanceRegime::Degenerate);
    EXPECT_DOUBLE_EQ(deg.value, 1.0);
    EXPECT_DOUBLE_EQ(deg.x, 1.0);
    EXPECT_STREQ(to_string(deg.regime), "Degenerate");
}

TEST(SymmetryDistance, MatchesNormOfCompression) {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const GeneratedPair g = generate_pair(random_spec(rng, 30));
        const CMatrix u = 2.0 * g.pair.q() - identity(g.pair.size());
        const CMatrix& p = g.pair.p();
        EXPECT_NEAR(symmetry_distance(g.truth).x, spectral_norm(p * u * p), 1e-9);
    }
}

TEST(SymmetryDistance, MatchesSearchOracle) {
    for (double h : {0.1, 0.35, 0.5, 0.8}) {
        EXPECT_NEAR(symmetry_distance(fixture(h)).value,
                    oracle::brute_distance(diag_matrix({1.0, 0.0}), q2(h), 200), 1e-4)
            << h;
    }
}

TEST(Intertwiner, DefaultAtQuarter) {
    const HalmosDecomposition dec = fixture(0.25);
    const CMatrix u = build_intertwiner(dec);
    CMatrix expected(2, 2);
    expected << 0.5, 0.8660254037844386, 0.8660254037844386, -0.5;
    EXPECT_LE(max_abs(dec.basis.adjoint() * u * dec.basis - expected), 1e-12);
    const IntertwinerResiduals r = intertwiner_residuals(u, diag_matrix({1.0, 0.0}), q2(0.25));
    EXPECT_LE(r.unitarity, 1e-12);
    EXPECT_LE(r.up_qu, 1e-12);
    EXPECT_LE(r.uq_pu, 1e-12);
}

TEST(Intertwiner, RandomPairsAndParameters) {
    Rng rng(6);
    int built = 0;
    for (int trial = 0; trial < 40; ++trial) {
        RandomPairSpec spec = random_spec(rng, 30);
        spec.dims.d10 = spec.dims.d01;
        if (spec.dims.n() > 40) continue;
        const GeneratedPair g = generate_pair(spec);
        ASSERT_TRUE(intertwiner_exists(g.truth));
        IntertwinerParams params;
        params.u0 = random_unitary(spec.dims.d00, rng);
        params.u01 = random_unitary(spec.dims.d01, rng);
        params.u10 = random_unitary(spec.dims.d10, rng);
        // V commuting with H: a diagonal phase.
        params.v = identity(spec.dims.m);
        for (Eigen::Index j = 0; j < spec.dims.m; ++j) params.v(j, j) = std::polar(1.0, 0.7 * double(j + 1));
        const CMatrix u = build_intertwiner(g.truth, params);
        const IntertwinerResiduals r = intertwiner_residuals(u, g.pair.p(), g.pair.q());
        const double bound = 1e-8 * double(spec.dims.n());
        EXPECT_LE(r.unitarity, bound);
        EXPECT_LE(r.up_qu, bound);
        EXPECT_LE(r.uq_pu, bound);
        ++built;
    }
    EXPECT_GT(built, 20);
}

TEST(Intertwiner, Errors) {
    expect_error(ErrorKind::NoIntertwiner, [] { build_intertwiner(with_dims({0, 1, 0, 0, 0})); });
    IntertwinerParams bad;
    bad.v = 2.0 * identity(1);
    expect_error(ErrorKind::InvalidParams, [&] { build_intertwiner(fixture(0.25), bad); });

    // V must commute with H.
    IntertwinerParams mixing;
    mixing.v = CMatrix(2, 2);
    mixing.v << 0.0, 1.0, 1.0, 0.0;
    expect_error(ErrorKind::InvalidParams, [&] { build_intertwiner(with_dims({0, 0, 0, 0, 2}, {0.2, 0.6}), mixing); });
}

TEST(IntertwinerInAlgebra, Examples) {
    const HalmosDecomposition dec = fixture(0.25);
    const DecompositionPtr ptr = share(dec);
    const AlgebraElement u = build_intertwiner_in_algebra(ptr, 1.0, 1.0, {1.0});
    EXPECT_LE(max_abs(assemble(u) - build_intertwiner(dec)), 1e-12);

    const AlgebraElement flipped = build_intertwiner_in_algebra(ptr, 1.0, 1.0, {-1.0});
    EXPECT_LE(max_abs(assemble(flipped) + build_intertwiner(dec)), 1e-12);
    const IntertwinerResiduals r = intertwiner_residuals(assemble(flipped), diag_matrix({1.0, 0.0}), q2(0.25));
    EXPECT_LE(std::max({r.unitarity, r.up_qu, r.uq_pu}), 1e-12);

    const DecompositionPtr full = share(with_dims({1, 0, 0, 1, 0}));
    expect_error(ErrorKind::NotUnimodular, [&] { build_intertwiner_in_algebra(full, 2.0, 1.0, {}); });
    expect_error(ErrorKind::NotUnimodular, [&] { build_intertwiner_in_algebra(ptr, 1.0, 1.0, {0.5}); });
    expect_error(ErrorKind::InvalidParams, [&] { build_intertwiner_in_algebra(ptr, 1.0, 1.0, {}); });
    expect_error(ErrorKind::Condition000Violated,
                 [] { build_intertwiner_in_algebra(share(with_dims({0, 1, 1, 0, 0})), 1.0, 1.0, {}); });
}

TEST(AnalyzePair, IsConsistent) {
    const GeneratedPair g = generate_pair({{1, 2, 1, 0, 2}, {0.3, 0.6}, 9});
    const PairReport r = analyze_pair(g.truth);
    EXPECT_EQ(r.fredholm_index, 1);
    EXPECT_EQ(r.trace_powers.size(), 4u);
    for (const auto& [k, v] : r.trace_powers) EXPECT_DOUBLE_EQ(v, 1.0) << k;
    EXPECT_FALSE(r.intertwiner_exists);
    EXPECT_EQ(r.distance.regime, DistanceRegime::Degenerate);
}
