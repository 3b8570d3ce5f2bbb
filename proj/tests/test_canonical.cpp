#include <gtest/gtest.h>

#include "support/test_support.hpp"

using namespace halmos;
using namespace halmos::testing;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::NonFinite;
}

double supersymmetry_residual(const ProjectionPair& pair) {
    const CMatrix a = pair.difference();
    const CMatrix b = pair.complement_sum();
    return std::max(max_abs(a * a + b * b - identity(pair.size())), max_abs(a * b + b * a));
}

} // namespace

TEST(ValidatePair, AcceptsProjections) {
    EXPECT_NO_THROW(validate_pair(diag_matrix({1, 0}), diag_matrix({0, 1})));
    const CMatrix q = q2(0.25);
    EXPECT_NEAR(q(0, 1).real(), 0.43301270, 1e-8);
    EXPECT_NO_THROW(validate_pair(diag_matrix({1, 0}), q));
}

TEST(ValidatePair, Errors) {
    CMatrix oblique(2, 2);
    oblique << 1.0, 1.0, 0.0, 0.0;
    EXPECT_EQ(kind_of([&] { validate_pair(oblique, diag_matrix({0, 1})); }), ErrorKind::NotHermitian);
    EXPECT_EQ(kind_of([&] { validate_pair(diag_matrix({0.5, 0}), diag_matrix({0, 1})); }), ErrorKind::NotIdempotent);
    EXPECT_EQ(kind_of([&] { validate_pair(diag_matrix({1, 0}), diag_matrix({1, 0, 0})); }), ErrorKind::SizeMismatch);
    EXPECT_EQ(kind_of([&] { validate_pair(CMatrix::Zero(2, 3), CMatrix::Zero(2, 3)); }), ErrorKind::SizeMismatch);
    CMatrix nan = diag_matrix({1, 0});
    nan(0, 1) = std::nan("");
    EXPECT_EQ(kind_of([&] { validate_pair(nan, diag_matrix({0, 1})); }), ErrorKind::NonFinite);
}

TEST(SubspaceM, Examples) {
    auto same = validate_pair(identity(2), identity(2));
    EXPECT_EQ(subspace_m(same, 0, 0).dim(), 2);

    auto split = validate_pair(diag_matrix({1, 0}), CMatrix::Zero(2, 2));
    const SubspaceBasis m01 = subspace_m(split, 0, 1);
    const SubspaceBasis m11 = subspace_m(split, 1, 1);
    ASSERT_EQ(m01.dim(), 1);
    ASSERT_EQ(m11.dim(), 1);
    EXPECT_NEAR(std::abs(m01.columns()(0, 0)), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(m11.columns()(1, 0)), 1.0, 1e-14);
    EXPECT_EQ(subspace_m(split, 0, 0).dim(), 0);
    EXPECT_EQ(subspace_m(split, 1, 0).dim(), 0);

    auto generic = validate_pair(diag_matrix({1, 0}), q2(0.25));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) EXPECT_EQ(subspace_m(generic, i, j).dim(), 0);
}

TEST(HalmosDecompose, TwoByTwoFixture) {
    const auto dec = halmos_decompose(validate_pair(diag_matrix({1, 0}), q2(0.25)));
    EXPECT_EQ(dec.dims, (Dims{0, 0, 0, 0, 1}));
    ASSERT_EQ(dec.h_values.size(), 1u);
    EXPECT_NEAR(dec.h_values[0], 0.25, 1e-14);
    // Already canonical: after phase normalization T is the identity.
    EXPECT_LE(max_abs(dec.basis - identity(2)), 1e-12);
}

TEST(HalmosDecompose, EqualProjectionsCommute) {
    Rng rng(31);
    for (Eigen::Index rank : {0, 1, 3, 5}) {
        const CMatrix p = random_projection(5, rank, rng);
        const auto dec = halmos_decompose(validate_pair(p, p));
        EXPECT_EQ(dec.dims, (Dims{rank, 0, 0, 5 - rank, 0}));
    }
}

TEST(HalmosDecompose, RecoversGeneratedSpec) {
    RandomPairSpec spec{{1, 1, 1, 1, 2}, {0.3, 0.7}, 99};
    const auto gen = generate_pair(spec);
    const auto dec = halmos_decompose(gen.pair);
    EXPECT_EQ(dec.dims, spec.dims);
    ASSERT_EQ(dec.h_values.size(), 2u);
    EXPECT_NEAR(dec.h_values[0], 0.3, 1e-8);
    EXPECT_NEAR(dec.h_values[1], 0.7, 1e-8);
    EXPECT_LE(unitarity_defect(dec.basis), 1e-9);
    const auto back = reconstruct(dec);
    EXPECT_LE(max_abs(back.p() - gen.pair.p()), 1e-8);
    EXPECT_LE(max_abs(back.q() - gen.pair.q()), 1e-8);
}

TEST(HalmosDecompose, RoundTripProperty) {
    Rng rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const RandomPairSpec spec = random_spec(rng, 48);
        const auto gen = generate_pair(spec);
        const auto dec = halmos_decompose(gen.pair);
        ASSERT_EQ(dec.dims, spec.dims) << "trial " << trial;
        std::vector<double> want = spec.h_values;
        std::sort(want.begin(), want.end());
        for (std::size_t j = 0; j < want.size(); ++j) EXPECT_NEAR(dec.h_values[j], want[j], 1e-8);
        EXPECT_LE(unitarity_defect(dec.basis), 1e-9);
        const auto back = reconstruct(dec);
        EXPECT_LE(max_abs(back.p() - gen.pair.p()), 1e-8);
        EXPECT_LE(max_abs(back.q() - gen.pair.q()), 1e-8);
    }
}

TEST(HalmosDecompose, ArbitraryProjectionPairs) {
    // Pairs not built from a canonical form: random ranges of random ranks.
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<Eigen::Index> size(1, 24);
        const Eigen::Index n = size(rng);
        std::uniform_int_distribution<Eigen::Index> rank(0, n);
        const auto pair = validate_pair(random_projection(n, rank(rng), rng), random_projection(n, rank(rng), rng));
        const auto dec = halmos_decompose(pair);
        EXPECT_EQ(dec.dims.n(), n);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) EXPECT_EQ(subspace_m(pair, i, j).dim(), dec.dims.block_size(i, j));
        const auto back = reconstruct(dec);
        EXPECT_LE(max_abs(back.p() - pair.p()), 1e-8);
        EXPECT_LE(max_abs(back.q() - pair.q()), 1e-8);
    }
}

TEST(HalmosDecompose, SupersymmetryHolds) {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto gen = generate_pair(random_spec(rng, 40));
        EXPECT_LE(supersymmetry_residual(gen.pair), 1e-10 * static_cast<double>(gen.pair.size()));
    }
    EXPECT_LE(supersymmetry_residual(validate_pair(diag_matrix({1, 0}), q2(0.25))), 1e-10 * 2);
}

TEST(HalmosDecompose, FiberBlocksHaveEqualWidth) {
    Rng rng(8);
    const auto gen = generate_pair(random_spec(rng, 30));
    const auto dec = halmos_decompose(gen.pair);
    EXPECT_EQ(dec.dims.offset_mprime() - dec.dims.offset_m(), dec.dims.m);
    EXPECT_EQ(dec.basis.cols() - dec.dims.offset_mprime(), dec.dims.m);
}

TEST(HalmosDecompose, CommutingIffNoFibers) {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        // Commuting: both diagonal in a common random basis.
        const CMatrix u = random_unitary(6, rng);
        CMatrix dp = CMatrix::Zero(6, 6), dq = CMatrix::Zero(6, 6);
        for (int k = 0; k < 6; ++k) {
            dp(k, k) = double((rng() >> 7) & 1);
            dq(k, k) = double((rng() >> 9) & 1);
        }
        const CMatrix p = u * dp * u.adjoint(), q = u * dq * u.adjoint();
        const auto dec = halmos_decompose(validate_pair(0.5 * (p + p.adjoint()), 0.5 * (q + q.adjoint())));
        EXPECT_EQ(dec.dims.m, 0);
    }
    for (int trial = 0; trial < 10; ++trial) {
        const auto gen = generate_pair(RandomPairSpec{{1, 0, 1, 0, 2}, {0.4, 0.6}, rng()});
        const double comm = max_abs(gen.pair.p() * gen.pair.q() - gen.pair.q() * gen.pair.p());
        EXPECT_GT(comm, 1e-3);
        EXPECT_EQ(halmos_decompose(gen.pair).dims.m, 2);
    }
}

TEST(HalmosDecompose, PhaseNormalizedColumns) {
    Rng rng(41);
    const auto dec = halmos_decompose(generate_pair(random_spec(rng, 30)).pair);
    for (Eigen::Index c = 0; c < dec.dims.offset_mprime(); ++c) {
        const CVector col = dec.basis.col(c);
        const double scale = col.cwiseAbs().maxCoeff();
        Eigen::Index k = 0;
        while (std::abs(col(k)) <= 1e-8 * scale) ++k;
        EXPECT_NEAR(col(k).imag(), 0.0, 1e-12);
        EXPECT_GT(col(k).real(), 0.0);
    }
}

TEST(HalmosDecompose, RejectsInconsistentPair) {
    // Validated at a loose tolerance, then decomposed at the default one.
    Rng rng(4);
    CMatrix p = random_projection(6, 3, rng);
    CMatrix noise = 1e-6 * random_hermitian(6, rng);
    const auto pair = validate_pair(p + noise, random_projection(6, 2, rng), Tolerances{}.scaled(1e4));
    EXPECT_EQ(kind_of([&] { halmos_decompose(pair); }), ErrorKind::NotAPair);
}

TEST(HalmosDecompose, AmbiguousClustersRaise) {
    // P - Q has eigenvalues +-sqrt(1 - x); x = 1e-7 puts them 5e-8 from +-1.
    EXPECT_EQ(kind_of([&] { halmos_decompose(validate_pair(diag_matrix({1, 0}), q2(1e-7))); }),
              ErrorKind::ToleranceViolation);
    // Inside the cluster radius the fiber is absorbed into M01 + M10 and the
    // reconstruction check catches the discarded off-diagonal part.
    EXPECT_EQ(kind_of([&] { halmos_decompose(validate_pair(diag_matrix({1, 0}), q2(1e-13))); }),
              ErrorKind::ToleranceViolation);
}

TEST(Reconstruct, Examples) {
    HalmosDecomposition one{identity(1), Dims{1, 0, 0, 0, 0}, {}};
    const auto pair = reconstruct(one);
    EXPECT_LE(max_abs(pair.p() - identity(1)), 1e-15);
    EXPECT_LE(max_abs(pair.q() - identity(1)), 1e-15);

    HalmosDecomposition fiber{identity(2), Dims{0, 0, 0, 0, 1}, {0.5}};
    CMatrix half(2, 2);
    half << 0.5, 0.5, 0.5, 0.5;
    EXPECT_LE(max_abs(reconstruct(fiber).q() - half), 1e-15);
    EXPECT_LE(max_abs(reconstruct(fiber).p() - diag_matrix({1, 0})), 1e-15);
}

TEST(GeneratePair, EqualProjectionsWhenNoFibers) {
    const auto gen = generate_pair(RandomPairSpec{{2, 0, 0, 0, 0}, {}, 1});
    EXPECT_LE(max_abs(gen.pair.p() - gen.pair.q()), 1e-14);
    EXPECT_NEAR(gen.pair.p().trace().real(), 2.0, 1e-12);
}

TEST(GeneratePair, DeterministicPerSeed) {
    const RandomPairSpec spec{{1, 2, 0, 1, 3}, {0.1, 0.5, 0.8}, 42};
    const auto a = generate_pair(spec), b = generate_pair(spec);
    EXPECT_TRUE(a.pair.p() == b.pair.p());
    EXPECT_TRUE(a.pair.q() == b.pair.q());
    const auto c = generate_pair(RandomPairSpec{spec.dims, spec.h_values, 43});
    EXPECT_FALSE(a.pair.p() == c.pair.p());
}

TEST(GeneratePair, DifferenceSpectrumFromH) {
    const auto gen = generate_pair(RandomPairSpec{{0, 0, 0, 0, 3}, {0.2, 0.5, 0.9}, 6});
    const std::vector<double> want = {-std::sqrt(0.8), -std::sqrt(0.5), -std::sqrt(0.1),
                                      std::sqrt(0.1),  std::sqrt(0.5),  std::sqrt(0.8)};
    const auto got = hermitian_spectrum(gen.pair.difference());
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < want.size(); ++k) EXPECT_NEAR(got[k], want[k], 1e-12);
}

TEST(GeneratePair, RejectsInvalidSpec) {
    EXPECT_EQ(kind_of([] { generate_pair(RandomPairSpec{{0, 0, 0, 0, 1}, {1.0}, 0}); }), ErrorKind::InvalidSpec);
    EXPECT_EQ(kind_of([] { generate_pair(RandomPairSpec{{0, 0, 0, 0, 1}, {0.0}, 0}); }), ErrorKind::InvalidSpec);
    EXPECT_EQ(kind_of([] { generate_pair(RandomPairSpec{{0, 0, 0, 0, 2}, {0.5}, 0}); }), ErrorKind::InvalidSpec);
    EXPECT_EQ(kind_of([] { generate_pair(RandomPairSpec{{-1, 0, 0, 0, 0}, {}, 0}); }), ErrorKind::InvalidSpec);
}
