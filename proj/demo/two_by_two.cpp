// The two-dimensional picture: P = diag[1, 0] and a rank-one Q at angle x.
#include <cmath>
#include <cstdio>
#include <memory>

#include "halmos/halmos.hpp"

int main() {
    using namespace halmos;

    const double x = 0.25;
    CMatrix p(2, 2), q(2, 2);
    p << 1.0, 0.0, 0.0, 0.0;
    const double s = std::sqrt(x * (1.0 - x));
    q << x, s, s, 1.0 - x;

    const auto dec = std::make_shared<const HalmosDecomposition>(halmos_decompose(validate_pair(p, q)));
    std::printf("dims (d00 d01 d10 d11 m) = %ld %ld %ld %ld %ld\n", long(dec->dims.d00), long(dec->dims.d01),
                long(dec->dims.d10), long(dec->dims.d11), long(dec->dims.m));
    for (double h : dec->h_values) std::printf("h = %.12g\n", h);

    for (double v : diff_spectrum(*dec)) std::printf("eigenvalue of P-Q: %+.10f\n", v);
    const auto ac = anticommutator_analysis(*dec);
    std::printf("||PQ+QP|| = %.10f, ||PQ||^2 + ||PQ|| = %.10f\n", ac.norm, ac.pq_norm * ac.pq_norm + ac.pq_norm);

    const auto dist = symmetry_distance(*dec);
    std::printf("||PUP|| = %.10f, dist = %.10f (%s)\n", dist.x, dist.value, to_string(dist.regime));

    // The kernel of I - Q is the range of Q.
    const auto element = AlgebraElement::identity(dec) - AlgebraElement::q_symbol(dec);
    const SubspaceBasis ker = kernel_basis(element);
    std::printf("dim ker(I-Q) = %ld\n", long(ker.dim()));

    const CMatrix u = build_intertwiner(*dec);
    const auto res = intertwiner_residuals(u, p, q);
    std::printf("intertwiner residuals: %.2e %.2e %.2e\n", res.unitarity, res.up_qu, res.uq_pu);
    return 0;
}
