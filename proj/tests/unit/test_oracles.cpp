// The oracles are only useful if they are right; check them on cases with
// known answers.
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"

using oracle::cplx;
using oracle::Dense;

TEST(Oracles, CharpolyRoutesAgree) {
    Dense A = {{1.0, cplx(2, 1), 0.5}, {cplx(0, -1), 3.0, 1.0}, {2.0, cplx(1, 1), -1.0}};
    const auto a = oracle::charpoly(A), b = oracle::charpoly_leverrier(A);
    for (size_t k = 0; k < a.size(); ++k) EXPECT_LT(std::abs(a[k] - b[k]), 1e-12);
}

TEST(Oracles, RootsOfKnownPolynomial) {
    // (z-1)(z+2)(z-3i)
    const std::vector<cplx> c = {cplx(0, 6), cplx(-2, -3), cplx(1, -3), 1.0};
    const auto r = oracle::poly_roots(c);
    EXPECT_LT(oracle::multiset_distance(r, {1.0, -2.0, cplx(0, 3)}), 1e-12);
}

TEST(Oracles, CofactorDeterminant) {
    Dense A = {{2, 0, 0}, {0, 3, 0}, {0, 0, cplx(0, 1)}};
    EXPECT_LT(std::abs(oracle::cofactor_det(A) - cplx(0, 6)), 1e-15);
    Dense P = {{0, 1}, {1, 0}};
    EXPECT_LT(std::abs(oracle::cofactor_det(P) + 1.0), 1e-15);
}

TEST(Oracles, GeometricHoneycombCoordination) {
    const auto G = oracle::haldane_geometric(4, 3, 1.0, 0.0, 0.0);
    // bulk A site (x=1, y=1) has three NN; top B site two
    int nA = 0, nB = 0;
    for (size_t j = 0; j < G.size(); ++j) {
        nA += G[2 * (1 * 4 + 1)][j] != cplx(0.0);
        nB += G[2 * (2 * 4 + 1) + 1][j] != cplx(0.0);
    }
    EXPECT_EQ(nA, 3);
    EXPECT_EQ(nB, 2);
}

TEST(Oracles, ZeroCountByHand) {
    // -sin(2 pi n / 4): 0, -1, 0, 1 -> one pair of sign changes around the ring
    EXPECT_EQ(oracle::brute_zero_count(1, 4, 4), 2);
}
