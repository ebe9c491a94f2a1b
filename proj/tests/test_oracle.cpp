#include <gtest/gtest.h>

#include <cmath>

#include "jacobi_scatter/oracle.hpp"
#include "test_support.hpp"

using namespace jacobi_scatter;
using fixtures::max_abs_diff;

TEST(Oracle, FreeResolventValue) {
    const auto g = oracle_resolvent(fixtures::free_potential(2), Complex{3.0, 0.0}, 200);
    EXPECT_LT(max_abs_diff(g.block(0, 0), (-1.0 / std::sqrt(5.0)) * identity(2)), 1e-12);
    EXPECT_LT(g.residual(), 1e-10);
}

TEST(Oracle, ResolventResidualForRandomPotential) {
    const auto g = oracle_resolvent(fixtures::random_potential(4), Complex{0.5, 0.3}, 100);
    EXPECT_LT(g.residual(), 1e-10);
}

TEST(Oracle, RejectsEnergyNearEigenvalue) {
    const Potential v(1, {{0, 5.0 * identity(1)}});
    const TruncatedOperator op(v, 60);
    double e = op.eigenvalues().maxCoeff();
    EXPECT_THROW(OracleResolvent(op, Complex{e, 0.0}), NumericalError);
}

TEST(Oracle, PropagatorAtZeroAndUnitarity) {
    const Potential free = fixtures::free_potential(1);
    const OraclePropagator p = oracle_propagator(free, 40);
    const CMatrix u0 = p.matrix(0.0);
    EXPECT_LT(max_abs_diff(u0, CMatrix::Identity(u0.rows(), u0.cols())), 1e-12);
    const OraclePropagator q = oracle_propagator(fixtures::random_potential(8), 60);
    // Frobenius norm of an L-column block of a partial isometry: at most L.
    for (long r : {-4L, 0L, 3L}) EXPECT_LE(q.column_norm_sq(7.0, r), 2.0 + 1e-12);
    // Free on a wide lattice: nearly all of the column stays inside.
    EXPECT_NEAR(p.column_norm_sq(3.0, 0), 1.0, 1e-8);
}

TEST(Oracle, FreePropagatorBessel) {
    const OraclePropagator p = oracle_propagator(fixtures::free_potential(1), 300);
    // J_0(2) = 0.22389077914123567.
    EXPECT_NEAR(p.block(1.0, 0, 0)(0, 0).real(), 0.22389077914123567, 1e-4);
    EXPECT_NEAR(p.block(1.0, 0, 0)(0, 0).imag(), 0.0, 1e-4);
}

TEST(Oracle, FreeHasNoPointSpectrum) {
    EXPECT_TRUE(oracle_point_spectrum(fixtures::free_potential(2), 100).empty());
}

TEST(Oracle, BarrierBoundStates) {
    const auto above = oracle_point_spectrum(Potential(1, {{0, 5.0 * identity(1)}}), 100);
    ASSERT_EQ(above.size(), 1u);
    EXPECT_NEAR(above[0].value, std::sqrt(29.0), 1e-10);
    EXPECT_TRUE(above[0].stable);
    const auto below = oracle_point_spectrum(Potential(1, {{0, -10.0 * identity(1)}}), 100);
    ASSERT_EQ(below.size(), 1u);
    EXPECT_NEAR(below[0].value, -std::sqrt(104.0), 1e-10);
    EXPECT_NEAR(below[0].distance_to_band, std::sqrt(104.0) - 2.0, 1e-10);
}

TEST(Oracle, ResolventDecaysGeometrically) {
    const Complex E{2.6, 0.0};
    const double z = std::abs(inverse_zhukovsky(E).z);
    const auto g = oracle_resolvent(fixtures::random_potential(10), E, 200);
    for (long s = 10; s < 40; ++s) {
        const double ratio = op_norm(g.block(s + 1, 0)) / op_norm(g.block(s, 0));
        EXPECT_LE(ratio, z + 0.1) << s;
    }
}

TEST(Oracle, TruncationIndexing) {
    const TruncatedOperator op(fixtures::free_potential(2), 5);
    EXPECT_EQ(op.size(), 22);
    EXPECT_EQ(op.offset(-5), 0);
    EXPECT_EQ(op.offset(5), 20);
    EXPECT_THROW(op.offset(6), ValidationError);
    EXPECT_THROW(TruncatedOperator(fixtures::free_potential(1), 0), ValidationError);
}

TEST(Oracle, ColumnWindowMatchesFullInverse) {
    const Potential v = fixtures::random_potential(3);
    const Complex E{0.2, 0.4};
    const auto full = oracle_resolvent(v, E, 40);
    const auto part = oracle_resolvent(v, E, 40, Window{-5, 7});
    for (long s = -40; s <= 40; s += 7)
        for (long r = -5; r <= 7; ++r) EXPECT_LT(max_abs_diff(full.block(s, r), part.block(s, r)), 1e-13);
    EXPECT_LT(part.residual(), 1e-10);
    EXPECT_THROW(part.block(0, 8), ValidationError);
    EXPECT_THROW(oracle_resolvent(v, E, 40, Window{-41, 0}), ValidationError);
}
