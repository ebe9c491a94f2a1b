#include <gtest/gtest.h>

#include <cmath>

#include "jacobi_scatter/oracle.hpp"
#include "jacobi_scatter/resolvent.hpp"
#include "test_support.hpp"

using namespace jacobi_scatter;
using fixtures::max_abs_diff;

TEST(GreenKernel, FreeValueAtThree) {
    const CMatrix g = green_kernel(fixtures::free_potential(2), Complex{3.0, 0.0}, 0, 0);
    EXPECT_LT(max_abs_diff(g, (-1.0 / std::sqrt(5.0)) * identity(2)), 1e-14);
}

TEST(GreenKernel, FreeClosedForm) {
    const Potential v = fixtures::free_potential(1);
    for (Complex E : {Complex{3.0, 0.0}, Complex{-2.5, 0.0}, Complex{0.3, 0.7}, Complex{1.0, -0.2}}) {
        const Complex z = inverse_zhukovsky(E).z;
        for (long s = -6; s <= 6; s += 3)
            for (long r = -4; r <= 4; r += 2) {
                const Complex expect = std::pow(z, static_cast<double>(std::abs(s - r))) / (z - 1.0 / z);
                EXPECT_LT(std::abs(green_kernel(v, E, s, r)(0, 0) - expect), 1e-13);
            }
    }
}

TEST(GreenKernel, OracleEquivalence) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const Potential v = fixtures::random_potential(seed);
        for (Complex E : {Complex{3.0, 0.0}, Complex{-3.0, 0.0}, Complex{2.5, 0.5}}) {
            const OracleResolvent orc = oracle_resolvent(v, E, 200, Window{-20, 20});
            const ResolventKernel k(v, inverse_zhukovsky(E).z, Window{-20, 20});
            double worst = 0.0;
            for (long s = -20; s <= 20; ++s)
                for (long r = -20; r <= 20; ++r) {
                    const CMatrix o = orc.block(s, r);
                    worst = std::max(worst, op_norm(k(s, r) - o) / (1.0 + op_norm(o)));
                }
            EXPECT_LT(worst, 1e-6) << "seed " << seed << " E " << E;
        }
    }
}

TEST(GreenKernel, DifferenceEquationAndAdjointSymmetry) {
    const Potential v = fixtures::random_potential(5);
    const Complex E{0.7, 0.4};
    const ResolventKernel k(v, inverse_zhukovsky(E).z, Window{-16, 16});
    EXPECT_LT(green_difference_residual(v, E, k, Window{-15, 15}), 1e-10);
    const ResolventKernel kc(v, inverse_zhukovsky(std::conj(E)).z, Window{-16, 16});
    for (long s = -10; s <= 10; ++s)
        for (long r = -10; r <= 10; ++r) EXPECT_LT(op_norm(k(r, s) - kc(s, r).adjoint()), 1e-10);
}

TEST(GreenKernel, RejectsBandEnergiesAndEigenvalues) {
    const Potential v = fixtures::free_potential(1);
    EXPECT_THROW(green_kernel(v, Complex{1.0, 0.0}, 0, 0), ValidationError);
    EXPECT_THROW(green_kernel(v, Complex{2.0, 0.0}, 0, 0), ValidationError);
    // A one-site barrier c has the bound state √(c² + 4).
    const Potential barrier(1, {{0, 3.0 * identity(1)}});
    EXPECT_THROW(green_kernel(barrier, Complex{std::sqrt(13.0), 0.0}, 0, 0), NumericalError);
    ResolventOptions no_screen;
    no_screen.prescreen = false;
    EXPECT_THROW(green_kernel(barrier, Complex{std::sqrt(13.0), 0.0}, 0, 0, no_screen), NumericalError);
}

TEST(GreenBoundary, FreeValueAtZero) {
    const Potential v = fixtures::free_potential(1);
    EXPECT_LT(std::abs(green_boundary(v, 0.0, Side::plus, 0, 0)(0, 0) - Complex(0.0, 0.5)), 1e-15);
    EXPECT_LT(std::abs(green_boundary(v, 0.0, Side::minus, 0, 0)(0, 0) - Complex(0.0, -0.5)), 1e-15);
}

TEST(GreenBoundary, AgreesWithWronskianForm) {
    const Potential v = fixtures::random_potential(9);
    for (Side side : {Side::plus, Side::minus})
        for (double E : {-1.3, 0.2, 1.6}) {
            const BoundaryKernel b(v, E, side, Window{-12, 12});
            const ResolventKernel w(v, resolvent_point(Complex{E, 0.0}, side).z, Window{-12, 12});
            for (long s = -12; s <= 12; s += 2)
                for (long r = -12; r <= 12; r += 3) EXPECT_LT(op_norm(b(s, r) - w(s, r)), 1e-11);
        }
}

TEST(GreenBoundary, LimitingAbsorptionAndSymmetry) {
    const Potential v = fixtures::random_potential(12);
    for (double E : {-1.0, 0.0, 1.0}) {
        const BoundaryKernel plus(v, E, Side::plus, Window{-10, 10});
        const BoundaryKernel minus(v, E, Side::minus, Window{-10, 10});
        double prev = std::numeric_limits<double>::infinity();
        for (double eps : {1e-2, 1e-3, 1e-4}) {
            const ResolventKernel k(v, inverse_zhukovsky(Complex{E, eps}).z, Window{-6, 6});
            double d = 0.0;
            for (long s = -6; s <= 6; ++s)
                for (long r = -6; r <= 6; ++r) d = std::max(d, op_norm(k(s, r) - plus(s, r)));
            EXPECT_LT(d, prev);
            prev = d;
        }
        for (long s = -10; s <= 10; ++s)
            for (long r = -10; r <= 10; ++r) EXPECT_LT(op_norm(plus(s, r).adjoint() - minus(r, s)), 1e-10);
        EXPECT_LT(green_difference_residual(v, Complex{E, 0.0}, plus, Window{-9, 9}), 1e-10);
        EXPECT_LT(green_difference_residual(v, Complex{E, 0.0}, minus, Window{-9, 9}), 1e-10);
    }
}

TEST(GreenBoundary, RejectsOutsideBand) {
    const Potential v = fixtures::free_potential(1);
    EXPECT_THROW(green_boundary(v, 2.0, Side::plus, 0, 0), ValidationError);
    EXPECT_THROW(green_boundary(v, -2.5, Side::plus, 0, 0), ValidationError);
    EXPECT_THROW(green_boundary(v, 2.0 - 1e-12, Side::plus, 0, 0), ValidationError);
}

TEST(WeightedNorm, FreeBoundAndMonotonicity) {
    const Potential v = fixtures::free_potential(1);
    const auto a = weighted_resolvent_norm(v, Complex{3.0, 0.0}, Side::plus, 1.0, 40);
    EXPECT_NEAR(a.sup_kernel, 1.0 / std::sqrt(5.0), 1e-14);
    EXPECT_NEAR(weight_constant(1.0), kPi * kPi / 3.0 - 1.0, 1e-13);
    EXPECT_LE(a.norm, a.bound);
    const auto b = weighted_resolvent_norm(v, Complex{3.0, 0.0}, Side::plus, 1.0, 80);
    EXPECT_GE(b.norm, a.norm - 1e-14);
    EXPECT_LT(b.tail_weight, a.tail_weight);
    const auto c = weighted_resolvent_norm(v, Complex{3.0, 0.0}, Side::plus, 2.0, 40);
    EXPECT_LT(c.norm, a.norm);
}

TEST(WeightedNorm, TailWeight) {
    double tail = 0.0;
    for (long r = 31; r < 2000000; ++r) tail += 2.0 * std::pow(1.0 + r, -3.0);
    EXPECT_NEAR(weight_tail(1.5, 30), tail, 1e-9);
    EXPECT_THROW(weight_constant(0.5), ValidationError);
}

TEST(WeightedNorm, BoundaryValuesFinite) {
    const Potential v = fixtures::random_potential(3);
    const auto r = weighted_resolvent_norm(v, Complex{0.5, 0.0}, Side::minus, 1.5, 20);
    EXPECT_TRUE(std::isfinite(r.norm));
    EXPECT_LE(r.norm, r.bound);
}

TEST(Holder, EqualEnergiesGiveZeroDifference) {
    HolderGrid g;
    g.pairs = {{Complex{0.3, 0.0}, Complex{0.3, 0.0}}};
    const auto rep = holder_diagnostic(fixtures::free_potential(1), g, 1.5, 0.5, 10);
    ASSERT_EQ(rep.pairs.size(), 1u);
    EXPECT_EQ(rep.pairs[0].difference, 0.0);
}

TEST(Holder, FreeExponentNearOne) {
    const auto rep = holder_diagnostic(fixtures::free_potential(1), ladder_grid(-1.0, 1.0, 5, 9), 2.0, 1.0, 40);
    EXPECT_GE(rep.fitted_exponent, 0.95);
    EXPECT_TRUE(std::isfinite(rep.max_ratio));
}

TEST(Holder, RatioStableUnderRefinement) {
    const Potential v = fixtures::random_potential(77);
    const auto coarse = holder_diagnostic(v, ladder_grid(-1.0, 1.0, 3, 5), 1.5, 0.5, 20);
    const auto fine = holder_diagnostic(v, ladder_grid(-1.0, 1.0, 5, 9), 1.5, 0.5, 20);
    EXPECT_LT(std::abs(fine.max_ratio - coarse.max_ratio) / coarse.max_ratio, 0.1);
}

TEST(Holder, ValidatesParameters) {
    const auto g = ladder_grid(-1.0, 1.0, 2, 2);
    EXPECT_THROW(holder_diagnostic(fixtures::free_potential(1), g, 1.0, 0.5, 10), ValidationError);
    EXPECT_THROW(holder_diagnostic(fixtures::free_potential(1), g, 2.0, -0.1, 10), ValidationError);
    EXPECT_THROW(ladder_grid(-1.0, 1.0, 0, 3), ValidationError);
}

TEST(Holder, LadderGridIsNested) {
    const auto a = ladder_grid(-1.0, 1.0, 3, 5);
    const auto b = ladder_grid(-1.0, 1.0, 5, 9);
    for (const auto& p : a.pairs) {
        bool found = false;
        for (const auto& q : b.pairs) found = found || (std::abs(p.first - q.first) < 1e-15 && p.second == q.second);
        EXPECT_TRUE(found);
    }
}
