#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "jacobi_scatter/core.hpp"
#include "jacobi_scatter/parallel.hpp"
#include "test_support.hpp"

using namespace jacobi_scatter;

TEST(Zhukovsky, RoundTripOffBand) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    for (int i = 0; i < 200; ++i) {
        const Complex E{u(rng), u(rng)};
        if (E.imag() == 0.0 && std::abs(E.real()) <= 2.0) continue;
        const SpectralPoint p = inverse_zhukovsky(E);
        EXPECT_LT(std::abs(p.z), 1.0);
        EXPECT_FALSE(p.on_circle());
        EXPECT_LT(std::abs(zhukovsky(p.z) - E), 1e-12 * (1.0 + std::abs(E)));
    }
}

TEST(Zhukovsky, FreeValueAtThree) {
    const SpectralPoint p = inverse_zhukovsky(Complex{3.0, 0.0});
    EXPECT_NEAR(p.z.real(), (3.0 - std::sqrt(5.0)) / 2.0, 1e-15);
    EXPECT_NEAR(p.z.imag(), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(p.z - 1.0 / p.z + std::sqrt(5.0)), 0.0, 1e-14);
}

TEST(Zhukovsky, StableForLargeEnergies) {
    const SpectralPoint p = inverse_zhukovsky(Complex{1e8, 0.0});
    EXPECT_NEAR(p.z.real(), 1e-8, 1e-22);
}

TEST(Zhukovsky, BandBranches) {
    for (double E : {-1.9, -1.0, 0.0, 0.5, 1.99}) {
        const SpectralPoint plus = inverse_zhukovsky(Complex{E, 0.0}, Branch::plus);
        const SpectralPoint minus = inverse_zhukovsky(Complex{E, 0.0}, Branch::minus);
        EXPECT_NEAR(std::abs(plus.z), 1.0, 1e-15);
        EXPECT_LE(plus.z.imag(), 0.0);
        EXPECT_GE(minus.z.imag(), 0.0);
        EXPECT_NEAR(std::abs(plus.z - std::conj(minus.z)), 0.0, 1e-15);
        EXPECT_NEAR(zhukovsky(plus.z).real(), E, 1e-14);
        EXPECT_EQ(plus.branch, Branch::plus);
        EXPECT_EQ(minus.branch, Branch::minus);
    }
    EXPECT_THROW(inverse_zhukovsky(Complex{0.3, 0.0}, Branch::interior), ValidationError);
}

TEST(Zhukovsky, ZeroEnergyIsMinusI) {
    const SpectralPoint p = inverse_zhukovsky(Complex{0.0, 0.0}, Branch::plus);
    EXPECT_NEAR(std::abs(p.z - Complex{0.0, -1.0}), 0.0, 1e-15);
}

TEST(Zhukovsky, BoundaryLimitFromAbove) {
    for (double E0 : {-1.5, 0.0, 1.2}) {
        const Complex target = inverse_zhukovsky(Complex{E0, 0.0}, Branch::plus).z;
        double prev = std::numeric_limits<double>::infinity();
        for (double eps : {1e-2, 1e-4, 1e-6}) {
            const double err = std::abs(inverse_zhukovsky(Complex{E0, eps}).z - target);
            EXPECT_LT(err, prev);
            prev = err;
        }
        EXPECT_LT(prev, 1e-5);
        const Complex below = inverse_zhukovsky(Complex{E0, -1e-8}).z;
        EXPECT_LT(std::abs(below - inverse_zhukovsky(Complex{E0, 0.0}, Branch::minus).z), 1e-7);
    }
}

TEST(Zhukovsky, BranchPointsRejected) {
    EXPECT_THROW(inverse_zhukovsky(Complex{2.0, 0.0}), ValidationError);
    EXPECT_THROW(inverse_zhukovsky(Complex{-2.0, 1e-12}), ValidationError);
    EXPECT_THROW(zhukovsky(Complex{0.0, 0.0}), ValidationError);
}

TEST(SpectralPointTest, FromZ) {
    const auto p = SpectralPoint::from_z(std::polar(1.0, -0.7));
    EXPECT_TRUE(p.on_circle());
    EXPECT_EQ(p.branch, Branch::plus);
    EXPECT_NEAR(p.E.real(), 2.0 * std::cos(0.7), 1e-15);
    EXPECT_THROW(SpectralPoint::from_z(Complex{1.5, 0.0}), ValidationError);
    EXPECT_THROW(SpectralPoint::from_z(Complex{0.0, 0.0}), ValidationError);
}

TEST(Wiener, EvaluateAndNorm) {
    CMatrix a0 = identity(2), a2 = CMatrix::Zero(2, 2), am1 = CMatrix::Zero(2, 2);
    a2(0, 1) = Complex{0.0, 2.0};
    am1(1, 0) = 0.5;
    WienerSeries f(-1, {am1, a0, zeros(2), a2}, 2);
    EXPECT_EQ(f.m_min(), -1);
    EXPECT_EQ(f.m_max(), 2);
    EXPECT_NEAR(wiener_norm(f), 3.5, 1e-15);
    const double k = 0.37;
    const CMatrix expect = am1 * std::polar(1.0, -k) + a0 + a2 * std::polar(1.0, 2 * k);
    EXPECT_LT(fixtures::max_abs_diff(f.evaluate(k), expect), 1e-15);
    const Complex z = std::polar(0.8, 0.3);
    EXPECT_LT(fixtures::max_abs_diff(f.evaluate_z(z), am1 / z + a0 + a2 * z * z), 1e-14);
}

TEST(Wiener, TrimReturnsDroppedMass) {
    CMatrix tiny = 1e-14 * identity(1);
    WienerSeries f(-2, {tiny, identity(1), tiny * 0.5, tiny}, 1);
    const double dropped = f.trim(1e-12);
    EXPECT_EQ(f.m_min(), -1);
    EXPECT_EQ(f.m_max(), -1);
    EXPECT_NEAR(dropped, 2.5e-14, 1e-28);
}

TEST(Wiener, ProductIsConvolutionAndNormSubmultiplicative) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<CMatrix> c1, c2;
        for (int i = 0; i < 4; ++i) c1.push_back(fixtures::random_hermitian(rng, 2));
        for (int i = 0; i < 3; ++i) c2.push_back(CMatrix::Random(2, 2));
        const WienerSeries f(-2, c1, 2), g(1, c2, 2);
        const WienerSeries h = wiener_product(f, g);
        const Complex z = std::polar(1.0, 0.1 * trial);
        EXPECT_LT(fixtures::max_abs_diff(h.evaluate_z(z), f.evaluate_z(z) * g.evaluate_z(z)), 1e-12);
        EXPECT_LE(wiener_norm(h), wiener_norm(f) * wiener_norm(g) * (1 + 1e-12));
    }
}

TEST(Wiener, AdjointOnCircle) {
    const WienerSeries f(1, {CMatrix::Random(2, 2), CMatrix::Random(2, 2)}, 2);
    const WienerSeries g = f.adjoint_on_circle();
    for (double k : {-2.0, 0.4, 1.7})
        EXPECT_LT(fixtures::max_abs_diff(g.evaluate(k), f.evaluate(k).adjoint()), 1e-14);
}

TEST(Wiener, DimensionMismatchRejected) {
    EXPECT_THROW(WienerSeries(0, {identity(2), identity(3)}, 2), ValidationError);
}

TEST(LinearAlgebra, ConditionAndInverse) {
    CMatrix a(2, 2);
    a << 1.0, 0.0, 0.0, 1e-14;
    EXPECT_FALSE(try_inverse(a, 1e12).has_value());
    a(1, 1) = 0.5;
    const auto inv = try_inverse(a);
    ASSERT_TRUE(inv.has_value());
    EXPECT_LT(fixtures::max_abs_diff(a * *inv, identity(2)), 1e-15);
    EXPECT_NEAR(condition_number(a), 2.0, 1e-14);
}

TEST(LinearAlgebra, OpNormIsLargestSingularValue) {
    CMatrix a(2, 2);
    a << 3.0, 0.0, 0.0, Complex(0.0, -4.0);
    EXPECT_NEAR(op_norm(a), 4.0, 1e-14);
}

TEST(MatrixSeqTest, WindowChecks) {
    MatrixSeq s(-2, 3, 2);
    EXPECT_EQ(s.size(), 6u);
    s.set(-2, identity(2));
    EXPECT_LT(fixtures::max_abs_diff(s(-2), identity(2)), 0.0 + 1e-300);
    EXPECT_THROW(s(4), ValidationError);
    EXPECT_THROW(s.set(0, identity(3)), ValidationError);
    EXPECT_THROW(MatrixSeq(3, 2, 1), ValidationError);
}

TEST(PairwiseSum, MatchesNaiveSumAndIsDeterministic) {
    std::vector<CMatrix> terms;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 1000; ++i) terms.push_back(fixtures::random_hermitian(rng, 2));
    CMatrix naive = zeros(2);
    for (const auto& t : terms) naive += t;
    const CMatrix a = pairwise_sum(terms, 2);
    const CMatrix b = pairwise_sum(terms, 2);
    EXPECT_LT(fixtures::max_abs_diff(a, naive), 1e-11);
    EXPECT_EQ((a - b).norm(), 0.0);
    EXPECT_EQ(pairwise_sum(std::vector<CMatrix>{}, 3).rows(), 3);
}

TEST(Parallel, ResultsIndependentOfThreadCount) {
    const std::size_t n = 257;
    auto compute = [&](int threads) {
        std::vector<double> out(n);
        parallel_for(n, [&](std::size_t i) { out[i] = std::sin(static_cast<double>(i)) * 1e3; }, threads);
        return pairwise_sum<double>(out, 0.0);
    };
    const double a = compute(1), b = compute(4), c = compute(8);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
}

TEST(Parallel, FirstExceptionByIndexPropagates) {
    try {
        parallel_for(100, [](std::size_t i) {
            if (i == 17 || i == 90) throw NumericalError("fail " + std::to_string(i));
        }, 4);
        FAIL() << "expected an exception";
    } catch (const NumericalError& e) {
        EXPECT_STREQ(e.what(), "fail 17");
    }
}

TEST(Parallel, ResolveThreads) {
    EXPECT_EQ(resolve_threads(3), 3);
    EXPECT_THROW(resolve_threads(0), ValidationError);
    setenv(kThreadsEnv, "5", 1);
    EXPECT_EQ(resolve_threads(std::nullopt), 5);
    setenv(kThreadsEnv, "abc", 1);
    EXPECT_THROW(resolve_threads(std::nullopt), ValidationError);
    unsetenv(kThreadsEnv);
    EXPECT_EQ(resolve_threads(std::nullopt), 1);
}
