#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "jacobi_scatter/potential.hpp"
#include "test_support.hpp"

using namespace jacobi_scatter;

TEST(PotentialTest, ZeroPotential) {
    const Potential v(2, {});
    EXPECT_TRUE(v.empty());
    EXPECT_EQ(v.min_support(), 0);
    EXPECT_EQ(v.max_support(), 0);
    EXPECT_EQ(v(17).norm(), 0.0);
    EXPECT_EQ(potential_norm(v, NormZero{}), 0.0);
}

TEST(PotentialTest, RejectsNonHermitian) {
    CMatrix a(2, 2);
    a << 1.0, 2.0, 3.0, 1.0;
    EXPECT_THROW(Potential(2, {{0, a}}), ValidationError);
    CMatrix b(2, 2);
    b << Complex(1.0, 0.1), 0.0, 0.0, 1.0;
    EXPECT_THROW(Potential(2, {{0, b}}), ValidationError);
}

TEST(PotentialTest, RejectsBadShapesAndOrdering) {
    EXPECT_THROW(Potential(2, {{0, identity(3)}}), ValidationError);
    EXPECT_THROW(Potential(1, {{1, identity(1)}, {1, identity(1)}}), ValidationError);
    EXPECT_THROW(Potential(1, {{2, identity(1)}, {1, identity(1)}}), ValidationError);
    EXPECT_THROW(Potential(0), ValidationError);
    CMatrix nan = identity(1);
    nan(0, 0) = std::nan("");
    EXPECT_THROW(Potential(1, {{0, nan}}), ValidationError);
}

TEST(PotentialTest, Norms) {
    const Potential v(1, {{-2, 2.0 * identity(1)}, {3, -0.5 * identity(1)}});
    EXPECT_NEAR(potential_norm(v, NormZero{}), 2.5, 1e-15);
    EXPECT_NEAR(potential_norm(v, NormRho{1.0}), 2.0 * 3.0 + 0.5 * 4.0, 1e-15);
    EXPECT_NEAR(potential_norm(v, NormInf{}), 2.0, 1e-15);
    EXPECT_NEAR(tail_norm(v, 2), 0.5, 1e-15);
    EXPECT_NEAR(tail_norm(v, 3), 0.0, 1e-15);
    EXPECT_THROW(potential_norm(v, NormRho{-1.0}), ValidationError);
}

TEST(PotentialTest, RhoNormMonotoneInRho) {
    const Potential v = fixtures::random_potential(4);
    double prev = 0.0;
    for (double rho : {0.0, 0.5, 1.0, 2.0}) {
        const double n = potential_norm(v, NormRho{rho});
        EXPECT_GE(n, prev);
        prev = n;
    }
    EXPECT_NEAR(potential_norm(v, NormRho{0.0}), potential_norm(v, NormZero{}), 1e-13);
}

TEST(PotentialTest, ReflectedAndScaled) {
    const Potential v = fixtures::random_potential(9, 2, -1, 3);
    const Potential r = v.reflected();
    EXPECT_EQ(r.min_support(), -3);
    EXPECT_EQ(r.max_support(), 1);
    for (long n = -4; n <= 4; ++n) EXPECT_EQ((r(n) - v(-n)).norm(), 0.0);
    const Potential s = v.scaled(-2.0);
    EXPECT_LT((s(2) + 2.0 * v(2)).norm(), 1e-15);
}

TEST(PotentialJson, ParsesSchemaAndSortsEntries) {
    const auto j = nlohmann::json::parse(R"({"L": 2, "entries": [
        {"n": 3, "re": [[1, 0.5], [0.5, -1]], "im": [[0, 0.25], [-0.25, 0]]},
        {"n": -1, "re": [[2, 0], [0, 2]]}]})");
    const Potential v = potential_from_json(j);
    EXPECT_EQ(v.min_support(), -1);
    EXPECT_EQ(v.max_support(), 3);
    EXPECT_EQ(v(3)(0, 1), Complex(0.5, 0.25));
    EXPECT_EQ(v(-1)(1, 1), Complex(2.0, 0.0));
}

TEST(PotentialJson, RejectsMalformedInput) {
    EXPECT_THROW(potential_from_json(nlohmann::json::parse(R"({"entries": []})")), ValidationError);
    EXPECT_THROW(potential_from_json(nlohmann::json::parse(R"({"L": 2, "entries": [{"n": 0, "re": [[1]]}]})")),
                 ValidationError);
    EXPECT_THROW(potential_from_json(nlohmann::json::parse(R"({"L": 1, "entries": [{"n": 0, "re": [["x"]]}]})")),
                 ValidationError);
    EXPECT_THROW(potential_from_json(nlohmann::json::parse(
                     R"({"L": 1, "entries": [{"n": 0, "re": [[1]]}, {"n": 0, "re": [[2]]}]})")),
                 ValidationError);
    EXPECT_THROW(load_potential("/nonexistent/potential.json"), ValidationError);
}

TEST(PotentialJson, RoundTripIsExact) {
    const Potential v = fixtures::random_potential(21, 3, -4, 4);
    const auto path = std::filesystem::temp_directory_path() / "jacobi_scatter_roundtrip.json";
    save_potential(v, path.string());
    const Potential w = load_potential(path.string());
    std::filesystem::remove(path);
    ASSERT_EQ(w.sites().size(), v.sites().size());
    for (std::size_t i = 0; i < v.sites().size(); ++i) {
        EXPECT_EQ(w.sites()[i].n, v.sites()[i].n);
        EXPECT_EQ((w.sites()[i].value - v.sites()[i].value).norm(), 0.0);
    }
}

TEST(PotentialJson, SeventeenDigits) {
    EXPECT_EQ(format_double17(0.1), "0.10000000000000001");
    EXPECT_EQ(std::stod(format_double17(1.0 / 3.0)), 1.0 / 3.0);
}
