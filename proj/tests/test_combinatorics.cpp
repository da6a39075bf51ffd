/**
 * @file test_combinatorics.cpp
 * @brief Dimension formulas and admissible multi-index enumeration.
 */

#include <gtest/gtest.h>

#include <set>

#include "multispec/combinatorics.hpp"
#include "oracles.hpp"

using namespace multispec;

TEST(Binomial, MatchesPascalTriangle) {
    for (int n = 0; n <= 30; ++n)
        for (int k = -1; k <= n + 1; ++k) EXPECT_EQ(binomial(n, k), oracle::binom(n, k)) << n << " " << k;
}

TEST(SpaceDims, KnownSmallValues) {
    // quadratic maps of the plane: 6 monomials, minus constant and the two squares
    const auto s = space_dims(2, 2);
    EXPECT_EQ(s.N_dn, 3);
    EXPECT_EQ(s.affine_moduli_dim, 6);
    EXPECT_EQ(space_dims(2, 1).N_dn, 1);
    EXPECT_EQ(space_dims(3, 2).N_dn, 7);
}

TEST(SpaceDims, FormulaAgainstBruteForce) {
    for (int d = 2; d <= 5; ++d)
        for (int n = 1; n <= 4; ++n) {
            const auto s = space_dims(d, n);
            const auto N = static_cast<std::int64_t>(oracle::brute_admissible(d, n, false).size());
            EXPECT_EQ(s.N_dn, N) << d << "," << n;
            EXPECT_EQ(s.N_dn, oracle::binom(d + n, n) - n - 1);
            EXPECT_EQ(s.affine_moduli_dim, n * N);
            EXPECT_EQ(static_cast<std::int64_t>(oracle::brute_admissible(d, n, true).size()), N);
        }
}

TEST(Admissible, EnumerationIsTheBruteForceSet) {
    for (int d = 2; d <= 4; ++d)
        for (int n = 1; n <= 3; ++n)
            for (bool proj : {false, true}) {
                const auto got = enumerate_admissible(d, n, proj ? Setting::projective : Setting::affine);
                std::set<std::vector<int>> a, b;
                for (const auto& I : got) {
                    EXPECT_TRUE(is_admissible(I, d)) << I.str();
                    a.insert(I.entries);
                }
                for (const auto& v : oracle::brute_admissible(d, n, proj)) b.insert(v);
                EXPECT_EQ(a, b);
                EXPECT_EQ(a.size(), got.size()) << "duplicates in enumeration";
            }
}

TEST(Admissible, GradedLexOrder) {
    const auto idx = enumerate_admissible(2, 2, Setting::affine);
    ASSERT_EQ(idx.size(), 3u);
    EXPECT_EQ(idx[0].entries, (std::vector<int>{1, 0}));
    EXPECT_EQ(idx[1].entries, (std::vector<int>{0, 1}));
    EXPECT_EQ(idx[2].entries, (std::vector<int>{1, 1}));
    for (std::size_t i = 1; i < idx.size(); ++i) EXPECT_LE(idx[i - 1].total(), idx[i].total());
}

TEST(Admissible, RejectsPurePowersAndZero) {
    EXPECT_FALSE(is_admissible(MultiIndex{{0, 0}, Setting::affine}, 2));
    EXPECT_FALSE(is_admissible(MultiIndex{{2, 0}, Setting::affine}, 2));
    EXPECT_TRUE(is_admissible(MultiIndex{{2, 1}, Setting::affine}, 3));
    EXPECT_FALSE(is_admissible(MultiIndex{{0, 2, 0}, Setting::projective}, 2));
    EXPECT_TRUE(is_admissible(MultiIndex{{1, 1, 0}, Setting::projective}, 2));
}

TEST(MultiIndex, AffinePartAndDropK) {
    const MultiIndex I{{1, 0, 1}, Setting::projective};
    EXPECT_EQ(I.affine_part(), (std::vector<int>{0, 1}));
    const MultiIndex J{{2, 1, 0}, Setting::affine};
    EXPECT_EQ(drop_k(J, 1).entries, (std::vector<int>{0, 1, 0}));
    EXPECT_THROW(drop_k(J, 4), precondition_error);
    EXPECT_EQ(J.str(), "(2,1,0)");
}

TEST(Exponents, HomogeneousCountIsBinomial) {
    for (int vars = 1; vars <= 4; ++vars)
        for (int deg = 0; deg <= 5; ++deg)
            EXPECT_EQ(static_cast<std::int64_t>(homogeneous_exponents(vars, deg).size()), oracle::binom(deg + vars - 1, vars - 1));
}

TEST(Preconditions, BadArgumentsThrow) {
    EXPECT_THROW(space_dims(1, 2), precondition_error);
    EXPECT_THROW(space_dims(2, 0), precondition_error);
}
