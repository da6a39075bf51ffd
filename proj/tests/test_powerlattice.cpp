/**
 * @file test_powerlattice.cpp
 * @brief Exact root-of-unity arithmetic and periodic points of the power map.
 */

#include <gtest/gtest.h>

#include <set>

#include "multispec/powerlattice.hpp"
#include "oracles.hpp"

using namespace multispec;

TEST(CheckedPow, ExactAndGuarded) {
    EXPECT_EQ(checked_pow(2, 10), 1024u);
    EXPECT_EQ(checked_pow(3, 0), 1u);
    EXPECT_EQ(checked_pow(2, 62), u64{1} << 62);
    EXPECT_THROW(checked_pow(2, 63), precondition_error);
    EXPECT_THROW(checked_pow(10, 5, 1000), precondition_error);
}

TEST(UnitRoot, MatchesPolarAndIsExactOnQuarterTurns) {
    for (u64 m : {1u, 2u, 4u, 7u, 15u, 80u, 255u})
        for (u64 a = 0; a < m; ++a) {
            const cplx z = unit_root(a, m);
            EXPECT_NEAR(std::abs(z - oracle::root(static_cast<std::int64_t>(a), static_cast<std::int64_t>(m))), 0.0, 1e-14);
        }
    EXPECT_EQ(unit_root(1, 4), cplx(0.0, 1.0));
    EXPECT_EQ(unit_root(2, 4), cplx(-1.0, 0.0));
}

TEST(FixPer, CountsExhaustive) {
    for (int d = 2; d <= 4; ++d)
        for (int p = 1; p <= 8; ++p) {
            const u64 dp = checked_pow(static_cast<u64>(d), p);
            EXPECT_EQ(fix_set(d, p).size(), dp - 1);
            u64 partition = 0;
            for (int q = 1; q <= p; ++q)
                if (p % q == 0) partition += per_set(d, q).size();
            EXPECT_EQ(partition, dp) << d << "," << p;
            const auto per = per_set(d, p).size();
            if (p <= 6) {
                EXPECT_EQ(static_cast<std::int64_t>(per), oracle::brute_per_count(d, p)) << d << "," << p;
            }
            // d^p - d^[p/2] bounds |Per_p| from below except at p = 6, where the
            // proper divisors 1, 2, 3 together remove more than d^3 points
            const u64 bound = dp - checked_pow(static_cast<u64>(d), p / 2);
            if (p == 6) {
                EXPECT_EQ(per, dp - checked_pow(static_cast<u64>(d), 3) - checked_pow(static_cast<u64>(d), 2) + static_cast<u64>(d));
                EXPECT_LT(per, bound);
            } else {
                EXPECT_GE(per, bound) << d << "," << p;
            }
        }
}

TEST(RootCoord, PeriodAndStep) {
    const auto w = RootCoord::angle(1, 15);
    EXPECT_EQ(w.period(2), 4);
    EXPECT_EQ(w.step(2), RootCoord::angle(2, 15));
    EXPECT_EQ(RootCoord::angle(5, 15), RootCoord::angle(1, 3));
    EXPECT_EQ(RootCoord::angle(5, 15).str(), "1/3");
    EXPECT_EQ(RootCoord::zero().period(2), 1);
    // preperiodic: 1/4 under squaring
    EXPECT_THROW(RootCoord::angle(1, 4).period(2), precondition_error);
    for (int d = 2; d <= 3; ++d) {
        const std::int64_t M = oracle::ipow(d, 5) - 1;
        for (std::int64_t a = 0; a < M; ++a)
            EXPECT_EQ(RootCoord::angle(static_cast<u64>(a), static_cast<u64>(M)).period(d), oracle::brute_period(a, M, d));
    }
}

TEST(RootCoord, ResidueLiftsToCommonModulus) {
    const auto w = RootCoord::angle(1, 3);
    EXPECT_EQ(w.residue_mod(15), 5u);
    EXPECT_THROW(w.residue_mod(7), precondition_error);
    EXPECT_THROW(RootCoord::zero().residue_mod(15), precondition_error);
}

TEST(RootPoint, PeriodIsLcmOfTypeVector) {
    const auto pt = RootPoint::make(2, {RootCoord::angle(1, 3), RootCoord::angle(1, 7)});
    EXPECT_EQ(pt.type_vector, (std::vector<int>{2, 3}));
    EXPECT_EQ(pt.period, 6);
    EXPECT_EQ(point_period(pt), 6);
    EXPECT_FALSE(pt.has_zero());
}

TEST(Orbit, RotatedToLeastAndClosed) {
    const auto pt = RootPoint::make(2, {RootCoord::angle(7, 15), RootCoord::angle(2, 5)});
    const auto orb = orbit_of(pt);
    ASSERT_EQ(static_cast<int>(orb.size()), pt.period);
    EXPECT_TRUE(std::is_sorted(orb.begin(), orb.begin() + 1));
    for (const auto& q : orb) EXPECT_LE(orb.front(), q);
    EXPECT_EQ(step(orb.back()), orb.front());
    std::set<RootPoint> members(orb.begin(), orb.end());
    EXPECT_EQ(members.size(), orb.size());
    EXPECT_TRUE(members.count(pt));
    for (const auto& q : orb) EXPECT_EQ(orbit_key(q), orb.front());
}

TEST(Parse, RoundTrip) {
    EXPECT_EQ(parse_root_coord("zero"), RootCoord::zero());
    EXPECT_EQ(parse_root_coord("2/6"), RootCoord::angle(1, 3));
    EXPECT_EQ(parse_root_coord("0/1").str(), "0/1");
    EXPECT_THROW(parse_root_coord("x"), precondition_error);
    EXPECT_THROW(parse_root_coord("1/0"), precondition_error);
}
