/**
 * @file test_monodromy.cpp
 * @brief Loop monodromy of marked cycles, eigendirection swaps and the disc
 *        chain hyperbolicity certificate.
 */

#include <gtest/gtest.h>

#include "multispec/monodromy.hpp"
#include "oracles.hpp"

using namespace multispec;

namespace {

CVec scalar(cplx z) {
    CVec v(1);
    v << z;
    return v;
}

/// Quadratic-family loop marking both fixed points and the 2-cycle.
LoopSpec quadratic_loop(cplx center, double r, int steps) {
    LoopSpec spec;
    spec.family = FamilyId::unicritical_1d;
    spec.params = {{"d", 2.0}};
    spec.path = circle_path(center, r, steps);
    const cplx c0 = spec.path.front();
    for (const auto& z : oracle::fixed_points(c0)) spec.marked.push_back({scalar(z), 1});
    spec.marked.push_back({scalar(oracle::two_cycle(c0)[0]), 2});
    return spec;
}

/// Index of z among the labelled points.
int label_of(const PermutationResult& r, cplx z) {
    for (std::size_t i = 0; i < r.points.size(); ++i)
        if (std::abs(r.points[i][0] - z) < 1e-9) return static_cast<int>(i);
    return -1;
}

/// Check r.mapping against nearest-neighbour continuation of closed-form roots.
void expect_matches_oracle(const PermutationResult& r, cplx center, double radius) {
    const cplx c0 = center + radius;
    for (auto roots : {std::function<std::vector<cplx>(cplx)>(oracle::fixed_points),
                       std::function<std::vector<cplx>(cplx)>(oracle::two_cycle)}) {
        const auto perm = oracle::follow(roots, center, radius, 20000);
        const auto start = roots(c0);
        for (std::size_t i = 0; i < start.size(); ++i) {
            const int from = label_of(r, start[i]), to = label_of(r, start[static_cast<std::size_t>(perm[i])]);
            ASSERT_GE(from, 0);
            ASSERT_GE(to, 0);
            EXPECT_EQ(r.mapping[static_cast<std::size_t>(from)], to);
        }
    }
}

} // namespace

TEST(CirclePath, ClosedAndUniform) {
    const auto p = circle_path(cplx(0.25, 0.0), 0.1, 360);
    ASSERT_EQ(p.size(), 361u);
    EXPECT_EQ(p.front(), p.back());
    EXPECT_NEAR(std::abs(p[90] - cplx(0.25, 0.1)), 0.0, 1e-15);
}

TEST(Permutations, ComposeInverseAndCycles) {
    const std::vector<int> a{1, 2, 0, 3}, b{0, 1, 3, 2};
    const auto ab = compose(a, b);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(ab[i], b[static_cast<std::size_t>(a[i])]);
    const auto id = compose(a, inverse(a));
    for (std::size_t i = 0; i < id.size(); ++i) EXPECT_EQ(id[i], static_cast<int>(i));
    EXPECT_EQ(cycle_lengths(a), (std::vector<int>{1, 3}));
    EXPECT_EQ(cycle_lengths(b), (std::vector<int>{1, 1, 2}));
}

TEST(RunLoop, QuarterSwapsFixedPoints) {
    const auto r = run_loop(quadratic_loop(0.25, 0.1, 360));
    EXPECT_TRUE(r.commutes_with_dynamics);
    EXPECT_EQ(r.cycle_structure, (std::vector<int>{1, 1, 2}));
    expect_matches_oracle(r, 0.25, 0.1);
    const auto fp = oracle::fixed_points(0.35);
    EXPECT_EQ(r.mapping[static_cast<std::size_t>(label_of(r, fp[0]))], label_of(r, fp[1]));
}

TEST(RunLoop, MinusThreeQuartersSwapsTwoCycle) {
    const auto r = run_loop(quadratic_loop(-0.75, 0.1, 360));
    EXPECT_TRUE(r.commutes_with_dynamics);
    EXPECT_EQ(r.cycle_structure, (std::vector<int>{1, 1, 2}));
    expect_matches_oracle(r, -0.75, 0.1);
    const auto tc = oracle::two_cycle(-0.65);
    EXPECT_EQ(r.mapping[static_cast<std::size_t>(label_of(r, tc[0]))], label_of(r, tc[1]));
    // the 2-cycle's own successor map is the same transposition
    EXPECT_EQ(r.successor[static_cast<std::size_t>(label_of(r, tc[0]))], label_of(r, tc[1]));
}

TEST(RunLoop, AroundZeroIsIdentity) {
    const auto r = run_loop(quadratic_loop(0.0, 0.1, 360));
    EXPECT_TRUE(r.commutes_with_dynamics);
    for (std::size_t i = 0; i < r.mapping.size(); ++i) EXPECT_EQ(r.mapping[i], static_cast<int>(i));
}

TEST(RunLoop, RefinementStable) {
    for (cplx center : {cplx(0.25, 0.0), cplx(-0.75, 0.0), cplx(0.0, 0.0)}) {
        const auto coarse = run_loop(quadratic_loop(center, 0.1, 360));
        const auto fine = run_loop(quadratic_loop(center, 0.1, 1440));
        EXPECT_EQ(coarse.mapping, fine.mapping);
    }
}

TEST(RunLoop, ReversedLoopGivesInverseAndDoubleLoopComposes) {
    auto spec = quadratic_loop(0.25, 0.1, 360);
    const auto fwd = run_loop(spec);
    std::reverse(spec.path.begin(), spec.path.end());
    const auto rev = run_loop(spec);
    EXPECT_EQ(rev.mapping, inverse(fwd.mapping));
    std::reverse(spec.path.begin(), spec.path.end());
    auto twice = spec.path;
    twice.insert(twice.end(), spec.path.begin() + 1, spec.path.end());
    spec.path = twice;
    const auto dbl = run_loop(spec);
    EXPECT_EQ(dbl.mapping, compose(fwd.mapping, fwd.mapping));
}

TEST(RunLoop, RejectsOpenPaths) {
    auto spec = quadratic_loop(0.25, 0.1, 36);
    spec.path.pop_back();
    EXPECT_THROW(run_loop(spec), precondition_error);
}

TEST(RunLoop, SkewFamilyCommutesWithDynamics) {
    LoopSpec spec;
    spec.family = FamilyId::skew_prop23;
    spec.params = {{"d", 2.0}, {"n", 2.0}, {"b", 0.01}, {"h1", 1.0}};
    spec.path = circle_path(cplx(0.25, 0.0), 0.05, 360);
    // base coordinate fixed at u = 1; fibre fixed points near those of y^2 + c + 0.01
    const cplx c0 = spec.path.front() + 0.01;
    for (const auto& y : oracle::fixed_points(c0)) {
        CVec z(2);
        z << 1.0, y;
        spec.marked.push_back({z, 1});
    }
    const auto r = run_loop(spec);
    EXPECT_TRUE(r.commutes_with_dynamics);
    EXPECT_EQ(r.cycle_structure, (std::vector<int>{2}));
}

TEST(EigendirectionSwap, EncirclingLoopSwaps) {
    const auto r = eigendirection_swap_loop(0.5, 10.0, 1e-3, 720);
    ASSERT_EQ(r.eigendirection_swaps.size(), 1u);
    EXPECT_TRUE(r.eigendirection_swaps.front().second);
    EXPECT_TRUE(r.commutes_with_dynamics);
    EXPECT_GT(r.min_eigen_gap, 1e-12);
}

TEST(EigendirectionSwap, NonEncirclingLoopDoesNot) {
    const auto r = eigendirection_swap_loop(0.5, 10.0, 1e-3, 720, cplx(3e-3, 0.0));
    ASSERT_EQ(r.eigendirection_swaps.size(), 1u);
    EXPECT_FALSE(r.eigendirection_swaps.front().second);
}

TEST(EigendirectionSwap, UncoupledFamilyWarns) {
    const auto r = eigendirection_swap_loop(0.5, 0.0, 1e-3, 360);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Hyperbolicity, BoundValue) {
    EXPECT_DOUBLE_EQ(hyperbolicity_bound(2, 0.1, 1.0, 1.0), 40.0);
    EXPECT_DOUBLE_EQ(hyperbolicity_bound(3, 0.1, 1.0, 4.0), 80.0);
    EXPECT_THROW(hyperbolicity_bound(2, 0.6, 1.0, 1.0), precondition_error);
}

TEST(Hyperbolicity, MonicRootsAgainstQuadraticFormula) {
    const cplx a0(0.3, -1.2), a1(-0.5, 0.25);
    const auto r = monic_roots({a0, a1});
    const cplx s = std::sqrt(a1 * a1 - 4.0 * a0);
    for (const cplx want : {(-a1 + s) / 2.0, (-a1 - s) / 2.0}) {
        double best = 1e9;
        for (const auto& z : r) best = std::min(best, std::abs(z - want));
        EXPECT_LT(best, 1e-13);
    }
}

TEST(Hyperbolicity, PreimageReachMatchesSquareRoot) {
    // z^2 - b with |w| = R = 0.1 b: largest preimage modulus is sqrt(b + R)
    for (double b : {1.0, 100.0, 400.0}) {
        const auto cert = disc_chain_certificate({{0.0, 0.0}}, {1.0}, b, 0.1);
        const double reach = std::sqrt(1.1 * b);
        EXPECT_NEAR(cert.radii[0] - cert.margins[0], reach, 1e-9 * reach);
        EXPECT_EQ(cert.certified, reach < 0.1 * b && 2.0 * std::sqrt(0.9 * b) >= 1.0);
    }
}

TEST(Hyperbolicity, LargeParameterCertifiesThreeMapChain) {
    const auto cert = disc_chain_certificate({{0.0, 0.0}, {cplx(0.1, 0.05), 0.0}, {0.0, 0.2}},
                                             {1.0, cplx(0.8, 0.3), -1.2}, 400.0, 0.1);
    EXPECT_TRUE(cert.certified);
    EXPECT_EQ(cert.radii.size(), 3u);
    const auto small = disc_chain_certificate({{0.0, 0.0}, {cplx(0.1, 0.05), 0.0}, {0.0, 0.2}},
                                              {1.0, cplx(0.8, 0.3), -1.2}, 1.0, 0.1);
    EXPECT_FALSE(small.certified);
}
