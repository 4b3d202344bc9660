#include <cmath>
#include <random>

#include "doctest.h"
#include "potkit/capacity.hpp"

using namespace potkit;

namespace {
const double kQ = 3.0;
const double kGamma = 2.0 / kQ;
const double kS = kQ / (kQ - 1.0);  // q'
}  // namespace

TEST_CASE("empty set has zero capacity") {
    CHECK(riesz_capacity_primal({}, kGamma, kS) == 0.0);
    CHECK(riesz_capacity_dual({}, kGamma, kS) == 0.0);
    CHECK(weighted_capacity_dual(KernelSpec{2, 2, 4, 3}, kS, {}) == 0.0);
}

TEST_CASE("weak duality and gap on a family of balls") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 5; ++i) {
        const Vec c{u(rng), u(rng)};
        const double r = 0.3 + 0.5 * std::abs(u(rng));
        const double R = c.norm() + r;
        auto est = riesz_capacity(BallSet::ball(c, r), kGamma, kS, CapacityConfig::scaled_to(R));
        CHECK(est.dual <= est.primal);  // exact weak duality of the discrete pair
        CHECK(est.dual > 0);
        CHECK(est.gap() < 0.25 * est.primal);
    }
}

TEST_CASE("monotone in the set") {
    CapacityConfig cfg = CapacityConfig::scaled_to(1.0);
    const double v1 = riesz_capacity_primal(BallSet::ball(Vec{0, 0}, 0.5), kGamma, kS, cfg);
    const double v2 = riesz_capacity_primal(BallSet::ball(Vec{0, 0}, 1.0), kGamma, kS, cfg);
    CHECK(v1 <= v2 * 1.02);
    CHECK(v1 < v2);
    const double d1 = riesz_capacity_dual(BallSet::ball(Vec{0, 0}, 0.5), kGamma, kS, cfg);
    const double d2 = riesz_capacity_dual(BallSet::ball(Vec{0, 0}, 1.0), kGamma, kS, cfg);
    CHECK(d1 <= d2 * 1.02);
}

TEST_CASE("dilation law: Cap(B_2r)/Cap(B_r) = 2^{d - gamma s} within 5%") {
    // fixed absolute discretization for both radii
    CapacityConfig cfg;
    const auto e1 = riesz_capacity(BallSet::ball(Vec{0, 0}, 1.0), kGamma, kS, cfg);
    const auto e2 = riesz_capacity(BallSet::ball(Vec{0, 0}, 2.0), kGamma, kS, cfg);
    const double expected = std::pow(2.0, 2.0 - kGamma * kS);  // = 2 for (N,q)=(3,3)
    CHECK(expected == doctest::Approx(2.0));
    CHECK(e2.primal / e1.primal == doctest::Approx(expected).epsilon(0.05));
    CHECK(e2.dual / e1.dual == doctest::Approx(expected).epsilon(0.05));
    CHECK(e1.dual <= e1.primal);
    CHECK(e2.dual <= e2.primal);
    CHECK(e1.gap() < 0.25 * e1.primal);
    CHECK(e2.gap() < 0.25 * e2.primal);
}

TEST_CASE("single points are capacity-null: refining the grid sends the value to 0") {
    double prev = 1e300;
    for (double h : {0.25, 0.125, 0.0625}) {
        CapacityConfig cfg;
        cfg.box_halfwidth = 2.0;
        cfg.h = h;
        const double v =
            riesz_capacity_primal(BallSet::ball(Vec{0, 0}, 1e-9), kGamma, kS, cfg);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev < 0.02);
}

TEST_CASE("countable subadditivity spot-check") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CapacityConfig cfg = CapacityConfig::scaled_to(2.0);
    for (int i = 0; i < 10; ++i) {
        const Vec c1{u(rng), u(rng)}, c2{u(rng), u(rng)};
        const double r1 = 0.2 + 0.4 * std::abs(u(rng)), r2 = 0.2 + 0.4 * std::abs(u(rng));
        BallSet K1 = BallSet::ball(c1, r1), K2 = BallSet::ball(c2, r2);
        BallSet U{{{c1, r1}, {c2, r2}}};
        const double vu = riesz_capacity_primal(U, kGamma, kS, cfg);
        const double v1 = riesz_capacity_primal(K1, kGamma, kS, cfg);
        const double v2 = riesz_capacity_primal(K2, kGamma, kS, cfg);
        CHECK(vu <= (v1 + v2) * 1.05);
    }
}

TEST_CASE("weighted capacity: Prop-2.8-type consistency with the Riesz dual") {
    // alpha=beta=2, alpha0=q+1, s=q': the boundary-trace capacity is
    // comparable to Cap_{I_{2/q},q'} with radius-independent constants
    KernelSpec spec{2, 2, kQ + 1, kQ};
    double lo = 1e300, hi = 0;
    for (double r : {0.25, 0.5, 1.0, 2.0}) {
        const double wd = weighted_capacity_dual(spec, kS, BallSet::ball(Vec{0, 0}, r));
        const double rd =
            riesz_capacity_dual(BallSet::ball(Vec{0, 0}, r), kGamma, kS,
                                CapacityConfig::scaled_to(r));
        CHECK(wd > 0);
        CHECK(rd > 0);
        const double ratio = wd / rd;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    CHECK(hi / lo < 10.0);
    MESSAGE("weighted/riesz dual ratio range: [", lo, ", ", hi, "]");

    SUBCASE("monotone in E") {
        const double w1 = weighted_capacity_dual(spec, kS, BallSet::ball(Vec{0, 0}, 0.5));
        const double w2 = weighted_capacity_dual(spec, kS, BallSet::ball(Vec{0, 0}, 1.0));
        CHECK(w1 < w2);
    }
}

TEST_CASE("measure_vs_capacity") {
    Domain hs = Domain::half_space(3);

    SUBCASE("zero measure gives zero ratio") {
        BoundaryMeasure zero;
        auto cmp = measure_vs_capacity(hs, zero, kQ, {BallSet::ball(Vec{0, 0}, 1.0)});
        CHECK(cmp.sup_ratio == 0.0);
    }

    SUBCASE("atom against shrinking balls blows up") {
        BoundaryMeasure delta = BoundaryMeasure::atom(Vec{0, 0}, 1.0);
        std::vector<BallSet> family;
        for (double r : {1.0, 0.5, 0.25, 0.125})
            family.push_back(BallSet::ball(Vec{0, 0}, r));
        auto cmp = measure_vs_capacity(hs, delta, kQ, family);
        // mass stays 1 while the capacity ~ r: ratios grow ~ 2x per halving
        CHECK(cmp.ratios.front() < cmp.ratios.back());
        CHECK(cmp.ratios.back() / cmp.ratios.front() > 4.0);
        CHECK(cmp.worst_index == 3);
    }

    SUBCASE("small uniform density has a finite stable sup ratio") {
        BoundaryMeasure unif({UniformBallDensity{Vec{0, 0}, 1.0, 0.05}});
        std::vector<BallSet> family;
        for (double r : {1.0, 0.5, 0.25, 0.125})
            family.push_back(BallSet::ball(Vec{0, 0}, r));
        auto cmp = measure_vs_capacity(hs, unif, kQ, family);
        CHECK(std::isfinite(cmp.sup_ratio));
        // the ratio decays toward small balls: sup attained at the largest
        CHECK(cmp.worst_index == 0);
    }

    SUBCASE("rejects signed measures and empty families") {
        BoundaryMeasure neg = BoundaryMeasure::atom(Vec{0, 0}, -1.0);
        CHECK_THROWS_AS(measure_vs_capacity(hs, neg, kQ, {BallSet::ball(Vec{0, 0}, 1.0)}),
                        DomainError);
        BoundaryMeasure pos = BoundaryMeasure::atom(Vec{0, 0}, 1.0);
        CHECK_THROWS_AS(measure_vs_capacity(hs, pos, kQ, {}), DomainError);
    }
}
