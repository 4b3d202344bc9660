#include <cmath>
#include <random>

#include "doctest.h"
#include "potkit/domain.hpp"
#include "potkit/measure.hpp"

using namespace potkit;

TEST_CASE("rho: distance to the boundary") {
    Domain hs = Domain::half_space(3);
    CHECK(hs.rho(Vec{0, 0, 1}) == doctest::Approx(1.0));
    CHECK(hs.rho(Vec{5, 2, 0.25}) == doctest::Approx(0.25));
    Domain ball = Domain::unit_ball(3);
    CHECK(ball.rho(Vec{0, 0, 0}) == doctest::Approx(1.0));
    CHECK(ball.rho(Vec{0.5, 0, 0}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(hs.rho(Vec{0, 0, -0.1}), DomainError);
    CHECK_THROWS_AS(ball.rho(Vec{1.5, 0, 0}), DomainError);
    CHECK_THROWS_AS(Domain::half_space(2), DomainError);
}

TEST_CASE("measure_ball: atoms and densities") {
    Domain hs = Domain::half_space(3);

    BoundaryMeasure atom = BoundaryMeasure::atom(Vec{0, 0}, 1.0);
    CHECK(atom.ball_mass(hs, Vec{0, 0}, 0.5) == doctest::Approx(1.0));
    CHECK(atom.ball_mass(hs, Vec{3, 0}, 0.5) == doctest::Approx(0.0));

    BoundaryMeasure unif({UniformBallDensity{Vec{0, 0}, 1.0, 1.0}});
    CHECK(unif.ball_mass(hs, Vec{0, 0}, 0.5) == doctest::Approx(M_PI * 0.25).epsilon(1e-10));

    // 1-D radial oracle: int_0^{1/2} s^{-1} 2 pi s ds = pi
    BoundaryMeasure rad({RadialPowerDensity{Vec{0, 0}, -1.0, 1.0, 1.0}});
    CHECK(rad.ball_mass(hs, Vec{0, 0}, 0.5) == doctest::Approx(M_PI).epsilon(1e-10));

    SUBCASE("misaligned uniform density vs brute-force midpoint oracle") {
        const Vec center{0.4, -0.2};
        const double r = 0.7;
        // oracle: 2-D midpoint over the density support
        const int n = 1200;
        double acc = 0;
        const double h = 2.0 / n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Vec z{-1 + (i + 0.5) * h, -1 + (j + 0.5) * h};
                if (z.norm() <= 1.0 && dist(z, center) <= r) acc += h * h;
            }
        CHECK(unif.ball_mass(hs, center, r) == doctest::Approx(acc).epsilon(2e-3));
    }

    SUBCASE("additive over components, monotone in radius") {
        BoundaryMeasure both;
        both.add(Atom{Vec{0, 0}, 2.0});
        both.add(UniformBallDensity{Vec{5, 0}, 1.0, 3.0});
        const double m1 = both.ball_mass(hs, Vec{0, 0}, 1.0);
        CHECK(m1 == doctest::Approx(2.0));
        double prev = 0;
        for (double r : {0.5, 1.0, 2.0, 4.0, 5.0, 6.0, 8.0}) {
            const double m = both.ball_mass(hs, Vec{0, 0}, r);
            CHECK(m >= prev - 1e-12);
            prev = m;
        }
        CHECK(prev == doctest::Approx(2.0 + 3.0 * M_PI).epsilon(1e-8));
    }

    SUBCASE("signed measures are rejected") {
        BoundaryMeasure neg = BoundaryMeasure::atom(Vec{0, 0}, -1.0);
        CHECK_THROWS_AS(neg.ball_mass(hs, Vec{0, 0}, 1.0), DomainError);
        CHECK(neg.absolute().ball_mass(hs, Vec{0, 0}, 1.0) == doctest::Approx(1.0));
    }

    SUBCASE("sphere boundary caps") {
        Domain ball = Domain::unit_ball(3);
        Vec north{0, 0, 1};
        BoundaryMeasure cap({UniformBallDensity{north, 0.5, 1.0}});
        // aligned cap area: 2 pi (1 - cos theta), chordal r: cos theta = 1 - r^2/2
        const double area = 2 * M_PI * (0.5 * 0.5 / 2.0);
        CHECK(cap.ball_mass(ball, north, 2.0) == doctest::Approx(area).epsilon(1e-6));
        CHECK(cap.ball_mass(ball, north, 0.25) ==
              doctest::Approx(2 * M_PI * (0.25 * 0.25 / 2.0)).epsilon(1e-6));
    }
}

TEST_CASE("grid sampling: partition weights and layout") {
    Domain hs = Domain::half_space(3);
    GridSpec spec;
    spec.box_halfwidth = 1.0;
    spec.tangential_h = 1.0;
    spec.grading_ratio = 0.5;
    spec.levels = 2;
    Grid g(hs, spec);

    CHECK(g.level_count() == 2);
    CHECK(g.level_normal(0) == doctest::Approx(0.5));
    CHECK(g.level_normal(1) == doctest::Approx(0.25));
    CHECK(g.tangential_per_axis() == 2);
    CHECK(g.node_count() == 2 * 2 * 2);
    CHECK(g.total_weight() == doctest::Approx(2.0 * 2.0 * 1.0).epsilon(1e-13));
    for (int i = 0; i < g.node_count(); ++i) {
        CHECK(g.weight(i) > 0);
        CHECK(hs.inside(g.node(i)));
    }

    SUBCASE("halving h multiplies tangential count by 2^{N-1}") {
        GridSpec fine = spec;
        fine.tangential_h = 0.5;
        Grid g2(hs, fine);
        CHECK(g2.tangential_count() == 4 * g.tangential_count() / 2 * 2);
        CHECK(g2.tangential_count() == 2 * 2 * g.tangential_count());
    }

    SUBCASE("ball grid weights sum to the ball volume") {
        GridSpec bs;
        bs.box_halfwidth = 1.0;
        bs.tangential_h = 0.5;
        bs.grading_ratio = 0.5;
        bs.levels = 6;
        Grid gb(Domain::unit_ball(3), bs);
        CHECK(gb.total_weight() == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-12));
        for (int i = 0; i < gb.node_count(); ++i) CHECK(Domain::unit_ball(3).inside(gb.node(i)));
    }
}

TEST_CASE("field interpolation: exact at nodes, nonnegative everywhere") {
    Domain hs = Domain::half_space(3);
    GridSpec spec;
    spec.box_halfwidth = 2.0;
    spec.tangential_h = 0.5;
    spec.levels = 8;
    auto grid = std::make_shared<Grid>(hs, spec);
    Field f(grid);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < grid->node_count(); ++i) f[i] = u(rng);

    for (int i = 0; i < grid->node_count(); i += 7)
        CHECK(f.eval(grid->node(i)) == doctest::Approx(f[i]).epsilon(1e-13));

    int checked = 0;
    for (int s = 0; s < 10000; ++s) {
        Vec x{-2 + 4 * u(rng), -2 + 4 * u(rng), 2 * u(rng) + 1e-9};
        const double v = f.eval(x);
        CHECK(v >= 0.0);
        ++checked;
    }
    CHECK(checked == 10000);
}
