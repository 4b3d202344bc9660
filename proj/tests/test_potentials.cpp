#include <cmath>
#include <random>

#include "doctest.h"
#include "potkit/potentials.hpp"

using namespace potkit;

namespace {

const Domain kHS = Domain::half_space(3);

// Polar-arc oracle: int_{B_R(0)} g(|y-z|) dz in R^2 for y at distance e from
// the density center, with g integrable at 0. Independent of the library's
// radial machinery.
double polar_arc_integral(double e, double R, const std::function<double(double)>& g) {
    auto arc = [&](double s) {
        if (e <= R && s <= R - e) return 2 * M_PI;
        if (s >= e + R || s <= std::abs(R - e)) return 0.0;
        const double c = (s * s + e * e - R * R) / (2 * s * e);
        return 2.0 * std::acos(std::min(1.0, std::max(-1.0, c)));
    };
    // log grid from tiny to e+R
    const double lo = 1e-10 * (e + R), hi = e + R;
    const int n = 200000;
    const double dl = std::log(hi / lo) / n;
    double acc = 0;
    for (int i = 0; i < n; ++i) {
        const double s = lo * std::exp((i + 0.5) * dl);
        acc += g(s) * arc(s) * s * s * dl;
    }
    return acc;
}

std::shared_ptr<Grid> make_grid(double L, double h, int m) {
    GridSpec spec;
    spec.box_halfwidth = L;
    spec.tangential_h = h;
    spec.grading_ratio = 0.5;
    spec.levels = m;
    return std::make_shared<Grid>(kHS, spec);
}

}  // namespace

TEST_CASE("poisson_potential: atoms, zero measure, kernel mass") {
    BoundaryMeasure delta = BoundaryMeasure::atom(Vec{0, 0}, 1.0);
    CHECK(poisson_potential(kHS, delta, Vec{0, 0, 1}) ==
          doctest::Approx(1.0 / (2 * M_PI)).epsilon(1e-12));

    BoundaryMeasure zero;
    CHECK(poisson_potential(kHS, zero, Vec{0.3, 0, 0.7}) == 0.0);

    SUBCASE("P[uniform density] tends to 1 as the radius grows") {
        double prev = 0;
        for (double R : {10.0, 50.0, 200.0}) {
            BoundaryMeasure unif({UniformBallDensity{Vec{0, 0}, R, 1.0}});
            const double v = poisson_potential(kHS, unif, Vec{0, 0, 1});
            const double exact = 1.0 - 1.0 / std::sqrt(R * R + 1.0);
            CHECK(v == doctest::Approx(exact).epsilon(2e-3));
            CHECK(v > prev);
            prev = v;
        }
    }

    SUBCASE("off-center density vs polar-arc oracle") {
        const double R = 1.0;
        BoundaryMeasure unif({UniformBallDensity{Vec{0, 0}, R, 1.0}});
        for (Vec x : {Vec{0.5, 0, 0.2}, Vec{1.5, 0.5, 1.0}, Vec{0, 0, 3.0}}) {
            const double t = x[2];
            const double e = std::hypot(x[0], x[1]);
            auto kern = [&](double s) {
                return poisson_constant(3) * t * std::pow(s * s + t * t, -1.5);
            };
            const double oracle = polar_arc_integral(e, R, kern);
            CHECK(poisson_potential(kHS, unif, x) == doctest::Approx(oracle).epsilon(2e-3));
        }
    }

    SUBCASE("radial power density vs oracle, table path vs direct path") {
        BoundaryMeasure rad({RadialPowerDensity{Vec{0, 0}, -0.5, 1.0, 2.0}});
        BoundaryPotential P(kHS, rad, BoundaryKernelKind::Poisson);
        for (Vec x : {Vec{0.3, 0.1, 0.4}, Vec{0, 0, 0.05}, Vec{2.0, 0, 1.0}}) {
            const double direct = P.eval_direct(x);
            const double tabled = P.eval(x);
            CHECK(tabled == doctest::Approx(direct).epsilon(2.5e-2));
        }
        // exact on-axis reduction as an oracle at e = 0
        const Vec x{0, 0, 0.5};
        const double t = x[2];
        const int n = 200000;
        double acc = 0;
        const double dl = std::log(1.0 / 1e-10) / n;
        for (int i = 0; i < n; ++i) {
            const double s = 1e-10 * std::exp((i + 0.5) * dl);
            acc += 2.0 * std::pow(s, -0.5) * poisson_constant(3) * t *
                   std::pow(s * s + t * t, -1.5) * 2 * M_PI * s * s * dl;
        }
        CHECK(P.eval_direct(x) == doctest::Approx(acc).epsilon(1e-3));
    }

    SUBCASE("linearity in the measure") {
        BoundaryMeasure two;
        two.add(Atom{Vec{0, 0}, 0.5});
        two.add(Atom{Vec{1, 0}, 2.0});
        const Vec x{0.2, -0.1, 0.6};
        const double split = 0.5 * poisson_potential(kHS, BoundaryMeasure::atom(Vec{0, 0}, 1), x) +
                             2.0 * poisson_potential(kHS, BoundaryMeasure::atom(Vec{1, 0}, 1), x);
        CHECK(poisson_potential(kHS, two, x) == doctest::Approx(split).epsilon(1e-12));
    }
}

TEST_CASE("green_potential: ball indicator with mean-value oracle") {
    auto grid = make_grid(4.0, 0.125, 10);
    InteriorKernel green{InteriorKernelKind::Green, kHS, {}};
    GridOperator op(grid, green);

    SUBCASE("zero density") {
        Field f(grid);
        CHECK(op.apply_at(f, Vec{0, 0, 1}) == 0.0);
    }

    SUBCASE("indicator of B_{1/2}((0,0,2)) evaluated at the center") {
        // free-space Newtonian ball potential at the center: c3 * 2 pi r^2
        // image term by the mean value property: c3 * vol(B_r) / |x - c*|
        const double r = 0.5;
        const double exact = (1.0 / (4 * M_PI)) * 2 * M_PI * r * r -
                             (1.0 / (4 * M_PI)) * (4.0 / 3.0) * M_PI * r * r * r / 4.0;
        const Vec c{0, 0, 2};
        auto F = [&](const Vec& y) { return dist(y, c) <= r ? 1.0 : 0.0; };
        const double adaptive = kernel_apply_adaptive(green, c, F, 4.0, {}, {});
        CHECK(adaptive == doctest::Approx(exact).epsilon(1e-2));
    }

    SUBCASE("grid collocation agrees with the adaptive path on smooth data") {
        // gentle grading: bulk accuracy needs thin slabs away from the
        // boundary, so r is chosen close to 1 here
        GridSpec gentle;
        gentle.box_halfwidth = 4.0;
        gentle.tangential_h = 0.125;
        gentle.grading_ratio = 0.82;
        gentle.levels = 40;
        auto grid2 = std::make_shared<Grid>(kHS, gentle);
        GridOperator op2(grid2, green);
        Field f(grid2);
        auto smooth = [](const Vec& y) {
            return y[2] * std::exp(-0.4 * y.norm2());
        };
        for (int i = 0; i < grid2->node_count(); ++i) f[i] = smooth(grid2->node(i));
        for (Vec x : {Vec{0, 0, 0.8}, Vec{0.9, -0.4, 0.3}}) {
            const double grid_val = op2.apply_at(f, x);
            const double adaptive = kernel_apply_adaptive(green, x, smooth, 4.0, {}, {});
            CHECK(grid_val == doctest::Approx(adaptive).epsilon(2e-2));
        }
    }

    SUBCASE("monotone in the density") {
        Field f(grid), g(grid);
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < grid->node_count(); ++i) {
            f[i] = u(rng);
            g[i] = f[i] + u(rng);
        }
        for (Vec x : {Vec{0, 0, 0.5}, Vec{1, 1, 1}, Vec{-2, 0.5, 0.1}})
            CHECK(op.apply_at(f, x) <= op.apply_at(g, x));
        Field Ff = op.apply(f), Fg = op.apply(g);
        for (int i = 0; i < grid->node_count(); ++i) CHECK(Ff[i] <= Fg[i]);
    }

    SUBCASE("apply() at nodes agrees with apply_at() at the same nodes") {
        Field f(grid);
        for (int i = 0; i < grid->node_count(); ++i) {
            const Vec& y = grid->node(i);
            f[i] = std::exp(-0.5 * y.norm2()) * y[2];
        }
        Field Ff = op.apply(f);
        for (int i : {0, 1234, 5000, grid->node_count() - 1}) {
            CHECK(Ff[i] == doctest::Approx(op.apply_at(f, grid->node(i))).epsilon(1e-10));
        }
    }
}

TEST_CASE("refinement stability of reported potentials") {
    // halving h and adding one grading level moves values by < 3 eps_q
    auto mk = [](double h, int m) {
        GridSpec spec;
        spec.box_halfwidth = 3.0;
        spec.tangential_h = h;
        spec.grading_ratio = 0.5;
        spec.levels = m;
        return std::make_shared<Grid>(kHS, spec);
    };
    auto coarse = mk(0.125, 10);
    auto fine = mk(0.0625, 11);
    InteriorKernel green{InteriorKernelKind::Green, kHS, {}};
    GridOperator op_c(coarse, green), op_f(fine, green);
    auto fill = [](const std::shared_ptr<Grid>& g) {
        Field f(g, 4.0);
        for (int i = 0; i < g->node_count(); ++i) {
            const Vec& y = g->node(i);
            f[i] = y[2] / std::pow(1.0 + y.norm2(), 2.0);
        }
        return f;
    };
    Field fc = fill(coarse), ff = fill(fine);
    for (Vec x : {Vec{0, 0, 0.4}, Vec{0.7, -0.3, 1.1}, Vec{1.5, 1.5, 0.2}}) {
        const double vc = op_c.apply_at(fc, x);
        const double vf = op_f.apply_at(ff, x);
        CHECK(std::abs(vf - vc) / std::abs(vf) < 3e-3);
    }
}

TEST_CASE("riesz_potential: layer cake") {
    SUBCASE("atom closed form") {
        BoundaryMeasure delta = BoundaryMeasure::atom(Vec{0, 0}, 1.0);
        CHECK(riesz_potential(delta, 1.0, Vec{1, 0}) == doctest::Approx(1.0).epsilon(1e-6));
        // scaling: I[delta](lambda y) = lambda^{gamma-d} I[delta](y)
        const double g = 2.0 / 3.0;
        const double v1 = riesz_potential(delta, g, Vec{0.7, 0.4});
        const double v2 = riesz_potential(delta, g, Vec{1.4, 0.8});
        CHECK(v2 / v1 == doctest::Approx(std::pow(2.0, g - 2.0)).epsilon(1e-6));
        CHECK_THROWS_AS(riesz_potential(delta, 1.0, Vec{0, 0}), DivergenceSignal);
    }
    SUBCASE("zero measure") {
        CHECK(riesz_potential(BoundaryMeasure{}, 1.0, Vec{1, 0}) == 0.0);
    }
    SUBCASE("agrees with convolution for a smooth density") {
        const double gamma = 2.0 / 3.0;
        BoundaryMeasure unif({UniformBallDensity{Vec{0, 0}, 1.0, 1.0}});
        for (double e : {0.0, 0.5, 1.7}) {
            const Vec y{e, 0};
            auto kern = [&](double s) { return riesz_kernel(2, gamma, s); };
            const double conv = polar_arc_integral(e, 1.0, kern);
            CHECK(riesz_potential(unif, gamma, y) == doctest::Approx(conv).epsilon(1e-3));
        }
    }
    SUBCASE("inside a strongly concentrating density the integral diverges") {
        BoundaryMeasure rad({RadialPowerDensity{Vec{0, 0}, -1.5, 1.0, 1.0}});
        CHECK_THROWS_AS(riesz_potential(rad, 1.0, Vec{0, 0}), DivergenceSignal);
    }
}

TEST_CASE("n_potential via the model-kernel boundary potential") {
    KernelSpec s22{2, 2, 4, 3};
    SUBCASE("atom reduces to the kernel value") {
        BoundaryMeasure delta = BoundaryMeasure::atom(Vec{0.5, 0}, 2.0);
        BoundaryPotential NP(kHS, delta, BoundaryKernelKind::Model, s22);
        const Vec x{0, 0, 1};
        CHECK(NP.eval(x) == doctest::Approx(2.0 * n_kernel(s22, kHS, x, Vec{0.5, 0, 0})));
    }
    SUBCASE("alpha=0, beta=2 cross-checked against free-space quadrature") {
        KernelSpec s02{0, 2, 0, 2};
        BoundaryMeasure unif({UniformBallDensity{Vec{0, 0}, 1.0, 1.0}});
        BoundaryPotential NP(kHS, unif, BoundaryKernelKind::Model, s02);
        for (Vec x : {Vec{0, 0, 0.5}, Vec{1.2, 0, 0.3}}) {
            const double t = x[2], e = std::hypot(x[0], x[1]);
            auto kern = [&](double s) { return std::pow(s * s + t * t, -0.5); };
            const double oracle = polar_arc_integral(e, 1.0, kern);
            CHECK(NP.eval_direct(x) == doctest::Approx(oracle).epsilon(1e-3));
        }
    }
    SUBCASE("positivity") {
        BoundaryMeasure unif({UniformBallDensity{Vec{0.3, -0.4}, 0.7, 0.9}});
        BoundaryPotential NP(kHS, unif, BoundaryKernelKind::Model, s22);
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int i = 0; i < 50; ++i) {
            Vec x{u(rng), u(rng), std::abs(u(rng)) + 1e-3};
            CHECK(NP.eval(x) >= 0.0);
        }
    }
}

TEST_CASE("weighted_norm") {
    auto grid = make_grid(1.0, 0.25, 14);
    SUBCASE("constant field against the 1-D weight integral") {
        Field f(grid);
        for (int i = 0; i < grid->node_count(); ++i) f[i] = 1.0;
        // (int_box rho dx)^{1/2} = ((2L)^2 L^2/2)^{1/2} with L = 1
        CHECK(weighted_norm(f, 2.0, 1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
        // alpha0 = 0 recovers the plain L^2 volume
        CHECK(weighted_norm(f, 2.0, 0.0) == doctest::Approx(2.0).epsilon(1e-9));
    }
    SUBCASE("zero field and homogeneity") {
        Field f(grid);
        CHECK(weighted_norm(f, 1.5, 2.0) == 0.0);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < grid->node_count(); ++i) f[i] = u(rng);
        const double n1 = weighted_norm(f, 1.5, 2.0);
        Field g = f;
        for (auto& v : g.values()) v *= -3.0;
        CHECK(weighted_norm(g, 1.5, 2.0) == doctest::Approx(3.0 * n1).epsilon(1e-12));
    }
}

TEST_CASE("boundary potentials on the unit ball") {
    Domain ball = Domain::unit_ball(3);
    const Vec north{0, 0, 1};
    SUBCASE("atom closed form") {
        BoundaryMeasure delta = BoundaryMeasure::atom(north, 1.0);
        const Vec x{0, 0, 0};
        CHECK(poisson_potential(ball, delta, x) ==
              doctest::Approx(1.0 / (4 * M_PI)).epsilon(1e-12));
    }
    SUBCASE("full-sphere uniform density integrates the kernel to ~1") {
        BoundaryMeasure unif({UniformBallDensity{north, 2.0, 1.0}});
        const double v = poisson_potential(ball, unif, Vec{0.2, 0.1, -0.3});
        CHECK(v == doctest::Approx(1.0).epsilon(5e-3));
    }
}
