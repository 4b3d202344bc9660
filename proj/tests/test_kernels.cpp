#include <cmath>
#include <random>

#include "doctest.h"
#include "potkit/kernels.hpp"
#include "potkit/measure.hpp"

using namespace potkit;

namespace {

// Independent closed forms for N = 3, constants from the Gamma function
// rather than the library's quadrature cache.
constexpr double kC3 = 1.0 / (4.0 * M_PI);
constexpr double kK3 = 1.0 / (2.0 * M_PI);

double green_images_oracle(const Vec& x, const Vec& y) {
    Vec ystar = y;
    ystar[2] = -y[2];
    return kC3 * (1.0 / dist(x, y) - 1.0 / dist(x, ystar));
}

double poisson_oracle(const Vec& x, const Vec& z2) {
    const Vec z{z2[0], z2[1], 0.0};
    const double r = dist(x, z);
    return kK3 * x[2] / (r * r * r);
}

std::mt19937_64 rng(7);
double urand(double a, double b) {
    std::uniform_real_distribution<double> u(a, b);
    return u(rng);
}

}  // namespace

TEST_CASE("n_kernel values, symmetry, scale invariance") {
    Domain hs = Domain::half_space(3);
    KernelSpec s22{2, 2, 0, 2};
    CHECK(n_kernel(s22, hs, Vec{0, 0, 1}, Vec{0, 0, 2}) == doctest::Approx(0.25));

    KernelSpec s02{0, 2, 0, 2};
    const Vec a{0.3, -0.2, 0.7}, b{-1.0, 0.4, 0.1};
    CHECK(n_kernel(s02, hs, a, b) == doctest::Approx(1.0 / dist(a, b)));

    for (int i = 0; i < 1000; ++i) {
        Vec x{urand(-2, 2), urand(-2, 2), urand(0.01, 2)};
        Vec y{urand(-2, 2), urand(-2, 2), urand(0.01, 2)};
        if (dist(x, y) < 1e-6) continue;
        CHECK(n_kernel(s22, hs, x, y) ==
              doctest::Approx(n_kernel(s22, hs, y, x)).epsilon(1e-13));
    }

    // n(lx, ly) = l^{-(N-beta+alpha)} n(x,y), exact on the half-space
    KernelSpec s12{1, 2, 0, 2};
    const double lam = 3.5;
    const Vec x{0.4, 0.1, 0.8}, y{-0.6, 0.9, 0.3};
    const double lhs = n_kernel(s12, hs, lam * x, lam * y);
    const double rhs = std::pow(lam, -(3 - s12.beta + s12.alpha)) * n_kernel(s12, hs, x, y);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

    CHECK(n_kernel(s22, hs, x, x) == kInfiniteKernel);
    CHECK_THROWS_AS((KernelSpec{-1, 2, 0, 2}).validate(3), DomainError);
    CHECK_THROWS_AS((KernelSpec{2, 1, 0, 2}).validate(3), DomainError);
}

TEST_CASE("green_exact: method-of-images oracle at 1e-10") {
    Domain hs = Domain::half_space(3);
    CHECK(green_exact(hs, Vec{0, 0, 1}, Vec{0, 0, 2}) ==
          doctest::Approx(1.0 / (6.0 * M_PI)).epsilon(1e-12));

    for (int i = 0; i < 100; ++i) {
        Vec x{urand(-3, 3), urand(-3, 3), urand(0.01, 3)};
        Vec y{urand(-3, 3), urand(-3, 3), urand(0.01, 3)};
        if (dist(x, y) < 1e-3) continue;
        const double g = green_exact(hs, x, y);
        CHECK(g == doctest::Approx(green_images_oracle(x, y)).epsilon(1e-10));
        CHECK(g == doctest::Approx(green_exact(hs, y, x)).epsilon(1e-12));
        CHECK(g > 0);
    }

    // boundary source: the image cancels
    CHECK(green_exact(hs, Vec{0.5, 0.5, 1.0}, Vec{0, 0, 0}) == doctest::Approx(0.0));

    SUBCASE("unit ball: zero boundary values and symmetry") {
        Domain ball = Domain::unit_ball(3);
        CHECK(green_exact(ball, Vec{0, 0, 0}, Vec{0, 0, 0.5}) ==
              doctest::Approx(kC3 * (2.0 - 1.0)).epsilon(1e-12));
        for (int i = 0; i < 100; ++i) {
            Vec x{urand(-1, 1), urand(-1, 1), urand(-1, 1)};
            Vec y{urand(-1, 1), urand(-1, 1), urand(-1, 1)};
            if (x.norm() > 0.95 || y.norm() > 0.95 || dist(x, y) < 1e-3) continue;
            CHECK(green_exact(ball, x, y) ==
                  doctest::Approx(green_exact(ball, y, x)).epsilon(1e-12));
            CHECK(green_exact(ball, x, y) > 0);
        }
        // y approaching the sphere
        Vec x{0.2, 0.1, 0.3};
        CHECK(green_exact(ball, x, Vec{0, 0, 0.999999}) ==
              doctest::Approx(0.0).epsilon(1e-4));
    }
}

TEST_CASE("poisson_exact: normalization oracle") {
    Domain hs = Domain::half_space(3);
    CHECK(poisson_exact(hs, Vec{0, 0, 1}, Vec{0, 0}) ==
          doctest::Approx(kK3).epsilon(1e-12));

    for (int i = 0; i < 100; ++i) {
        Vec x{urand(-3, 3), urand(-3, 3), urand(0.01, 3)};
        Vec z{urand(-3, 3), urand(-3, 3)};
        CHECK(poisson_exact(hs, x, z) == doctest::Approx(poisson_oracle(x, z)).epsilon(1e-10));
    }

    SUBCASE("half-space homogeneity, exact") {
        const Vec x{0.7, -0.4, 0.9};
        const Vec z{1.2, 0.5};
        const double lam = 2.75;
        CHECK(poisson_exact(hs, lam * x, lam * z) ==
              doctest::Approx(std::pow(lam, 1.0 - 3.0) * poisson_exact(hs, x, z)).epsilon(1e-12));
    }

    SUBCASE("boundary integral equals 1 (half-space, radial quadrature)") {
        // int_{R^2} P((0,0,t), z) dz, radially reduced and integrated on a
        // log grid; exact remainder 1 - t/sqrt(R^2+t^2) checked too.
        for (double t : {0.1, 1.0, 10.0}) {
            const double s_lo = 1e-5 * t, s_hi = 4e4 * t;
            const int n = 4000;
            const double dl = std::log(s_hi / s_lo) / n;
            double acc = 0;
            for (int i = 0; i < n; ++i) {
                const double s = s_lo * std::exp((i + 0.5) * dl);
                acc += poisson_exact(hs, Vec{0, 0, t}, Vec{s, 0}) * 2 * M_PI * s * s * dl;
            }
            const double covered = 1.0 - t / std::sqrt(s_hi * s_hi + t * t);
            CHECK(acc == doctest::Approx(covered).epsilon(1e-4));
            CHECK(acc == doctest::Approx(1.0).epsilon(1e-3));
        }
    }

    SUBCASE("boundary integral equals 1 (ball, lat-long oracle)") {
        Domain ball = Domain::unit_ball(3);
        for (Vec x : {Vec{0, 0, 0}, Vec{0.3, 0.2, -0.5}, Vec{0.5, 0, 0}}) {
            const int nu = 600, nphi = 600;
            double acc = 0;
            for (int iu = 0; iu < nu; ++iu) {
                const double u = -1.0 + (iu + 0.5) * 2.0 / nu;
                const double su = std::sqrt(1 - u * u);
                for (int ip = 0; ip < nphi; ++ip) {
                    const double phi = (ip + 0.5) * 2 * M_PI / nphi;
                    Vec z{su * std::cos(phi), su * std::sin(phi), u};
                    acc += poisson_exact(ball, x, z) * (2.0 / nu) * (2 * M_PI / nphi);
                }
            }
            CHECK(acc == doctest::Approx(1.0).epsilon(1e-3));
        }
        // near-boundary axis point: axisymmetric reduction on a graded u-grid
        const Vec x{0, 0, 0.9};
        const int n = 20000;
        double acc = 0;
        for (int i = 0; i < n; ++i) {  // v = 1-u on a log grid
            const double va = 2.0 * std::pow(1e-8, static_cast<double>(i) / n);
            const double vb = 2.0 * std::pow(1e-8, static_cast<double>(i + 1) / n);
            const double v = 0.5 * (va + vb);
            const double u = 1.0 - v;
            const double su = std::sqrt(std::max(0.0, 1 - u * u));
            acc += poisson_exact(ball, x, Vec{su, 0, u}) * 2 * M_PI * (va - vb);
        }
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-3));
    }

    CHECK_THROWS_AS(poisson_exact(hs, Vec{0, 0, 0}, Vec{1, 1}), DomainError);
}

TEST_CASE("grad_bound_kernels: majorant values and finite-difference oracle") {
    Domain hs = Domain::half_space(3);
    GradBounds b = grad_bound_kernels(hs, Vec{0, 0, 1}, Vec{0, 0, 2}, Vec{0, 0});
    CHECK(b.green_grad_bound == doctest::Approx(1.0));
    CHECK(b.poisson_grad_bound == doctest::Approx(1.0));

    // |grad_x G| <= C rho(y) N_{1,1}(x,y) with some finite sampled C
    double worst = 0;
    const double h = 1e-5;
    for (int i = 0; i < 1000; ++i) {
        Vec x{urand(-2, 2), urand(-2, 2), urand(0.05, 2)};
        Vec y{urand(-2, 2), urand(-2, 2), urand(0.05, 2)};
        if (dist(x, y) < 0.05) continue;
        double g2 = 0;
        for (int ax = 0; ax < 3; ++ax) {
            Vec xp = x, xm = x;
            xp[ax] += h;
            xm[ax] -= h;
            const double d = (green_exact(hs, xp, y) - green_exact(hs, xm, y)) / (2 * h);
            g2 += d * d;
        }
        const double bound = grad_bound_kernels(hs, x, y, Vec{0, 0}).green_grad_bound;
        worst = std::max(worst, std::sqrt(g2) / bound);
    }
    CHECK(worst > 0);
    CHECK(worst < 10.0);  // finite sampled majorant constant
    MESSAGE("measured |grad G| / (rho N11) sup: ", worst);
}

TEST_CASE("hardy_exponents") {
    SUBCASE("kappa = 0 reduces to the pure-power exponents") {
        auto e = hardy_exponents(HardyParams(0.0), 3.0);
        CHECK(e.a == 1.0);
        CHECK(e.alpha_h == 2.0);
        CHECK(e.alpha0_h == 4.0);
        CHECK(e.cap_order == 2.0 / 3.0);  // exactly 2/q
    }
    SUBCASE("kappa = 1/4") {
        auto e = hardy_exponents(HardyParams(0.25), 3.0);
        CHECK(e.a == doctest::Approx(0.5));
        CHECK(e.cap_order == doctest::Approx((3.0 + 3.0) / 6.0));
    }
    SUBCASE("kappa = 3/16, q = 3") {
        auto e = hardy_exponents(HardyParams(3.0 / 16.0), 3.0);
        CHECK(e.cap_order == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS(HardyParams(0.3), DomainError);
    CHECK_THROWS_AS(HardyParams(-0.1), DomainError);
}

TEST_CASE("two-sided sandwich against rho rho N22 (half-space literal)") {
    Domain hs = Domain::half_space(3);
    KernelSpec s22{2, 2, 0, 2};
    double lo = 1e300, hi = 0;
    // deterministic log-lattice in the two scale-invariant parameters
    for (int ir = 0; ir < 60; ++ir) {
        for (int it = 0; it < 60; ++it) {
            const double r = std::pow(10.0, -3.0 + 6.0 * ir / 59.0);
            const double t = std::pow(10.0, -3.0 + 6.0 * it / 59.0);
            Vec x{0, 0, 1}, y{r, 0, t};
            const double ratio =
                green_exact(hs, x, y) / (1.0 * t * n_kernel(s22, hs, x, y));
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
    }
    CHECK(lo > 0);
    CHECK(hi < 1e300);
    CHECK(hi / lo < 100.0);
    MESSAGE("G / (rho rho N22) in [", lo, ", ", hi, "]");
}
