#include "potkit/kernels.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "potkit/measure.hpp"
#include "potkit/quadrature.hpp"

namespace potkit {

HardyExponents hardy_exponents(const HardyParams& h, double q) {
    if (!(q > 1)) throw DomainError("hardy_exponents: q must exceed 1");
    const double s = h.root();
    HardyExponents e;
    e.a = 0.5 * (1.0 + s);
    e.alpha_h = 1.0 + s;
    e.alpha0_h = (q + 1.0) * e.a;
    e.cap_order = (q + 3.0 - (q - 1.0) * s) / (2.0 * q);
    return e;
}

KernelSpec hardy_kernel_spec(const HardyParams& h, double q) {
    const HardyExponents e = hardy_exponents(h, q);
    KernelSpec spec;
    spec.alpha = e.alpha_h;
    spec.beta = 2.0;
    spec.alpha0 = e.alpha0_h;
    spec.q = q;
    return spec;
}

double n_kernel(const KernelSpec& spec, const Domain& domain, const Vec& x, const Vec& y) {
    const double r = dist(x, y);
    if (r == 0) return kInfiniteKernel;
    const double m = std::max({r, domain.rho(x), domain.rho(y)});
    const int N = domain.dimension;
    return std::pow(r, spec.beta - N) * std::pow(m, -spec.alpha);
}

double newtonian_constant(int dimension) {
    static std::map<int, double> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(dimension);
    if (it == cache.end())
        it = cache.emplace(dimension, 1.0 / ((dimension - 2) * sphere_surface_area(dimension)))
                 .first;
    return it->second;
}

double poisson_constant(int dimension) {
    static std::map<int, double> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(dimension);
    if (it == cache.end()) {
        // int_{R^{N-1}} x_N |x-z|^{-N} dz at x_N = 1 reduces to a radial
        // 1-D integral; the substitution s = tan(t) maps it onto a smooth
        // integrand on [0, pi/2].
        const int N = dimension;
        const double radial = integrate_gl(
            [N](double t) {
                const double s = std::tan(t), c = std::cos(t);
                return std::pow(s, N - 2) * std::pow(1.0 + s * s, -0.5 * N) / (c * c);
            },
            0.0, 0.5 * M_PI - 1e-12, 64);
        const double full = sphere_surface_area(N - 1) * radial;
        it = cache.emplace(dimension, 1.0 / full).first;
    }
    return it->second;
}

namespace {

Vec reflect(const Vec& y) {
    Vec r = y;
    r[y.dim() - 1] = -r[y.dim() - 1];
    return r;
}

}  // namespace

double green_exact(const Domain& domain, const Vec& x, const Vec& y) {
    const int N = domain.dimension;
    const double cN = newtonian_constant(N);
    const double r = dist(x, y);
    if (r == 0) return kInfiniteKernel;
    if (domain.kind == DomainKind::HalfSpace) {
        const double rstar = dist(x, reflect(y));
        return cN * (std::pow(r, 2 - N) - std::pow(rstar, 2 - N));
    }
    // Unit ball: Kelvin image y* = y/|y|^2 with |y||x-y*| = sqrt(|x|^2|y|^2 - 2x.y + 1).
    const double img2 = x.norm2() * y.norm2() - 2.0 * dot(x, y) + 1.0;
    return cN * (std::pow(r, 2 - N) - std::pow(std::sqrt(img2), 2 - N));
}

double poisson_exact(const Domain& domain, const Vec& x, const Vec& z) {
    const int N = domain.dimension;
    if (domain.kind == DomainKind::HalfSpace) {
        const double t = x[N - 1];
        if (!(t > 0)) throw DomainError("poisson_exact: evaluation point must be interior");
        double r2 = t * t;
        for (int i = 0; i < N - 1; ++i) {
            const double d = x[i] - z[i];
            r2 += d * d;
        }
        return poisson_constant(N) * t * std::pow(r2, -0.5 * N);
    }
    const double x2 = x.norm2();
    if (!(x2 < 1.0)) throw DomainError("poisson_exact: evaluation point must be interior");
    const double r = dist(x, z);
    return (1.0 - x2) * std::pow(r, -static_cast<double>(N)) / sphere_surface_area(N);
}

GradBounds grad_bound_kernels(const Domain& domain, const Vec& x, const Vec& y, const Vec& z) {
    KernelSpec n11;
    n11.alpha = 1;
    n11.beta = 1;
    GradBounds b;
    b.green_grad_bound = domain.rho(y) * n_kernel(n11, domain, x, y);
    const Vec zfull = domain.kind == DomainKind::HalfSpace ? lift(z) : z;
    b.poisson_grad_bound = n_kernel(n11, domain, x, zfull);
    return b;
}

}  // namespace potkit
