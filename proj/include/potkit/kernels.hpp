#pragma once

#include <functional>
#include <limits>

#include "potkit/domain.hpp"
#include "potkit/vec.hpp"

namespace potkit {

/// Parameters of the model kernel
///   N_{alpha,beta}(x,y) = |x-y|^{beta-N} max{|x-y|, rho(x), rho(y)}^{-alpha},
/// the weight exponent alpha0 of rho in the nonlinearity, and the power q.
struct KernelSpec {
    double alpha = 2;
    double beta = 2;
    double alpha0 = 0;
    double q = 2;

    void validate(int dimension) const {
        if (!(0 <= alpha && alpha <= beta && beta < dimension))
            throw DomainError("KernelSpec: need 0 <= alpha <= beta < N");
        if (!(alpha0 >= 0)) throw DomainError("KernelSpec: alpha0 must be >= 0");
        if (!(q > 1)) throw DomainError("KernelSpec: q must exceed 1");
    }
};

/// Hardy-potential parameters: kappa in [0,1/4] and the derived boundary
/// exponent a = (1+sqrt(1-4 kappa))/2.
struct HardyParams {
    double kappa = 0;

    HardyParams() = default;
    explicit HardyParams(double k) : kappa(k) {
        if (!(k >= 0 && k <= 0.25)) throw DomainError("HardyParams: kappa must lie in [0,1/4]");
    }
    double root() const { return std::sqrt(1.0 - 4.0 * kappa); }
    double a() const { return 0.5 * (1.0 + root()); }
    double alpha_h() const { return 1.0 + root(); }
};

/// The four exponents driving the Hardy-case kernel model:
/// a, alpha_H = 2a, alpha0_H = (q+1)a, and the Riesz capacity order
/// (q+3-(q-1)sqrt(1-4 kappa))/(2q).
struct HardyExponents {
    double a;
    double alpha_h;
    double alpha0_h;
    double cap_order;
};
HardyExponents hardy_exponents(const HardyParams& h, double q);

/// Kernel-model spec realizing the Hardy problem (alpha = 1+sqrt(1-4k),
/// beta = 2, alpha0 = (q+1)(1+sqrt(1-4k))/2).
KernelSpec hardy_kernel_spec(const HardyParams& h, double q);

constexpr double kInfiniteKernel = std::numeric_limits<double>::infinity();

/// N_{alpha,beta}(x,y); +inf on the diagonal.
double n_kernel(const KernelSpec& spec, const Domain& domain, const Vec& x, const Vec& y);

/// Exact Green kernel of -Laplace: method of images on the half-space,
/// the classical kernel on the unit ball. +inf on the diagonal.
double green_exact(const Domain& domain, const Vec& x, const Vec& y);

/// Exact Poisson kernel, normalized so the boundary integral is 1.
/// x interior, z on the boundary (z given in boundary coordinates:
/// N-1 components on the half-space, an N-dim unit vector on the ball).
double poisson_exact(const Domain& domain, const Vec& x, const Vec& z);

/// Gradient majorants rho(y) N_{1,1}(x,y) and N_{1,1}(x,z).
struct GradBounds {
    double green_grad_bound;
    double poisson_grad_bound;
};
GradBounds grad_bound_kernels(const Domain& domain, const Vec& x, const Vec& y, const Vec& z);

/// Newtonian normalization c_N with -Laplace(c_N |x|^{2-N}) = delta, and the
/// half-space Poisson normalization k_N with k_N int x_N/|x-z|^N dz = 1.
/// Both are computed once per dimension by quadrature and cached.
double newtonian_constant(int dimension);
double poisson_constant(int dimension);

}  // namespace potkit
