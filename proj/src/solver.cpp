#include "potkit/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "potkit/quadrature.hpp"

namespace potkit {

namespace {

struct IterationSetup {
    std::shared_ptr<Grid> grid;
    GridOperator op;                 // interior kernel collocation
    Field forcing;                   // eps * boundary potential
    Field weight;                    // slab-averaged rho^{alpha0} per node (or 1)
    double q;
    double forcing_sup = 0;
};

/// Monotone loop shared by the pure-power and kernel-model solvers.
void run_monotone(const IterationSetup& s, const SolveConfig& cfg, SolveResult& out) {
    const Grid& g = *s.grid;
    const int n = g.node_count();
    Field u(s.grid, s.forcing.tail_exponent());
    Field powered(s.grid, s.q * s.forcing.tail_exponent());

    out.converged = false;
    out.diverged = false;
    if (s.forcing_sup == 0) {
        out.u = u;
        out.converged = true;
        out.iterations = 1;
        return;
    }

    for (int it = 1; it <= cfg.max_iterations; ++it) {
        for (int i = 0; i < n; ++i) powered[i] = std::pow(u[i], s.q) * s.weight[i];
        Field next = s.op.apply(powered);
        double delta = 0, sup = 0;
        bool monotone = true;
        for (int i = 0; i < n; ++i) {
            next[i] += s.forcing[i];
            if (next[i] < u[i]) monotone = false;
            const double denom = std::max(next[i], s.forcing[i]);
            if (denom > 0) delta = std::max(delta, (next[i] - u[i]) / denom);
            sup = std::max(sup, next[i]);
        }
        out.monotone_ok = out.monotone_ok && monotone;
        u = next;
        out.iterations = it;
        if (sup > cfg.divergence_cap * s.forcing_sup) {
            out.diverged = true;
            break;
        }
        if (delta <= cfg.tol) {
            out.converged = true;
            break;
        }
    }
    out.u = u;
}

}  // namespace

SolveResult picard_pure(const Domain& domain, const BoundaryMeasure& sigma,
                        const SolveConfig& cfg) {
    if (!sigma.is_positive()) throw DomainError("picard_pure: positive measures only");
    if (!(cfg.q > 1)) throw DomainError("picard_pure: q must exceed 1");
    SolveResult out;
    out.epsilon_used = cfg.epsilon > 0 ? cfg.epsilon : 1.0;

    auto grid = std::make_shared<Grid>(domain, cfg.grid);
    BoundaryPotential P(domain, sigma, BoundaryKernelKind::Poisson);
    Field Pf = tabulate(P, grid);
    IterationSetup s{grid,
                     GridOperator(grid, InteriorKernel{InteriorKernelKind::Green, domain, {}}),
                     Field(grid, Pf.tail_exponent()), Field(grid), cfg.q, 0.0};
    for (int i = 0; i < grid->node_count(); ++i) {
        s.forcing[i] = out.epsilon_used * Pf[i];
        s.weight[i] = 1.0;
        s.forcing_sup = std::max(s.forcing_sup, s.forcing[i]);
    }
    out.forcing = s.forcing;
    run_monotone(s, cfg, out);

    if (out.converged && !sigma.empty_measure()) {
        out.residual_sup = 0;
        Field powered(grid, cfg.q * Pf.tail_exponent());
        for (int i = 0; i < grid->node_count(); ++i) powered[i] = std::pow(out.u[i], cfg.q);
        Field Gu = s.op.apply(powered);
        double lo = 1e300, hi = 0;
        for (int i = 0; i < grid->node_count(); ++i) {
            const double expect = Gu[i] + s.forcing[i];
            const double denom = std::max(out.u[i], s.forcing[i]);
            if (denom > 0)
                out.residual_sup = std::max(out.residual_sup,
                                            std::abs(out.u[i] - expect) / denom);
            if (Pf[i] > 0) {
                lo = std::min(lo, out.u[i] / Pf[i]);
                hi = std::max(hi, out.u[i] / Pf[i]);
            }
        }
        out.c_low = lo;
        out.c_high = hi;
    }
    return out;
}

SolveResult picard_kernel_model(const Domain& domain, const KernelSpec& spec,
                                const BoundaryMeasure& omega, const SolveConfig& cfg) {
    if (!omega.is_positive()) throw DomainError("picard_kernel_model: positive measures only");
    spec.validate(domain.dimension);
    SolveResult out;
    out.epsilon_used = cfg.epsilon > 0 ? cfg.epsilon : 1.0;

    auto grid = std::make_shared<Grid>(domain, cfg.grid);
    BoundaryPotential W(domain, omega, BoundaryKernelKind::Model, spec);
    Field Wf = tabulate(W, grid);
    IterationSetup s{grid,
                     GridOperator(grid, InteriorKernel{InteriorKernelKind::Model, domain, spec}),
                     Field(grid, Wf.tail_exponent()), Field(grid), spec.q, 0.0};
    const int tc = grid->tangential_count();
    for (int i = 0; i < grid->node_count(); ++i) {
        s.forcing[i] = out.epsilon_used * Wf[i];
        s.weight[i] = grid->is_half_space()
                          ? grid->level_rho_moment(i / tc, spec.alpha0) /
                                grid->level_thickness(i / tc)
                          : std::pow(grid->rho(i), spec.alpha0);
        s.forcing_sup = std::max(s.forcing_sup, s.forcing[i]);
    }
    out.forcing = s.forcing;
    run_monotone(s, cfg, out);

    if (out.converged && !omega.empty_measure()) {
        double lo = 1e300, hi = 0;
        for (int i = 0; i < grid->node_count(); ++i)
            if (Wf[i] > 0) {
                lo = std::min(lo, out.u[i] / Wf[i]);
                hi = std::max(hi, out.u[i] / Wf[i]);
            }
        out.c_low = lo;
        out.c_high = hi;
    }
    return out;
}

namespace {

/// Exact gradient of the half-space Green kernel (method of images).
double green_grad_norm(const Domain& domain, const Vec& x, const Vec& y) {
    const int N = domain.dimension;
    const double cN = newtonian_constant(N);
    Vec ystar = y;
    ystar[N - 1] = -y[N - 1];
    const double r = dist(x, y), rs = dist(x, ystar);
    double g2 = 0;
    for (int ax = 0; ax < N; ++ax) {
        const double gax = cN * (2.0 - N) *
                           ((x[ax] - y[ax]) * std::pow(r, -static_cast<double>(N)) -
                            (x[ax] - ystar[ax]) * std::pow(rs, -static_cast<double>(N)));
        g2 += gax * gax;
    }
    return std::sqrt(g2);
}

double poisson_grad_norm(const Domain& domain, const Vec& x, const Vec& z) {
    const int N = domain.dimension;
    const double kN = poisson_constant(N);
    Vec zf = lift(z);
    const double r = dist(x, zf);
    const double t = x[N - 1];
    double g2 = 0;
    for (int ax = 0; ax < N; ++ax) {
        double gax = -static_cast<double>(N) * kN * t * (x[ax] - zf[ax]) *
                     std::pow(r, -static_cast<double>(N) - 2.0);
        if (ax == N - 1) gax += kN * std::pow(r, -static_cast<double>(N));
        g2 += gax * gax;
    }
    return std::sqrt(g2);
}

}  // namespace

SolveResult fixedpoint_gradient(const Domain& domain, const BoundaryMeasure& sigma, double q1,
                                double q2, const SolveConfig& cfg) {
    if (!(q1 >= 0 && q2 >= 0 && q1 + q2 > 1 && q2 < 2))
        throw DomainError("fixedpoint_gradient: need q1,q2 >= 0, q1+q2 > 1, q2 < 2");
    if (domain.kind != DomainKind::HalfSpace)
        throw DomainError("fixedpoint_gradient: half-space only");
    SolveResult out;
    const double c = q1 + q2;
    const BoundaryMeasure abs_sigma = sigma.absolute();

    auto grid = std::make_shared<Grid>(domain, cfg.grid);
    const int n = grid->node_count();
    const int tc = grid->tangential_count();

    KernelSpec n11;
    n11.alpha = 1;
    n11.beta = 1;
    n11.q = std::max(2.0, c);
    GridOperator Gop(grid, InteriorKernel{InteriorKernelKind::Green, domain, {}});
    GridOperator Nop(grid, InteriorKernel{InteriorKernelKind::GradMajorant, domain, {}});

    BoundaryPotential Ppot(domain, abs_sigma, BoundaryKernelKind::Poisson);
    BoundaryPotential Wpot(domain, abs_sigma, BoundaryKernelKind::Model, n11);
    Field Pf = tabulate(Ppot, grid);
    Field Wf = tabulate(Wpot, grid);

    if (sigma.empty_measure()) {
        out.converged = true;
        out.applicable = true;
        out.u = Field(grid);
        out.grad_majorant = Field(grid);
        out.forcing = Field(grid);
        out.iterations = 1;
        out.epsilon_used = cfg.epsilon > 0 ? cfg.epsilon : 1.0;
        return out;
    }

    std::vector<double> rho_avg(grid->level_count());
    for (int k = 0; k < grid->level_count(); ++k)
        rho_avg[k] = grid->level_rho_moment(k, 1.0) / grid->level_thickness(k);

    // measured discrete majorant constant C over the shared cell tables:
    //   G_cells <= C rho(x) rhoavg(y) N11_cells,  P <= C rho(x) W,
    //   |grad G| <= C rho(y) N11,  |grad P| <= C N11  (sampled)
    double C = 0;
    for (int i = 0; i < n; i += 7) {
        for (int j = 0; j < n; j += 7) {
            const double n11c = Nop.cell_kernel(i, j);
            if (n11c <= 0) continue;
            const double gc = Gop.cell_kernel(i, j);
            C = std::max(C, gc / (grid->rho(i) * rho_avg[j / tc] * n11c));
        }
    }
    for (int i = 0; i < n; ++i)
        if (Wf[i] > 0) C = std::max(C, Pf[i] / (grid->rho(i) * Wf[i]));
    {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        KernelSpec s11 = n11;
        for (int t = 0; t < 2000; ++t) {
            Vec x{4 * u(rng) - 2, 4 * u(rng) - 2, 2 * u(rng) + 1e-3};
            Vec y{4 * u(rng) - 2, 4 * u(rng) - 2, 2 * u(rng) + 1e-3};
            if (dist(x, y) < 0.05) continue;
            C = std::max(C, green_grad_norm(domain, x, y) /
                                (domain.rho(y) * n_kernel(s11, domain, x, y)));
            Vec z{4 * u(rng) - 2, 4 * u(rng) - 2};
            C = std::max(C, poisson_grad_norm(domain, x, z) /
                                n_kernel(s11, domain, x, lift(z)));
        }
    }
    out.lambda = C * c / (c - 1.0);
    const double theta = std::pow(c - 1.0, c - 1.0) / std::pow(C * c, c);

    // threshold: eps^{c-1} * N11[W^c rho^{q1+1}] / W <= theta
    Field thr_in(grid, (c + 1.0) * Wf.tail_exponent());
    for (int i = 0; i < n; ++i)
        thr_in[i] = std::pow(Wf[i], c) * grid->level_rho_moment(i / tc, q1 + 1.0) /
                    grid->level_thickness(i / tc);
    Field thr = Nop.apply(thr_in);
    double thr_ratio = 0;
    for (int i = 0; i < n; ++i)
        if (Wf[i] > 0) thr_ratio = std::max(thr_ratio, thr[i] / Wf[i]);
    out.threshold_ratio = thr_ratio;

    double eps = cfg.epsilon;
    if (eps <= 0) {
        eps = 0.95 * std::pow(theta / thr_ratio, 1.0 / (c - 1.0));
        eps = std::min(eps, 1.0);
    }
    out.epsilon_used = eps;
    if (std::pow(eps, c - 1.0) * thr_ratio > theta) {
        out.applicable = false;
        out.note = "smallness threshold fails at this amplitude";
        out.u = Field(grid);
        out.grad_majorant = Field(grid);
        out.forcing = Field(grid);
        return out;
    }

    // monotone pair iteration from (0,0)
    Field u(grid, Pf.tail_exponent()), gmaj(grid, Wf.tail_exponent());
    Field mixed(grid, c * Wf.tail_exponent());
    Field forcing(grid, Pf.tail_exponent());
    for (int i = 0; i < n; ++i) forcing[i] = eps * Pf[i];
    out.forcing = forcing;
    double forcing_sup = forcing.sup_norm();

    for (int it = 1; it <= cfg.max_iterations; ++it) {
        for (int i = 0; i < n; ++i)
            mixed[i] = std::pow(u[i], q1) * std::pow(gmaj[i], q2) * rho_avg[i / tc];
        Field gu = Gop.apply(mixed);
        Field ng = Nop.apply(mixed);
        double delta = 0;
        bool monotone = true;
        bool in_E = true;
        for (int i = 0; i < n; ++i) {
            const double un = gu[i] + eps * Pf[i];
            const double gn = C * ng[i] + C * eps * Wf[i];
            if (un < u[i] || gn < gmaj[i]) monotone = false;
            const double denom = std::max(un, forcing[i]);
            if (denom > 0) delta = std::max(delta, (un - u[i]) / denom);
            if (un > out.lambda * eps * grid->rho(i) * Wf[i] * (1 + 1e-9) ||
                gn > out.lambda * eps * Wf[i] * (1 + 1e-9))
                in_E = false;
            u[i] = un;
            gmaj[i] = gn;
        }
        out.monotone_ok = out.monotone_ok && monotone;
        if (!in_E)
            throw std::logic_error(
                "fixedpoint_gradient: invariant-set membership violated; the measured "
                "majorant constant is too small, rerun with a larger C");
        out.iterations = it;
        if (u.sup_norm() > cfg.divergence_cap * forcing_sup) {
            out.diverged = true;
            break;
        }
        if (delta <= cfg.tol) {
            out.converged = true;
            break;
        }
    }
    out.u = u;
    out.grad_majorant = gmaj;

    if (out.converged) {
        double lo = 1e300, hi = 0;
        for (int i = 0; i < n; ++i)
            if (Pf[i] > 0) {
                lo = std::min(lo, u[i] / Pf[i]);
                hi = std::max(hi, u[i] / Pf[i]);
            }
        out.c_low = lo;
        out.c_high = hi;
    }
    return out;
}

double solve_residual(const Domain& domain, const Field& u, const BoundaryMeasure& sigma,
                      double q, double eps) {
    auto grid = u.grid_ptr();
    GridOperator op(grid, InteriorKernel{InteriorKernelKind::Green, domain, {}});
    BoundaryPotential P(domain, sigma, BoundaryKernelKind::Poisson);
    Field Pf = tabulate(P, grid);
    Field powered(grid, q * u.tail_exponent());
    for (int i = 0; i < grid->node_count(); ++i) powered[i] = std::pow(u[i], q);
    Field Gu = op.apply(powered);
    double res = 0;
    for (int i = 0; i < grid->node_count(); ++i) {
        const double expect = Gu[i] + eps * Pf[i];
        const double denom = std::max(u[i], eps * Pf[i]);
        if (denom > 0) res = std::max(res, std::abs(u[i] - expect) / denom);
    }
    return res;
}

double bisect_epsilon(const Domain& domain, const BoundaryMeasure& sigma, SolveConfig cfg,
                      double eps_lo, double eps_hi, int steps) {
    cfg.epsilon = eps_hi;
    if (picard_pure(domain, sigma, cfg).converged) return eps_hi;
    cfg.epsilon = eps_lo;
    if (!picard_pure(domain, sigma, cfg).converged) return 0.0;
    double lo = std::log(eps_lo), hi = std::log(eps_hi);
    for (int k = 0; k < steps; ++k) {
        const double mid = 0.5 * (lo + hi);
        cfg.epsilon = std::exp(mid);
        if (picard_pure(domain, sigma, cfg).converged)
            lo = mid;
        else
            hi = mid;
    }
    return std::exp(lo);
}

CriterionReport solver_criterion(const Domain& domain, const BoundaryMeasure& sigma, double q,
                                 const SolveConfig& cfg) {
    CriterionReport rep;
    rep.criterion_id = "solver";
    if (sigma.empty_measure()) {
        rep.verdict = Verdict::Pass;
        return rep;
    }
    SolveConfig base = cfg;
    base.q = q;
    const double e1 = bisect_epsilon(domain, sigma, base);
    SolveConfig deep = base;
    deep.grid.levels += 4;
    const double e2 = bisect_epsilon(domain, sigma, deep);
    rep.details["eps_star"] = e1;
    rep.details["eps_star_deeper"] = e2;
    rep.constant = e1;
    // solvable at some eps iff the amplitude boundary survives resolving the
    // boundary layer 16x deeper
    if (e1 > 0 && e2 > 0.4 * e1)
        rep.verdict = Verdict::Pass;
    else
        rep.verdict = Verdict::Fail;
    return rep;
}

}  // namespace potkit
