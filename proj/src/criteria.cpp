#include "potkit/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "potkit/potentials.hpp"
#include "potkit/quadrature.hpp"

namespace potkit {

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Divergent: return "divergent";
        case Verdict::Critical: return "critical";
    }
    return "?";
}

double critical_exponent_pure(int N) {
    if (N < 3) throw DomainError("critical_exponent_pure: N >= 3");
    return (N + 1.0) / (N - 1.0);
}

bool subcritical_mixed(int N, double q1, double q2) {
    if (!(q1 >= 0 && q2 >= 0 && q1 + q2 > 1 && q2 < 2))
        throw DomainError("subcritical_mixed: need q1,q2 >= 0, q1+q2 > 1, q2 < 2");
    const bool primary = (N - 1) * q1 + N * q2 < N + 1;
    const bool equivalent = (N - 1) * (q1 + q2 - 1) < 2 - q2;
    if (primary != equivalent)
        throw std::logic_error("subcritical_mixed: equivalent forms disagree");
    return primary;
}

namespace {

struct Chain {
    Vec center;
    std::vector<double> radii;
    std::vector<double> ratios;
};

/// Group family ratios into per-center chains and apply the 10%-growth rule
/// on the shrinking radii.
Verdict chain_verdict(std::vector<Chain>& chains, double growth_tol, int checks) {
    for (auto& ch : chains) {
        std::vector<int> idx(ch.radii.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
        std::sort(idx.begin(), idx.end(),
                  [&](int a, int b) { return ch.radii[a] > ch.radii[b]; });
        int growing = 0;
        for (size_t k = 1; k < idx.size(); ++k) {
            const double prev = ch.ratios[idx[k - 1]], cur = ch.ratios[idx[k]];
            if (!std::isfinite(cur) || !std::isfinite(prev)) return Verdict::Divergent;
            if (cur > prev * (1.0 + growth_tol))
                ++growing;
            else
                growing = 0;
            if (growing >= checks) return Verdict::Divergent;
        }
    }
    return Verdict::Pass;
}

std::vector<Chain> group_chains(const std::vector<std::pair<Vec, double>>& family,
                                const std::vector<double>& ratios) {
    std::vector<Chain> chains;
    for (size_t i = 0; i < family.size(); ++i) {
        bool found = false;
        for (auto& ch : chains)
            if (dist(ch.center, family[i].first) < 1e-12) {
                ch.radii.push_back(family[i].second);
                ch.ratios.push_back(ratios[i]);
                found = true;
                break;
            }
        if (!found)
            chains.push_back({family[i].first, {family[i].second}, {ratios[i]}});
    }
    return chains;
}

std::vector<Vec> measure_centers(const BoundaryMeasure& sigma) {
    std::vector<Vec> centers;
    for (const auto& c : sigma.components()) {
        std::visit(
            [&](const auto& comp) {
                using T = std::decay_t<decltype(comp)>;
                if constexpr (std::is_same_v<T, Atom>) centers.push_back(comp.location);
                else if constexpr (std::is_same_v<T, TabulatedDensity>) {
                    Vec c2 = comp.origin;
                    for (int ax = 0; ax < c2.dim(); ++ax)
                        c2[ax] += 0.5 * comp.counts[ax] * comp.spacing;
                    centers.push_back(c2);
                } else {
                    centers.push_back(comp.center);
                }
            },
            c);
    }
    return centers;
}

}  // namespace

std::vector<std::pair<Vec, double>> default_ball_family(const BoundaryMeasure& sigma,
                                                        double base_radius, int depth) {
    std::vector<Vec> anchors = sigma.singular_points();
    if (anchors.empty()) anchors = measure_centers(sigma);
    if (anchors.empty()) anchors.push_back(Vec{0, 0});
    std::vector<std::pair<Vec, double>> family;
    for (const auto& a : anchors) {
        double r = base_radius;
        for (int k = 0; k <= depth; ++k, r *= 0.5) family.emplace_back(a, r);
    }
    family.emplace_back(anchors.front(), 2.0 * base_radius);
    return family;
}

CriterionReport ball_growth_test(const Domain& domain, const BoundaryMeasure& sigma, double q,
                                 const std::vector<std::pair<Vec, double>>& family,
                                 const CriteriaConfig& cfg) {
    CriterionReport rep;
    rep.criterion_id = "ball-growth";
    if (!sigma.is_positive()) throw DomainError("ball_growth_test: positive measures only");
    if (!(q > critical_exponent_pure(domain.dimension)))
        throw DomainError(
            "ball_growth_test: q <= (N+1)/(N-1); in that range only sigma = 0 is "
            "admissible on the half-space and the growth exponent is vacuous");
    if (sigma.empty_measure()) {
        rep.verdict = Verdict::Pass;
        rep.constant = 0;
        return rep;
    }
    const int N = domain.dimension;
    const double expo = N - (q + 1.0) / (q - 1.0);
    rep.details["exponent"] = expo;

    std::vector<double> ratios;
    for (const auto& [c, r] : family) {
        const double m = sigma.ball_mass(domain, c, r);
        const double ratio = m / std::pow(r, expo);
        ratios.push_back(ratio);
        if (ratio > rep.constant) {
            rep.constant = ratio;
            rep.witness = c;
            rep.witness_scale = r;
        }
    }
    auto chains = group_chains(family, ratios);
    rep.verdict = chain_verdict(chains, cfg.stability_tol, 3);
    if (rep.verdict == Verdict::Divergent) rep.note = "mass/r^expo grows under ball refinement";
    return rep;
}

CriterionReport fefferman_phong_test(const Domain& domain, const BoundaryMeasure& density,
                                     double eps, double q,
                                     const std::vector<std::pair<Vec, double>>& family,
                                     const CriteriaConfig& cfg) {
    CriterionReport rep;
    rep.criterion_id = "fefferman-phong";
    if (!(eps > 0)) throw DomainError("fefferman_phong_test: eps must be positive");
    if (!(q > critical_exponent_pure(domain.dimension)))
        throw DomainError("fefferman_phong_test: q must be supercritical");
    if (!density.is_positive()) throw DomainError("fefferman_phong_test: f must be >= 0");

    const int d = domain.dimension - 1;
    BoundaryMeasure powered;
    for (const auto& c : density.components()) {
        if (std::holds_alternative<Atom>(c))
            throw DomainError("fefferman_phong_test: atoms are not density components");
        if (const auto* rp = std::get_if<RadialPowerDensity>(&c)) {
            RadialPowerDensity pc = *rp;
            pc.exponent = rp->exponent * (1.0 + eps);
            pc.coefficient = std::pow(rp->coefficient, 1.0 + eps);
            if (pc.exponent + d <= 0) {
                rep.verdict = Verdict::Divergent;
                rep.note = "f^{1+eps} is not locally integrable";
                rep.witness = rp->center;
                return rep;
            }
            powered.add(pc);
        } else if (const auto* ub = std::get_if<UniformBallDensity>(&c)) {
            UniformBallDensity pc = *ub;
            pc.coefficient = std::pow(ub->coefficient, 1.0 + eps);
            powered.add(pc);
        } else {
            TabulatedDensity pc = std::get<TabulatedDensity>(c);
            for (double& v : pc.values) v = std::pow(v, 1.0 + eps);
            powered.add(pc);
        }
    }

    const int N = domain.dimension;
    const double expo = N - 1.0 - 2.0 * (eps + 1.0) / (q - 1.0);
    rep.details["exponent"] = expo;
    std::vector<double> ratios;
    for (const auto& [c, r] : family) {
        const double m = powered.ball_mass(domain, c, r);
        const double ratio = m / std::pow(r, expo);
        ratios.push_back(ratio);
        if (ratio > rep.constant) {
            rep.constant = ratio;
            rep.witness = c;
            rep.witness_scale = r;
        }
    }
    auto chains = group_chains(family, ratios);
    rep.verdict = chain_verdict(chains, cfg.stability_tol, 3);
    return rep;
}

namespace {

/// Shared engine for the PDE-level and kernel-model pointwise ratio tests.
struct RatioProblem {
    Domain domain;
    BoundaryKernelKind boundary_kind;
    InteriorKernel interior;
    KernelSpec spec;
    double q;
    double alpha0 = 0;  // rho weight inside the outer potential
};

double ray_slope_fit(const std::vector<double>& ts, const std::vector<double>& rs) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(ts.size());
    for (int i = 0; i < n; ++i) {
        const double x = std::log(ts[i]), y = std::log(rs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

CriterionReport pointwise_engine(const RatioProblem& prob, const BoundaryMeasure& sigma,
                                 const CriteriaConfig& cfg, const std::string& id) {
    CriterionReport rep;
    rep.criterion_id = id;
    if (!sigma.is_positive()) throw DomainError(id + ": positive measures only");
    if (sigma.empty_measure()) {
        rep.verdict = Verdict::Pass;
        rep.constant = 0;
        return rep;
    }

    BoundaryPotential W(prob.domain, sigma, prob.boundary_kind, prob.spec);

    auto bulk_sup = [&](const GridSpec& gs, Vec& wit) {
        auto grid = std::make_shared<Grid>(prob.domain, gs);
        Field Wf = tabulate(W, grid);
        Field F(grid, prob.q * Wf.tail_exponent());
        const int tc = grid->tangential_count();
        for (int i = 0; i < grid->node_count(); ++i) {
            double w = std::pow(Wf[i], prob.q);
            if (prob.alpha0 > 0)
                w *= grid->level_rho_moment(i / tc, prob.alpha0) /
                     grid->level_thickness(i / tc);
            F[i] = w;
        }
        GridOperator op(grid, prob.interior);
        Field uG = op.apply(F);
        double sup = 0;
        for (int i = 0; i < grid->node_count(); ++i) {
            const double r = uG[i] / Wf[i];
            if (r > sup) {
                sup = r;
                wit = grid->node(i);
            }
        }
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const double L = gs.box_halfwidth;
        for (int s = 0; s < cfg.random_probes; ++s) {
            Vec x{L * u(rng), L * u(rng), 0.5 * L * (u(rng) + 1.0) + 1e-6};
            const double r = op.apply_at(F, x) / W.eval(x);
            if (r > sup) {
                sup = r;
                wit = x;
            }
        }
        return sup;
    };

    Vec wit1, wit2;
    const double c1 = bulk_sup(cfg.grid, wit1);
    GridSpec deeper = cfg.grid;
    deeper.levels += 2;
    const double c2 = bulk_sup(deeper, wit2);
    rep.details["bulk_sup"] = c2;
    rep.details["bulk_sup_coarse"] = c1;
    const bool bulk_stable = std::abs(c2 - c1) <= cfg.stability_tol * std::max(c2, 1e-300);
    rep.constant = std::max(c1, c2);
    rep.witness = wit2;

    // self-similar rays toward each singular point: exclusion balls shrink
    // with the probe height, so the truncated ratio is exactly homogeneous
    // for locally homogeneous data and the log-log slope is clean
    const auto spots = sigma.singular_points();
    double worst_slope = 1e300;
    int spot_idx = 0;
    for (const auto& z0 : spots) {
        std::vector<HotSpot> exclusions;
        std::vector<double> rvals;
        const Vec zl = lift(z0);
        for (double t : cfg.ray_heights) {
            exclusions.clear();
            for (const auto& other : spots)
                exclusions.push_back({lift(other), cfg.ray_exclusion * t});
            Vec x = zl;
            x[prob.domain.dimension - 1] = t;
            auto F = [&](const Vec& y) {
                double w = std::pow(W.eval(y), prob.q);
                if (prob.alpha0 > 0) w *= std::pow(prob.domain.rho(y), prob.alpha0);
                return w;
            };
            QuadratureConfig qc;
            const double num = kernel_apply_adaptive(prob.interior, x, F,
                                                     cfg.grid.box_halfwidth, exclusions, qc);
            rvals.push_back(num / W.eval(x));
        }
        const double slope = ray_slope_fit(cfg.ray_heights, rvals);
        rep.details["ray_slope_" + std::to_string(spot_idx)] = slope;
        rep.details["ray_value_" + std::to_string(spot_idx)] = rvals.back();
        worst_slope = std::min(worst_slope, slope);
        ++spot_idx;
    }
    if (!spots.empty()) rep.details["worst_ray_slope"] = worst_slope;

    if (!spots.empty() && worst_slope < -cfg.slope_tol) {
        rep.verdict = Verdict::Divergent;
        rep.note = "ratio grows along a ray toward a singular boundary point";
    } else if (!spots.empty() && worst_slope <= cfg.slope_tol) {
        rep.verdict = Verdict::Critical;
        rep.note = "ray slope within tolerance of zero: critical, inconclusive";
    } else if (!bulk_stable) {
        rep.verdict = Verdict::Divergent;
        rep.note = "bulk sup not stable under grid deepening";
    } else {
        rep.verdict = Verdict::Pass;
    }
    return rep;
}

CriterionReport pointwise_ball(const RatioProblem& prob, const BoundaryMeasure& sigma,
                               const CriteriaConfig& cfg, const std::string& id) {
    CriterionReport rep;
    rep.criterion_id = id;
    if (!sigma.is_positive()) throw DomainError(id + ": positive measures only");
    if (sigma.empty_measure()) {
        rep.verdict = Verdict::Pass;
        return rep;
    }
    BoundaryPotential W(prob.domain, sigma, prob.boundary_kind, prob.spec);
    auto bulk = [&](int levels, Vec& wit) {
        GridSpec gs = cfg.grid;
        gs.levels = levels;
        auto grid = std::make_shared<Grid>(prob.domain, gs);
        Field Wf = tabulate(W, grid);
        Field F(grid);
        for (int i = 0; i < grid->node_count(); ++i) {
            F[i] = std::pow(Wf[i], prob.q) *
                   (prob.alpha0 > 0 ? std::pow(grid->rho(i), prob.alpha0) : 1.0);
        }
        GridOperator op(grid, prob.interior);
        Field uG = op.apply(F);
        double sup = 0;
        for (int i = 0; i < grid->node_count(); ++i) {
            const double r = uG[i] / Wf[i];
            if (r > sup) {
                sup = r;
                wit = grid->node(i);
            }
        }
        return sup;
    };
    Vec w1, w2;
    const double c1 = bulk(cfg.grid.levels, w1);
    const double c2 = bulk(cfg.grid.levels + 2, w2);
    rep.constant = std::max(c1, c2);
    rep.witness = w2;
    rep.details["bulk_sup"] = c2;
    rep.details["bulk_sup_coarse"] = c1;
    if (c2 > c1 * (1.0 + 2.0 * cfg.stability_tol)) {
        rep.verdict = Verdict::Divergent;
        rep.note = "sup grows under boundary-layer deepening";
    } else if (c2 > c1 * (1.0 + cfg.stability_tol)) {
        rep.verdict = Verdict::Critical;
    } else {
        rep.verdict = Verdict::Pass;
    }
    return rep;
}

}  // namespace

CriterionReport pointwise_test(const Domain& domain, const BoundaryMeasure& sigma, double q,
                               const CriteriaConfig& cfg) {
    RatioProblem prob;
    prob.domain = domain;
    prob.boundary_kind = BoundaryKernelKind::Poisson;
    prob.interior = InteriorKernel{InteriorKernelKind::Green, domain, {}};
    prob.q = q;
    prob.alpha0 = 0;
    if (domain.kind == DomainKind::UnitBall) return pointwise_ball(prob, sigma, cfg, "pointwise");
    return pointwise_engine(prob, sigma, cfg, "pointwise");
}

CriterionReport kernel_model_pointwise_test(const Domain& domain, const KernelSpec& spec,
                                            const BoundaryMeasure& sigma,
                                            const CriteriaConfig& cfg) {
    spec.validate(domain.dimension);
    RatioProblem prob;
    prob.domain = domain;
    prob.boundary_kind = BoundaryKernelKind::Model;
    prob.interior = InteriorKernel{InteriorKernelKind::Model, domain, spec};
    prob.spec = spec;
    prob.q = spec.q;
    prob.alpha0 = spec.alpha0;
    if (domain.kind == DomainKind::UnitBall)
        return pointwise_ball(prob, sigma, cfg, "kernel-model-pointwise");
    return pointwise_engine(prob, sigma, cfg, "kernel-model-pointwise");
}

CriterionReport pointwise_test_hardy(const Domain& domain, const BoundaryMeasure& sigma,
                                     double q, double kappa, const CriteriaConfig& cfg) {
    const KernelSpec spec = hardy_kernel_spec(HardyParams(kappa), q);
    CriterionReport rep = kernel_model_pointwise_test(domain, spec, sigma, cfg);
    rep.criterion_id = "pointwise-hardy";
    rep.details["kappa"] = kappa;
    rep.details["alpha_h"] = spec.alpha;
    rep.details["alpha0_h"] = spec.alpha0;
    return rep;
}

CriterionReport quasi_metric_verify(const KernelSpec& spec, const Domain& domain,
                                    int sample_count, uint64_t seed) {
    if (sample_count < 1000) throw DomainError("quasi_metric_verify: need >= 10^3 samples");
    spec.validate(domain.dimension);
    CriterionReport rep;
    rep.criterion_id = "quasi-metric";
    const int N = domain.dimension;

    auto dmetric = [&](const Vec& a, const Vec& b) {
        const double k = n_kernel(spec, domain, a, b);
        return k == kInfiniteKernel ? 0.0 : 1.0 / k;
    };

    auto run = [&](int count, uint64_t sd) {
        std::mt19937_64 rng(sd);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        auto sample_point = [&]() {
            Vec x(N);
            if (domain.kind == DomainKind::HalfSpace) {
                for (int ax = 0; ax < N - 1; ++ax) x[ax] = 4.0 * (2.0 * u(rng) - 1.0);
                // log-uniform heights reach into the boundary layer; some
                // exact boundary points cover the closure
                const double p = u(rng);
                x[N - 1] = p < 0.1 ? 0.0 : std::pow(10.0, -3.0 + 4.0 * u(rng));
            } else {
                double r2 = 2;
                while (r2 > 1) {
                    r2 = 0;
                    for (int ax = 0; ax < N; ++ax) {
                        x[ax] = 2.0 * u(rng) - 1.0;
                        r2 += x[ax] * x[ax];
                    }
                }
            }
            return x;
        };
        double worst = 0;
        for (int i = 0; i < count; ++i) {
            const Vec x = sample_point(), z = sample_point(), y = sample_point();
            const double dxy = dmetric(x, y), dxz = dmetric(x, z), dzy = dmetric(z, y);
            if (dxz + dzy == 0) continue;
            worst = std::max(worst, dxy / (dxz + dzy));
        }
        return worst;
    };

    const double c1 = run(sample_count, seed);
    const double c2 = run(2 * sample_count, seed);
    rep.constant = std::max(c1, c2);
    rep.details["C"] = c1;
    rep.details["C_doubled"] = c2;
    const bool stable = std::abs(c2 - c1) <= 0.10 * std::max(c1, c2);
    rep.verdict = (std::isfinite(rep.constant) && stable) ? Verdict::Pass : Verdict::Fail;
    return rep;
}

double rho_weighted_ball_mass(const Domain& domain, double alpha0, const Vec& x, double s) {
    const int N = domain.dimension;
    if (domain.kind == DomainKind::HalfSpace) {
        const double t = domain.rho(x);
        const double lo = std::max(0.0, t - s), hi = t + s;
        auto f = [&](double tau) {
            const double r2 = s * s - (tau - t) * (tau - t);
            if (r2 <= 0) return 0.0;
            return std::pow(tau, alpha0) * unit_ball_volume(N - 1) *
                   std::pow(std::sqrt(r2), N - 1);
        };
        std::vector<double> br1 = geometric_breaks(lo, 0.5 * (lo + hi), lo, 10, 0.5);
        std::vector<double> br2 = geometric_breaks(0.5 * (lo + hi), hi, hi, 10, 0.5);
        return integrate_panels(f, br1, 12) + integrate_panels(f, br2, 12);
    }
    // unit ball: angular Gauss lattice x radial Gauss along each direction
    const int nu = 24, nphi = 24;
    const GaussRule& ru = gauss_rule(nu);
    double total = 0;
    for (int iu = 0; iu < nu; ++iu) {
        const double cu = ru.nodes[iu];
        const double su = std::sqrt(std::max(0.0, 1.0 - cu * cu));
        for (int ip = 0; ip < nphi; ++ip) {
            const double phi = 2.0 * M_PI * (ip + 0.5) / nphi;
            Vec dir{su * std::cos(phi), su * std::sin(phi), cu};
            const double xd = dot(x, dir);
            const double disc = xd * xd + 1.0 - x.norm2();
            const double rexit = -xd + std::sqrt(std::max(0.0, disc));
            const double rmax = std::min(s, rexit);
            if (rmax <= 0) continue;
            auto f = [&](double r) {
                Vec y = x + r * dir;
                return std::pow(1.0 - y.norm(), alpha0) * r * r;
            };
            total += ru.weights[iu] * (2.0 * M_PI / nphi) * integrate_gl(f, 0.0, rmax, 16);
        }
    }
    return total;
}

CriterionReport doubling_verify(double alpha0, const Domain& domain, const KernelSpec& spec,
                                int sample_count, uint64_t seed) {
    if (!(alpha0 >= 0)) throw DomainError("doubling_verify: alpha0 must be >= 0");
    spec.validate(domain.dimension);
    CriterionReport rep;
    rep.criterion_id = "doubling";
    const int N = domain.dimension;

    // (a) Euclidean-ball comparability nu(B_s(x)) vs (max{rho,s})^{alpha0} s^N
    auto euclid_scan = [&](int refine) {
        double lo = 1e300, hi = 0;
        const int nrho = 6 * refine, ns = 6 * refine;
        for (int i = 0; i < nrho; ++i) {
            const double rho = std::pow(10.0, -2.0 + 3.0 * i / (nrho - 1.0));
            Vec x(N);
            if (domain.kind == DomainKind::HalfSpace) {
                x[N - 1] = rho;
            } else {
                if (rho >= 1) continue;
                x = Vec{0, 0, 1.0 - rho};
            }
            for (int j = 0; j < ns; ++j) {
                double s = std::pow(10.0, -2.0 + 3.0 * j / (ns - 1.0));
                if (domain.kind == DomainKind::UnitBall) s = std::min(s, 1.9);
                const double nuv = rho_weighted_ball_mass(domain, alpha0, x, s);
                if (nuv <= 0) continue;
                const double model = std::pow(std::max(rho, s), alpha0) * std::pow(s, N);
                const double ratio = nuv / model;
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
            }
        }
        return std::make_pair(lo, hi);
    };
    auto [lo1, hi1] = euclid_scan(1);
    auto [lo2, hi2] = euclid_scan(2);
    rep.details["ball_ratio_lo"] = lo2;
    rep.details["ball_ratio_hi"] = hi2;
    const bool euclid_stable = hi2 <= hi1 * 1.10 + 1e-300 && lo2 >= lo1 * 0.90 - 1e-300;

    // (b) dyadic doubling of int_0^r nu(BB_s(x))/s ds/s over the quasi-metric
    // balls of d = 1/N_{alpha,beta} (half-space scan)
    auto nu_quasi_ball = [&](const Vec& x, double s) {
        const int nu_dir = 12, nphi = 12;
        const GaussRule& ru = gauss_rule(nu_dir);
        const double t0 = domain.rho(x);
        double total = 0;
        for (int iu = 0; iu < nu_dir; ++iu) {
            const double cu = ru.nodes[iu];
            const double su = std::sqrt(std::max(0.0, 1.0 - cu * cu));
            for (int ip = 0; ip < nphi; ++ip) {
                const double phi = 2.0 * M_PI * (ip + 0.5) / nphi;
                Vec dir{su * std::cos(phi), su * std::sin(phi), cu};
                const double rexit = cu < 0 ? t0 / (-cu) : 1e30;
                auto dval = [&](double r) {
                    const double ty = t0 + r * cu;
                    const double m = std::max({r, t0, ty});
                    return std::pow(r, N - spec.beta) * std::pow(m, spec.alpha);
                };
                double rstar = 0;
                const double rhi = std::min(rexit, 1e6);
                if (dval(rhi) <= s) {
                    rstar = rhi;
                } else {
                    double lo_r = 0, hi_r = rhi;
                    for (int it = 0; it < 60; ++it) {
                        const double mid = 0.5 * (lo_r + hi_r);
                        (dval(mid) < s ? lo_r : hi_r) = mid;
                    }
                    rstar = lo_r;
                }
                if (rstar <= 0) continue;
                auto f = [&](double r) {
                    return std::pow(t0 + r * cu, alpha0) * std::pow(r, N - 1);
                };
                total += ru.weights[iu] * (2.0 * M_PI / nphi) * integrate_gl(f, 0.0, rstar, 12);
            }
        }
        return total;
    };

    double dbl = 0;
    if (domain.kind == DomainKind::HalfSpace) {
        for (double rho : {0.03, 0.3, 3.0}) {
            Vec x(N);
            x[N - 1] = rho;
            const int ns = 48;
            const double smin = 1e-4, smax = 1e3;
            std::vector<double> sgrid(ns), nuv(ns);
            for (int i = 0; i < ns; ++i) {
                sgrid[i] = smin * std::pow(smax / smin, i / (ns - 1.0));
                nuv[i] = nu_quasi_ball(x, sgrid[i]);
            }
            auto I_of = [&](double r) {
                double acc = 0;
                int first = 0;
                while (first < ns && nuv[first] <= 0) ++first;
                if (first + 1 >= ns) return 0.0;
                // analytic power-law stub below the first sample
                const double p = std::log(nuv[first + 1] / nuv[first]) /
                                 std::log(sgrid[first + 1] / sgrid[first]);
                if (p > 1.0 && sgrid[first] <= r)
                    acc += (nuv[first] / sgrid[first]) / (p - 1.0);
                for (int i = first; i + 1 < ns && sgrid[i] < r; ++i) {
                    const double a = sgrid[i], b = std::min(sgrid[i + 1], r);
                    if (b <= a) continue;
                    const double fa = nuv[i] / (a * a);
                    const double fb = nuv[i + 1] / (sgrid[i + 1] * sgrid[i + 1]);
                    acc += 0.5 * (fa + fb) * (b - a);
                }
                return acc;
            };
            for (double r : {1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
                const double i1 = I_of(r), i2 = I_of(2.0 * r);
                if (i1 > 0) dbl = std::max(dbl, i2 / i1);
            }
        }
        rep.details["doubling_constant"] = dbl;
    }

    (void)sample_count;
    (void)seed;
    rep.constant = hi2 / lo2;
    const bool ok = std::isfinite(hi2) && lo2 > 0 && euclid_stable &&
                    (domain.kind != DomainKind::HalfSpace || (dbl > 0 && std::isfinite(dbl)));
    rep.verdict = ok ? Verdict::Pass : Verdict::Fail;
    return rep;
}

CriterionReport capacity_criterion(const Domain& domain, const BoundaryMeasure& sigma, double q,
                                   const CriteriaConfig& cfg) {
    CriterionReport rep;
    rep.criterion_id = "capacity-compare";
    if (!sigma.is_positive()) throw DomainError("capacity_criterion: positive measures only");
    if (sigma.empty_measure()) {
        rep.verdict = Verdict::Pass;
        rep.constant = 0;
        return rep;
    }
    auto family = default_ball_family(sigma, 1.0, cfg.family_depth);
    std::vector<BallSet> sets;
    sets.reserve(family.size());
    for (const auto& [c, r] : family) sets.push_back(BallSet::ball(c, r));
    auto cmp = measure_vs_capacity(domain, sigma, q, sets);
    rep.constant = cmp.sup_ratio;
    if (cmp.worst_index >= 0) {
        rep.witness = family[cmp.worst_index].first;
        rep.witness_scale = family[cmp.worst_index].second;
    }
    auto chains = group_chains(family, cmp.ratios);
    rep.verdict = chain_verdict(chains, cfg.stability_tol, 3);
    if (rep.verdict == Verdict::Divergent)
        rep.note = "sigma(B)/Cap(B) grows under ball refinement";
    return rep;
}

std::vector<BatteryEntry> standard_battery() {
    std::vector<BatteryEntry> battery;
    auto add = [&](std::string name, BoundaryMeasure m, bool solvable) {
        battery.push_back({std::move(name), std::move(m), solvable});
    };
    add("uniform-small", BoundaryMeasure({UniformBallDensity{Vec{0, 0}, 1.0, 0.05}}), true);
    add("uniform-mid", BoundaryMeasure({UniformBallDensity{Vec{0, 0}, 1.0, 0.5}}), true);
    add("uniform-large", BoundaryMeasure({UniformBallDensity{Vec{0, 0}, 1.0, 5.0}}), true);
    add("uniform-offcenter", BoundaryMeasure({UniformBallDensity{Vec{0.5, 0}, 0.5, 1.0}}), true);
    add("radial-mild", BoundaryMeasure({RadialPowerDensity{Vec{0, 0}, -0.5, 1.0, 1.0}}), true);
    add("radial-growing", BoundaryMeasure({RadialPowerDensity{Vec{0, 0}, 1.0, 1.0, 1.0}}), true);
    {
        BoundaryMeasure two;
        two.add(UniformBallDensity{Vec{-0.8, 0}, 0.4, 0.8});
        two.add(UniformBallDensity{Vec{0.8, 0}, 0.4, 0.8});
        add("uniform-pair", two, true);
    }
    add("atom-unit", BoundaryMeasure::atom(Vec{0, 0}, 1.0), false);
    add("atom-offcenter", BoundaryMeasure::atom(Vec{0.5, 0.3}, 0.25), false);
    {
        BoundaryMeasure two;
        two.add(Atom{Vec{0, 0}, 1.0});
        two.add(Atom{Vec{1, 0}, 0.5});
        add("atom-pair", two, false);
    }
    add("radial-steep", BoundaryMeasure({RadialPowerDensity{Vec{0, 0}, -1.2, 1.0, 1.0}}), false);
    {
        BoundaryMeasure mixed;
        mixed.add(UniformBallDensity{Vec{0, 0}, 1.0, 0.3});
        mixed.add(Atom{Vec{0, 0}, 0.1});
        add("uniform-plus-atom", mixed, false);
    }
    add("radial-steeper",
        BoundaryMeasure({RadialPowerDensity{Vec{-0.5, 0.5}, -1.5, 0.5, 0.2}}), false);
    return battery;
}

}  // namespace potkit
