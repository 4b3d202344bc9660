#include "potkit/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "potkit/potentials.hpp"
#include "potkit/quadrature.hpp"

namespace potkit {

namespace {

/// Shared lattice discretization of the Riesz programs in R^d. Cell centers
/// on an h-lattice over [-B,B]^d, constraint points on the (h/2)-sublattice
/// covering K; both live on the common (h/2)-lattice, so the kernel matrix
/// is a table over integer offsets.
struct LatticeProgram {
    int d = 2;
    double h = 0;
    double B = 0;
    int n = 0;  // cells per axis
    double gamma = 0, s = 0, sp = 0;

    std::vector<int> cpt;        // constraint points, flattened (h/2)-lattice coords
    std::vector<double> ktable;  // kernel over offsets, cell-averaged near 0
    int koff = 0;                // table is [-koff, koff]^d

    double cell_area() const { return std::pow(h, d); }

    double ktab(const int* delta) const {
        int idx = 0, stride = 1;
        for (int ax = 0; ax < d; ++ax) {
            idx += (delta[ax] + koff) * stride;
            stride *= 2 * koff + 1;
        }
        return ktable[idx];
    }
};

/// 2-D cone average of the pure-power Riesz kernel over a square; same
/// face/ray construction as the interior kernels, exact for pure powers.
double riesz_square_average(int d, double gamma_r, double dminus, const Vec& x, const Vec& lo,
                            const Vec& hi) {
    const GaussRule& face_rule = gauss_rule(6);
    const GaussRule& ray_rule = gauss_rule(10);
    double volume = 1.0;
    for (int ax = 0; ax < d; ++ax) volume *= hi[ax] - lo[ax];
    const double pow_exp = 1.0 / (d - gamma_r);
    double total = 0;
    for (int ax = 0; ax < d; ++ax) {
        for (int side = 0; side < 2; ++side) {
            const double face_coord = side == 0 ? lo[ax] : hi[ax];
            const double h_signed = side == 0 ? x[ax] - face_coord : face_coord - x[ax];
            if (h_signed == 0) continue;
            double face_acc = 0;
            const int nf = static_cast<int>(face_rule.nodes.size());
            int pts = 1;
            for (int a2 = 0; a2 < d - 1; ++a2) pts *= nf;
            for (int pi = 0; pi < pts; ++pi) {
                Vec yf(d);
                yf[ax] = face_coord;
                double wgt = 1.0;
                int rem = pi;
                for (int a2 = 0; a2 < d; ++a2) {
                    if (a2 == ax) continue;
                    const int i = rem % nf;
                    rem /= nf;
                    const double half = 0.5 * (hi[a2] - lo[a2]);
                    yf[a2] = 0.5 * (lo[a2] + hi[a2]) + half * face_rule.nodes[i];
                    wgt *= half * face_rule.weights[i];
                }
                double ray = 0;
                for (size_t ri = 0; ri < ray_rule.nodes.size(); ++ri) {
                    const double w = 0.5 * (1.0 + ray_rule.nodes[ri]);
                    const double v = std::pow(w, pow_exp);
                    const double r = v * dist(x, yf);
                    const double kv = std::pow(r, gamma_r - d) / dminus;
                    const double jac = pow_exp * std::pow(w, pow_exp - 1.0);
                    ray += 0.5 * ray_rule.weights[ri] * std::pow(v, d - 1) * kv * jac;
                }
                face_acc += wgt * ray;
            }
            total += h_signed * face_acc;
        }
    }
    return total / volume;
}

LatticeProgram build_program(const BallSet& K, double gamma, double s,
                             const CapacityConfig& cfg) {
    LatticeProgram P;
    P.d = K.balls.empty() ? 2 : K.balls.front().first.dim();
    P.gamma = gamma;
    P.s = s;
    P.sp = s / (s - 1.0);
    P.h = cfg.h;
    P.n = std::max(2, static_cast<int>(std::lround(2.0 * cfg.box_halfwidth / cfg.h)));
    P.B = 0.5 * P.n * P.h;

    if (!(gamma > 0 && gamma < P.d))
        throw DomainError("riesz capacity: gamma must lie in (0, boundary dim)");
    if (!(s > 1)) throw DomainError("riesz capacity: s must exceed 1");
    if (P.d != 2) throw DomainError("capacity lattice programs: boundary dimension 2 only");

    // constraint points: (h/2)-lattice inside K (at least one per ball)
    const double h2 = 0.5 * P.h;
    const int half_pts = static_cast<int>(std::floor(P.B / h2));
    for (int iy = -half_pts; iy <= half_pts; ++iy)
        for (int ix = -half_pts; ix <= half_pts; ++ix) {
            Vec z{ix * h2, iy * h2};
            if (K.contains(z)) {
                P.cpt.push_back(ix);
                P.cpt.push_back(iy);
            }
        }
    if (P.cpt.empty() && !K.empty_set()) {
        for (const auto& [c, r] : K.balls) {
            P.cpt.push_back(static_cast<int>(std::lround(c[0] / h2)));
            P.cpt.push_back(static_cast<int>(std::lround(c[1] / h2)));
        }
    }

    // kernel offset table; offsets up to the box diameter
    P.koff = 2 * P.n + 1;
    long tsize = 1;
    for (int ax = 0; ax < P.d; ++ax) tsize *= 2 * P.koff + 1;
    P.ktable.resize(tsize);
    const double dminus = P.d - gamma;
    int delta[2];
    for (long flat = 0; flat < tsize; ++flat) {
        long rem = flat;
        double r2 = 0;
        for (int ax = 0; ax < P.d; ++ax) {
            delta[ax] = static_cast<int>(rem % (2 * P.koff + 1)) - P.koff;
            rem /= (2 * P.koff + 1);
            r2 += delta[ax] * h2 * delta[ax] * h2;
        }
        const double r = std::sqrt(r2);
        if (r <= 2.5 * P.h) {
            // cell-averaged kernel; the offset is constraint-point-to-cell-center
            Vec x{delta[0] * h2, delta[1] * h2};
            Vec lo{-0.5 * P.h, -0.5 * P.h}, hi{0.5 * P.h, 0.5 * P.h};
            P.ktable[flat] = riesz_square_average(P.d, gamma, dminus, x, lo, hi);
        } else {
            P.ktable[flat] = std::pow(r, gamma - P.d) / dminus;
        }
    }
    return P;
}

/// (A f)_c = sum_j ktab(c - j) a_j f_j
void matvec_constraints(const LatticeProgram& P, const std::vector<double>& f,
                        std::vector<double>& out) {
    const int nc = static_cast<int>(P.cpt.size()) / P.d;
    const double a = P.cell_area();
    out.assign(nc, 0.0);
    int delta[2];
    for (int c = 0; c < nc; ++c) {
        const int* cc = P.cpt.data() + static_cast<size_t>(c) * P.d;
        double acc = 0;
        size_t j = 0;
        for (int iy = 0; iy < P.n; ++iy) {
            delta[1] = cc[1] - (2 * iy - P.n + 1);
            for (int ix = 0; ix < P.n; ++ix, ++j) {
                delta[0] = cc[0] - (2 * ix - P.n + 1);
                acc += P.ktab(delta) * f[j];
            }
        }
        out[c] = acc * a;
    }
}

/// phi_j = sum_c ktab(c - j) m_c  (potential of the masses at cell centers)
void matvec_potential(const LatticeProgram& P, const std::vector<double>& m,
                      std::vector<double>& phi) {
    const int nc = static_cast<int>(P.cpt.size()) / P.d;
    phi.assign(static_cast<size_t>(P.n) * P.n, 0.0);
    int delta[2];
    for (int c = 0; c < nc; ++c) {
        if (m[c] == 0) continue;
        const int* cc = P.cpt.data() + static_cast<size_t>(c) * P.d;
        size_t j = 0;
        for (int iy = 0; iy < P.n; ++iy) {
            delta[1] = cc[1] - (2 * iy - P.n + 1);
            for (int ix = 0; ix < P.n; ++ix, ++j) {
                delta[0] = cc[0] - (2 * ix - P.n + 1);
                phi[j] += P.ktab(delta) * m[c];
            }
        }
    }
}

struct PrimalResult {
    double value = 0;
    double kkt = 0;
    int iterations = 0;
};

PrimalResult solve_primal(const LatticeProgram& P, const CapacityConfig& cfg) {
    const size_t ncell = static_cast<size_t>(P.n) * P.n;
    const int nc = static_cast<int>(P.cpt.size()) / P.d;
    const double a = P.cell_area();

    // Chambolle-Pock primal-dual iteration for
    //   min_{f>=0} sum a f^s + max_{m>=0} <m, 1 - Af>.
    // The f-prox is a per-cell scalar problem, closed form for s = 3/2.
    std::vector<double> f(ncell, 0.0), fbar(ncell, 0.0), m(nc, 0.0), Af(nc), atm(ncell);

    // ||A|| estimate by power iteration
    double anorm = 0;
    {
        std::vector<double> v(ncell, 1.0), Av(nc);
        for (int it = 0; it < 6; ++it) {
            matvec_constraints(P, v, Av);
            matvec_potential(P, Av, v);
            for (auto& x : v) x *= a;  // A^T includes the cell weight once
            double norm = 0;
            for (double x : v) norm += x * x;
            norm = std::sqrt(norm);
            anorm = std::sqrt(norm);
            for (auto& x : v) x /= norm;
        }
        matvec_constraints(P, v, Av);
        double nAv = 0, nv = 0;
        for (double x : Av) nAv += x * x;
        for (double x : v) nv += x * x;
        anorm = std::sqrt(std::sqrt(nAv / nv));
        // one more refinement pass
        matvec_potential(P, Av, v);
        for (auto& x : v) x *= a;
        double nv2 = 0;
        for (double x : v) nv2 += x * x;
        anorm = std::pow(nv2, 0.25);
    }
    if (!(anorm > 0)) anorm = 1.0;
    const double tau = 1.0 / anorm, sigma = 1.0 / anorm;

    auto prox_f = [&](double v) {
        // argmin_{t>=0} tau a t^s + (t-v)^2/2
        if (v <= 0) return 0.0;
        const double c = tau * a * P.s;
        if (std::abs(P.s - 1.5) < 1e-12) {
            const double u = 0.5 * (-c + std::sqrt(c * c + 4.0 * v));
            return u * u;
        }
        double t = v;  // Newton on c t^{s-1} + t - v = 0
        for (int it = 0; it < 40; ++it) {
            const double g = c * std::pow(t, P.s - 1.0) + t - v;
            const double dg = c * (P.s - 1.0) * std::pow(t, P.s - 2.0) + 1.0;
            const double tn = std::max(1e-300, t - g / dg);
            if (std::abs(tn - t) < 1e-14 * std::max(1.0, t)) {
                t = tn;
                break;
            }
            t = tn;
        }
        return t;
    };

    PrimalResult res;
    const int total_iters = cfg.penalty_rounds * cfg.inner_iterations;
    for (int it = 0; it < total_iters; ++it) {
        matvec_constraints(P, fbar, Af);
        for (int c = 0; c < nc; ++c) m[c] = std::max(0.0, m[c] + sigma * (1.0 - Af[c]));
        matvec_potential(P, m, atm);
        for (size_t j = 0; j < ncell; ++j) {
            const double prev = f[j];
            f[j] = prox_f(prev + tau * a * atm[j]);
            fbar[j] = 2.0 * f[j] - prev;
        }
        ++res.iterations;
    }

    // repair to exact feasibility and report the feasible value
    matvec_constraints(P, f, Af);
    const double minA = *std::min_element(Af.begin(), Af.end());
    double value = 0;
    if (minA > 0) {
        const double scale = 1.0 / minA;
        for (size_t j = 0; j < ncell; ++j) value += a * std::pow(f[j] * scale, P.s);
        res.kkt = std::abs(1.0 - minA);
    } else {
        res.kkt = 1.0;
    }
    res.value = value;
    return res;
}

struct DualResult {
    double value = 0;
    int iterations = 0;
};

/// Projected gradient ascent on the concave Lagrangian
///   g(m) = sum_c m_c - (s-1) s^{-s'} sum_j a_j phi_j^{s'},
/// reporting the scale-optimal certificate M^s / J^{s-1} (a lower bound of
/// the discrete primal for every m >= 0).
DualResult solve_dual(const LatticeProgram& P, const CapacityConfig& cfg) {
    const size_t ncell = static_cast<size_t>(P.n) * P.n;
    const int nc = static_cast<int>(P.cpt.size()) / P.d;
    const double a = P.cell_area();
    std::vector<double> m(nc, 1.0), phi(ncell), grad(nc);

    auto eval = [&](const std::vector<double>& mm, double& M, double& J) {
        matvec_potential(P, mm, phi);
        M = 0;
        J = 0;
        for (int c = 0; c < nc; ++c) M += mm[c];
        for (size_t j = 0; j < ncell; ++j) J += a * std::pow(phi[j], P.sp);
    };

    double M, J;
    eval(m, M, J);
    {
        const double lam = P.s * std::pow(M / J, P.s - 1.0);
        for (auto& v : m) v *= lam;
        eval(m, M, J);
    }

    DualResult res;
    const double coef = (P.s - 1.0) * std::pow(P.s, -P.sp);
    double best = M > 0 && J > 0 ? std::pow(M, P.s) / std::pow(J, P.s - 1.0) : 0.0;
    double step = 0.5 * M / std::max(1, nc);
    int delta[2];
    for (int it = 0; it < cfg.dual_iterations; ++it) {
        std::vector<double> w(ncell);
        for (size_t j = 0; j < ncell; ++j) w[j] = a * std::pow(phi[j], P.sp - 1.0);
        for (int c = 0; c < nc; ++c) {
            const int* cc = P.cpt.data() + static_cast<size_t>(c) * P.d;
            double acc = 0;
            size_t j = 0;
            for (int iy = 0; iy < P.n; ++iy) {
                delta[1] = cc[1] - (2 * iy - P.n + 1);
                for (int ix = 0; ix < P.n; ++ix, ++j) {
                    delta[0] = cc[0] - (2 * ix - P.n + 1);
                    acc += P.ktab(delta) * w[j];
                }
            }
            grad[c] = 1.0 - std::pow(P.s, 1.0 - P.sp) * acc;
        }

        const double g0 = M - coef * J;
        bool accepted = false;
        for (int bt = 0; bt < 25; ++bt) {
            std::vector<double> mn(nc);
            for (int c = 0; c < nc; ++c) mn[c] = std::max(0.0, m[c] + step * grad[c]);
            double Mn, Jn;
            eval(mn, Mn, Jn);
            if (Mn - coef * Jn > g0 + 1e-14 * std::abs(g0)) {
                m.swap(mn);
                M = Mn;
                J = Jn;
                step *= 1.3;
                accepted = true;
                break;
            }
            step *= 0.4;
        }
        ++res.iterations;
        if (M > 0 && J > 0)
            best = std::max(best, std::pow(M, P.s) / std::pow(J, P.s - 1.0));
        if (!accepted) break;
    }
    res.value = best;
    return res;
}

}  // namespace

double riesz_capacity_primal(const BallSet& K, double gamma, double s,
                             const CapacityConfig& cfg) {
    if (K.empty_set()) return 0.0;
    LatticeProgram P = build_program(K, gamma, s, cfg);
    return solve_primal(P, cfg).value;
}

double riesz_capacity_dual(const BallSet& K, double gamma, double s, const CapacityConfig& cfg) {
    if (K.empty_set()) return 0.0;
    LatticeProgram P = build_program(K, gamma, s, cfg);
    return solve_dual(P, cfg).value;
}

CapacityEstimate riesz_capacity(const BallSet& K, double gamma, double s,
                                const CapacityConfig& cfg) {
    CapacityEstimate est;
    if (K.empty_set()) return est;
    LatticeProgram P = build_program(K, gamma, s, cfg);
    PrimalResult pr = solve_primal(P, cfg);
    DualResult du = solve_dual(P, cfg);
    est.primal = pr.value;
    est.dual = du.value;
    est.kkt_residual = pr.kkt;
    est.primal_iterations = pr.iterations;
    est.dual_iterations = du.iterations;
    return est;
}

double weighted_capacity_dual(const KernelSpec& spec, double s, const BallSet& K,
                              const WeightedCapacityConfig& cfg) {
    if (K.empty_set()) return 0.0;
    const int d = K.balls.front().first.dim();
    const Domain domain = Domain::half_space(d + 1);
    spec.validate(d + 1);
    const double sp = s / (s - 1.0);
    const double R = std::max(K.outer_radius(), 1e-6);

    // boundary mass points on an (h/2)-lattice inside K
    const double h = cfg.h * R;
    const double h2 = 0.5 * h;
    std::vector<Vec> zc;
    const int half_pts = static_cast<int>(std::ceil(R / h2)) + 1;
    for (int iy = -half_pts; iy <= half_pts; ++iy)
        for (int ix = -half_pts; ix <= half_pts; ++ix) {
            Vec z{ix * h2, iy * h2};
            if (K.contains(z)) zc.push_back(z);
        }
    if (zc.empty())
        for (const auto& [c, r] : K.balls) zc.push_back(c);
    const int nc = static_cast<int>(zc.size());

    // norm quadrature grid: graded half-space box; the grading stops near
    // the mass spacing so point masses are read at the density scale
    GridSpec gs;
    gs.box_halfwidth = cfg.box_factor * R;
    gs.tangential_h = h;
    gs.grading_ratio = cfg.grading_ratio;
    gs.levels = std::max(4, static_cast<int>(std::ceil(std::log(h2 / (2.0 * gs.box_halfwidth)) /
                                                       std::log(cfg.grading_ratio))));
    Grid grid(domain, gs);

    const int nn = grid.node_count();
    std::vector<double> kmat(static_cast<size_t>(nn) * nc);
    for (int i = 0; i < nn; ++i) {
        const Vec& y = grid.node(i);
        for (int c = 0; c < nc; ++c)
            kmat[static_cast<size_t>(i) * nc + c] = n_kernel(spec, domain, y, lift(zc[c]));
    }
    std::vector<double> wrho(nn);
    const int tc = grid.tangential_count();
    const double cell_area = std::pow(grid.tangential_step(), d);
    for (int i = 0; i < nn; ++i)
        wrho[i] = cell_area * grid.level_rho_moment(i / tc, spec.alpha0);

    std::vector<double> m(nc, 1.0), phi(nn), grad(nc);
    auto eval = [&](const std::vector<double>& mm, double& M, double& J) {
        M = 0;
        J = 0;
        for (int i = 0; i < nn; ++i) {
            double p = 0;
            const double* row = kmat.data() + static_cast<size_t>(i) * nc;
            for (int c = 0; c < nc; ++c) p += row[c] * mm[c];
            phi[i] = p;
            J += wrho[i] * std::pow(p, sp);
        }
        for (int c = 0; c < nc; ++c) M += mm[c];
    };

    double M, J;
    eval(m, M, J);
    {
        const double lam = s * std::pow(M / J, s - 1.0);
        for (auto& v : m) v *= lam;
        eval(m, M, J);
    }
    const double coef = (s - 1.0) * std::pow(s, -sp);
    double best = std::pow(M, s) / std::pow(J, s - 1.0);
    double step = 0.5 * M / nc;
    for (int it = 0; it < cfg.dual_iterations; ++it) {
        for (int c = 0; c < nc; ++c) grad[c] = 0;
        for (int i = 0; i < nn; ++i) {
            const double w = wrho[i] * std::pow(phi[i], sp - 1.0);
            const double* row = kmat.data() + static_cast<size_t>(i) * nc;
            for (int c = 0; c < nc; ++c) grad[c] += w * row[c];
        }
        for (int c = 0; c < nc; ++c) grad[c] = 1.0 - std::pow(s, 1.0 - sp) * grad[c];
        const double g0 = M - coef * J;
        bool accepted = false;
        for (int bt = 0; bt < 25; ++bt) {
            std::vector<double> mn(nc);
            for (int c = 0; c < nc; ++c) mn[c] = std::max(0.0, m[c] + step * grad[c]);
            double Mn, Jn;
            eval(mn, Mn, Jn);
            if (Mn - coef * Jn > g0 + 1e-14 * std::abs(g0)) {
                m.swap(mn);
                M = Mn;
                J = Jn;
                step *= 1.3;
                accepted = true;
                break;
            }
            step *= 0.4;
        }
        best = std::max(best, std::pow(M, s) / std::pow(J, s - 1.0));
        if (!accepted) break;
    }
    return best;
}

MeasureCapacityComparison measure_vs_capacity(const Domain& domain, const BoundaryMeasure& sigma,
                                              double q, const std::vector<BallSet>& family) {
    if (!sigma.is_positive())
        throw DomainError("measure_vs_capacity: positive measures only; pass |sigma|");
    if (family.empty()) throw DomainError("measure_vs_capacity: family must be nonempty");
    const double gamma = 2.0 / q;
    const double s = q / (q - 1.0);

    MeasureCapacityComparison out;
    for (const auto& K : family) {
        double mass = 0;
        for (const auto& [c, r] : K.balls) mass += sigma.ball_mass(domain, c, r);
        const double R = std::max(K.outer_radius(), 1e-3);
        const double cap = riesz_capacity_dual(K, gamma, s, CapacityConfig::scaled_to(R));
        out.masses.push_back(mass);
        out.capacities.push_back(cap);
        const double ratio = mass == 0 ? 0.0
                             : cap > 0 ? mass / cap
                                       : std::numeric_limits<double>::infinity();
        out.ratios.push_back(ratio);
        if (ratio > out.sup_ratio) {
            out.sup_ratio = ratio;
            out.worst_index = static_cast<int>(out.ratios.size()) - 1;
        }
    }
    return out;
}

}  // namespace potkit
