#include "potkit/potentials.hpp"

#include <algorithm>
#include <cmath>

namespace potkit {

double InteriorKernel::value(const Vec& x, const Vec& y) const {
    switch (kind) {
        case InteriorKernelKind::Green:
            return green_exact(domain, x, y);
        case InteriorKernelKind::Model:
            return n_kernel(spec, domain, x, y);
        case InteriorKernelKind::GradMajorant: {
            KernelSpec n11;
            n11.alpha = 1;
            n11.beta = 1;
            return n_kernel(n11, domain, x, y);
        }
    }
    return 0;
}

double InteriorKernel::far_decay() const {
    const int N = domain.dimension;
    switch (kind) {
        case InteriorKernelKind::Green:
            return static_cast<double>(N);
        case InteriorKernelKind::Model:
            return N - spec.beta + spec.alpha;
        case InteriorKernelKind::GradMajorant:
            return static_cast<double>(N);
    }
    return N;
}

double InteriorKernel::diagonal_exponent() const {
    const int N = domain.dimension;
    switch (kind) {
        case InteriorKernelKind::Green:
            return N - 2.0;
        case InteriorKernelKind::Model:
            return N - spec.beta;
        case InteriorKernelKind::GradMajorant:
            return N - 1.0;
    }
    return N - 2.0;
}

namespace {

/// Half-space boundary kernels as functions of squared tangential offset and
/// height. For z on the boundary max{|x-z|, rho(x), 0} = |x-z|, so the model
/// kernel is the pure power |x-z|^{beta-N-alpha}.
struct FlatKernel {
    BoundaryKernelKind kind;
    int N;
    double kN;     // Poisson normalization
    double power;  // model: (beta-N-alpha)/2 exponent on r^2

    double operator()(double tau2, double t) const {
        const double r2 = tau2 + t * t;
        if (kind == BoundaryKernelKind::Poisson) return kN * t * std::pow(r2, -0.5 * N);
        return std::pow(r2, power);
    }
};

FlatKernel make_flat_kernel(const Domain& domain, BoundaryKernelKind kind, const KernelSpec& spec) {
    FlatKernel k;
    k.kind = kind;
    k.N = domain.dimension;
    k.kN = kind == BoundaryKernelKind::Poisson ? poisson_constant(domain.dimension) : 0.0;
    k.power = 0.5 * (spec.beta - domain.dimension - spec.alpha);
    return k;
}

}  // namespace

BoundaryPotential::BoundaryPotential(const Domain& domain, BoundaryMeasure sigma,
                                     BoundaryKernelKind kind, KernelSpec spec,
                                     QuadratureConfig cfg)
    : domain_(domain), sigma_(std::move(sigma)), kind_(kind), spec_(spec), cfg_(cfg) {
    if (kind_ == BoundaryKernelKind::Model) spec_.validate(domain.dimension);
    tables_.resize(sigma_.components().size());
}

double BoundaryPotential::far_decay() const {
    if (kind_ == BoundaryKernelKind::Poisson) return static_cast<double>(domain_.dimension);
    return domain_.dimension - spec_.beta + spec_.alpha;
}

double BoundaryPotential::component_direct(size_t ci, double e, double t) const {
    const auto& comp = sigma_.components()[ci];
    const int d = domain_.dimension - 1;
    const FlatKernel K = make_flat_kernel(domain_, kind_, spec_);

    double p = 0, R = 0, coef = 0;
    if (const auto* rp = std::get_if<RadialPowerDensity>(&comp)) {
        p = rp->exponent;
        R = rp->cutoff;
        coef = rp->coefficient;
    } else if (const auto* ub = std::get_if<UniformBallDensity>(&comp)) {
        R = ub->radius;
        coef = ub->coefficient;
    } else {
        throw DomainError("component_direct: radial density components only");
    }
    if (coef == 0) return 0.0;

    if (e <= 1e-14 * std::max(1.0, R)) {
        // On-axis: the angular integral is the full sphere.
        auto f = [&](double s) { return std::pow(s, p + d - 1) * K(s * s, t); };
        std::vector<double> br = geometric_breaks(0.0, R, 0.0, 30, 0.55);
        return coef * sphere_surface_area(d) * integrate_panels(f, br, 12);
    }

    // (s, phi) reduction around the density center; the kernel peaks at
    // s ~ e, phi ~ 0 when t is small.
    const int kphi = d - 2;
    auto angular = [&](double s) {
        auto g = [&](double phi) {
            const double tau2 = e * e + s * s - 2.0 * e * s * std::cos(phi);
            return K(tau2, t) * (kphi == 0 ? 1.0 : std::pow(std::sin(phi), kphi));
        };
        // graded toward phi = 0 where the kernel peaks
        std::vector<double> br = geometric_breaks(0.0, M_PI, 0.0, 10, 0.4);
        return integrate_panels(g, br, 8);
    };
    auto f = [&](double s) { return std::pow(s, p + d - 1) * angular(s); };

    std::vector<double> marks{0.0, R};
    if (e < R) marks.push_back(e);
    if (e - t > 0 && e - t < R) marks.push_back(e - t);
    if (e + t < R) marks.push_back(e + t);
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    double val = 0;
    for (size_t i = 0; i + 1 < marks.size(); ++i) {
        const double a = marks[i], b = marks[i + 1];
        // grade toward both endpoints (power singularity at 0, kernel peak at e)
        const double mid = 0.5 * (a + b);
        auto br1 = geometric_breaks(a, mid, a, 8, 0.45);
        auto br2 = geometric_breaks(mid, b, b, 8, 0.45);
        val += integrate_panels(f, br1, 10) + integrate_panels(f, br2, 10);
    }
    return coef * sphere_surface_area(d - 1) * val;
}

double BoundaryPotential::component_direct_ball(size_t ci, const Vec& x) const {
    const auto& comp = sigma_.components()[ci];
    auto kernel_at = [&](const Vec& z) {
        return kind_ == BoundaryKernelKind::Poisson ? poisson_exact(domain_, x, z)
                                                    : n_kernel(spec_, domain_, x, z);
    };

    double p = 0, Rch = 0, coef = 0;
    Vec c0;
    if (const auto* rp = std::get_if<RadialPowerDensity>(&comp)) {
        p = rp->exponent;
        Rch = rp->cutoff;
        coef = rp->coefficient;
        c0 = rp->center;
    } else if (const auto* ub = std::get_if<UniformBallDensity>(&comp)) {
        Rch = ub->radius;
        coef = ub->coefficient;
        c0 = ub->center;
    } else {
        throw DomainError("ball boundary densities: radial components only");
    }
    if (coef == 0) return 0.0;

    // Orthonormal frame around the component axis c0 (N = 3), with e1 along
    // the azimuth of x so the integrand is even in phi.
    Vec e1 = x - dot(x, c0) * c0;
    if (e1.norm() < 1e-12) {
        Vec u{1, 0, 0};
        if (std::abs(c0[0]) > 0.9) u = Vec{0, 1, 0};
        e1 = u - dot(u, c0) * c0;
    }
    e1 *= 1.0 / e1.norm();
    Vec e2{c0[1] * e1[2] - c0[2] * e1[1], c0[2] * e1[0] - c0[0] * e1[2],
           c0[0] * e1[1] - c0[1] * e1[0]};

    const double th_R = 2.0 * std::asin(std::min(1.0, 0.5 * Rch));
    auto f = [&](double th) {
        const double ct = std::cos(th), st = std::sin(th);
        auto g = [&](double phi) {
            Vec z = ct * c0 + st * (std::cos(phi) * e1 + std::sin(phi) * e2);
            return kernel_at(z);
        };
        const double ring = 2.0 * integrate_panels(g, geometric_breaks(0.0, M_PI, 0.0, 6, 0.5), 8);
        const double chord = 2.0 * std::sin(0.5 * th);
        return std::pow(chord, p) * st * ring;
    };
    return coef * integrate_panels(f, geometric_breaks(0.0, th_R, 0.0, 14, 0.55), 10);
}

void BoundaryPotential::build_table(size_t ci) {
    ComponentTable tab;
    const double lo = 1e-6, hi = 40.0;
    const int per_decade = 6;
    tab.log_e_min = std::log(lo);
    tab.log_t_min = std::log(lo);
    tab.log_e_step = std::log(10.0) / per_decade;
    tab.log_t_step = tab.log_e_step;
    tab.ne = static_cast<int>(std::ceil(std::log(hi / lo) / tab.log_e_step)) + 1;
    tab.nt = tab.ne;
    tab.log_values.resize(static_cast<size_t>(tab.ne) * tab.nt);
    for (int ie = 0; ie < tab.ne; ++ie) {
        const double e = std::exp(tab.log_e_min + ie * tab.log_e_step);
        for (int it = 0; it < tab.nt; ++it) {
            const double t = std::exp(tab.log_t_min + it * tab.log_t_step);
            const double v = component_direct(ci, e, t);
            tab.log_values[static_cast<size_t>(ie) * tab.nt + it] =
                std::log(std::max(v, 1e-300));
        }
    }
    tables_[ci] = std::move(tab);
}

double BoundaryPotential::eval_component(size_t ci, const Vec& x, bool allow_table) const {
    const auto& comp = sigma_.components()[ci];
    const int N = domain_.dimension;

    if (const auto* a = std::get_if<Atom>(&comp)) {
        if (a->mass == 0) return 0.0;
        const Vec& z = a->location;
        const double k = kind_ == BoundaryKernelKind::Poisson
                             ? poisson_exact(domain_, x, z)
                             : n_kernel(spec_, domain_, x,
                                        domain_.kind == DomainKind::HalfSpace ? lift(z) : z);
        return a->mass * k;
    }

    if (domain_.kind == DomainKind::UnitBall) return component_direct_ball(ci, x);

    if (const auto* td = std::get_if<TabulatedDensity>(&comp)) {
        // Piecewise-constant density: midpoint per cell, subdivided near x'.
        const int d = N - 1;
        const FlatKernel K = make_flat_kernel(domain_, kind_, spec_);
        const double t = x[d];
        double val = 0;
        const double cell_vol = std::pow(td->spacing, d);
        for (size_t flat = 0; flat < td->values.size(); ++flat) {
            if (td->values[flat] == 0) continue;
            Vec c(d);
            size_t rem = flat;
            for (int ax = 0; ax < d; ++ax) {
                c[ax] = td->origin[ax] + (rem % td->counts[ax] + 0.5) * td->spacing;
                rem /= td->counts[ax];
            }
            double tau2 = 0;
            for (int ax = 0; ax < d; ++ax) tau2 += (x[ax] - c[ax]) * (x[ax] - c[ax]);
            if (tau2 < 9.0 * td->spacing * td->spacing) {
                // 4^d midpoint refinement of the near cells
                const int sub = 4;
                const double hs = td->spacing / sub;
                int subcells = 1;
                for (int ax = 0; ax < d; ++ax) subcells *= sub;
                double acc = 0;
                for (int sc = 0; sc < subcells; ++sc) {
                    int r2 = sc;
                    double tt2 = 0;
                    for (int ax = 0; ax < d; ++ax) {
                        const double cc =
                            c[ax] - 0.5 * td->spacing + (r2 % sub + 0.5) * hs;
                        r2 /= sub;
                        tt2 += (x[ax] - cc) * (x[ax] - cc);
                    }
                    acc += K(tt2, t);
                }
                val += td->values[flat] * cell_vol * acc / subcells;
            } else {
                val += td->values[flat] * cell_vol * K(tau2, t);
            }
        }
        return val;
    }

    // Radial density on the half-space boundary.
    Vec center;
    if (const auto* rp = std::get_if<RadialPowerDensity>(&comp)) center = rp->center;
    else center = std::get<UniformBallDensity>(comp).center;
    const int d = N - 1;
    double e2 = 0;
    for (int ax = 0; ax < d; ++ax) e2 += (x[ax] - center[ax]) * (x[ax] - center[ax]);
    const double e = std::sqrt(e2), t = x[d];

    if (allow_table) {
        auto& tab_opt = const_cast<BoundaryPotential*>(this)->tables_[ci];
        if (!tab_opt) const_cast<BoundaryPotential*>(this)->build_table(ci);
        const ComponentTable& tab = *tables_[ci];
        const double le = std::log(std::max(e, 1e-300)), lt = std::log(std::max(t, 1e-300));
        double fe = (le - tab.log_e_min) / tab.log_e_step;
        double ft = (lt - tab.log_t_min) / tab.log_t_step;
        if (e <= std::exp(tab.log_e_min)) fe = 0.0;  // effectively on-axis
        if (fe >= 0 && fe <= tab.ne - 1 && ft >= 0 && ft <= tab.nt - 1) {
            const int ie = std::min(tab.ne - 2, static_cast<int>(fe));
            const int it = std::min(tab.nt - 2, static_cast<int>(ft));
            const double ae = fe - ie, at = ft - it;
            auto L = [&](int i, int j) {
                return tab.log_values[static_cast<size_t>(i) * tab.nt + j];
            };
            const double lv = (1 - ae) * ((1 - at) * L(ie, it) + at * L(ie, it + 1)) +
                              ae * ((1 - at) * L(ie + 1, it) + at * L(ie + 1, it + 1));
            return std::exp(lv);
        }
    }
    return component_direct(ci, e, t);
}

double BoundaryPotential::eval(const Vec& x) const {
    double v = 0;
    for (size_t ci = 0; ci < sigma_.components().size(); ++ci)
        v += eval_component(ci, x, true);
    return v;
}

double BoundaryPotential::eval_direct(const Vec& x) const {
    double v = 0;
    for (size_t ci = 0; ci < sigma_.components().size(); ++ci)
        v += eval_component(ci, x, false);
    return v;
}

Field tabulate(const BoundaryPotential& pot, std::shared_ptr<const Grid> grid) {
    Field f(grid, pot.far_decay());
    for (int i = 0; i < grid->node_count(); ++i) f[i] = pot.eval(grid->node(i));
    return f;
}

// ---------------------------------------------------------------------------
// Cell-averaged singular kernels: cone (Duffy-type) decomposition of the box
// around the singular point. Valid for any apex location, including corners
// and points outside the box, via signed face pyramids.
// ---------------------------------------------------------------------------

double box_average_gl2(const InteriorKernel& k, const Vec& x, const Vec& lo, const Vec& hi) {
    const int N = x.dim();
    const GaussRule& rule = gauss_rule(2);
    int pts = 1;
    for (int ax = 0; ax < N; ++ax) pts *= 2;
    double acc = 0;
    for (int pi = 0; pi < pts; ++pi) {
        Vec y(N);
        double wgt = 1.0;
        int rem = pi;
        for (int ax = 0; ax < N; ++ax) {
            const int i = rem % 2;
            rem /= 2;
            y[ax] = 0.5 * (lo[ax] + hi[ax]) + 0.5 * (hi[ax] - lo[ax]) * rule.nodes[i];
            wgt *= 0.5 * rule.weights[i];
        }
        acc += wgt * k.value(x, y);
    }
    return acc;
}

double kernel_box_average(const InteriorKernel& k, const Vec& x, const Vec& lo, const Vec& hi) {
    const int N = x.dim();
    double volume = 1.0;
    for (int ax = 0; ax < N; ++ax) volume *= hi[ax] - lo[ax];
    const double gamma = k.diagonal_exponent();
    const GaussRule& face_rule = gauss_rule(4);
    const GaussRule& ray_rule = gauss_rule(10);

    double total = 0;
    for (int ax = 0; ax < N; ++ax) {
        for (int side = 0; side < 2; ++side) {
            const double face_coord = side == 0 ? lo[ax] : hi[ax];
            const double h_signed = side == 0 ? x[ax] - face_coord : face_coord - x[ax];
            if (h_signed == 0) continue;
            // integrate over the face (N-1 dims), then along the apex ray
            double face_acc = 0;
            const int nf = static_cast<int>(face_rule.nodes.size());
            int pts = 1;
            for (int a2 = 0; a2 < N - 1; ++a2) pts *= nf;
            for (int pi = 0; pi < pts; ++pi) {
                Vec yf(N);
                yf[ax] = face_coord;
                double wgt = 1.0;
                int rem = pi;
                for (int a2 = 0, slot = 0; a2 < N; ++a2) {
                    if (a2 == ax) continue;
                    const int i = rem % nf;
                    rem /= nf;
                    const double half = 0.5 * (hi[a2] - lo[a2]);
                    yf[a2] = 0.5 * (lo[a2] + hi[a2]) + half * face_rule.nodes[i];
                    wgt *= half * face_rule.weights[i];
                    ++slot;
                }
                // ray integral int_0^1 v^{N-1} k(x, x+v(yf-x)) dv with the
                // substitution v = w^{1/(N-gamma)} flattening the power.
                const double pow_exp = 1.0 / (N - gamma);
                double ray = 0;
                for (size_t ri = 0; ri < ray_rule.nodes.size(); ++ri) {
                    const double w = 0.5 * (1.0 + ray_rule.nodes[ri]);
                    const double v = std::pow(w, pow_exp);
                    Vec y = x + v * (yf - x);
                    // clamp to the closure for rho evaluation safety
                    if (k.domain.kind == DomainKind::HalfSpace && y[N - 1] < 0) y[N - 1] = 0;
                    const double kv = k.value(x, y);
                    const double jac = pow_exp * std::pow(w, pow_exp - 1.0);
                    ray += 0.5 * ray_rule.weights[ri] * std::pow(v, N - 1) * kv * jac;
                }
                face_acc += wgt * ray;
            }
            total += h_signed * face_acc;
        }
    }
    return total / volume;
}

// ---------------------------------------------------------------------------
// GridOperator
// ---------------------------------------------------------------------------

GridOperator::GridOperator(std::shared_ptr<const Grid> grid, InteriorKernel kernel,
                           QuadratureConfig cfg)
    : grid_(std::move(grid)), kernel_(std::move(kernel)), cfg_(cfg) {
    if (kernel_.kind == InteriorKernelKind::Model && kernel_.spec.beta <= 0)
        throw DomainError("GridOperator: model kernel needs beta > 0 to be integrable");
    if (!grid_->is_half_space()) {
        dense_ = true;  // ball grids use the direct O(M^2) path
        return;
    }
    const int d = grid_->domain().dimension - 1;
    const int nt = grid_->tangential_per_axis();
    offsets_per_axis_ = 2 * nt - 1;
    offset_count_ = 1;
    for (int ax = 0; ax < d; ++ax) offset_count_ *= offsets_per_axis_;
}

void GridOperator::ensure_tables() const {
    if (dense_) return;
    std::call_once(table_once_, [&] {
    const Grid& g = *grid_;
    const int d = g.domain().dimension - 1;
    const int nt = g.tangential_per_axis();
    const int m = g.level_count();
    table_.assign(static_cast<size_t>(m) * m * offset_count_, 0.0);

    const double h = g.tangential_step();
    for (int a = 0; a < m; ++a) {
        const double ta = g.level_normal(a);
        for (int b = 0; b < m; ++b) {
            const double tb = g.level_normal(b);
            const double dtb = g.level_thickness(b);
            const double diag = 0.5 * std::sqrt(d * h * h + dtb * dtb);
            double* row = table_.data() + (static_cast<size_t>(a) * m + b) * offset_count_;
            for (int off = 0; off < offset_count_; ++off) {
                int rem = off;
                double tau2 = 0;
                Vec y(d + 1);
                for (int ax = 0; ax < d; ++ax) {
                    const int delta = rem % offsets_per_axis_ - (nt - 1);
                    rem /= offsets_per_axis_;
                    y[ax] = delta * h;
                    tau2 += y[ax] * y[ax];
                }
                y[d] = tb;
                Vec x(d + 1);
                x[d] = ta;
                const double r = std::sqrt(tau2 + (ta - tb) * (ta - tb));
                Vec lo = y, hi = y;
                for (int ax = 0; ax < d; ++ax) {
                    lo[ax] -= 0.5 * h;
                    hi[ax] += 0.5 * h;
                }
                Vec clo, chi;  // slab bounds depend only on the level
                g.cell_bounds(b * g.tangential_count(), clo, chi);
                lo[d] = clo[d];
                hi[d] = chi[d];
                if (r <= cfg_.near_tier_radius * diag) {
                    row[off] = std::max(0.0, kernel_box_average(kernel_, x, lo, hi));
                } else if (r <= cfg_.mid_tier_radius * diag) {
                    row[off] = box_average_gl2(kernel_, x, lo, hi);
                } else {
                    Vec yc = y;
                    yc[d] = 0.5 * (lo[d] + hi[d]);
                    row[off] = kernel_.value(x, yc);
                }
            }
        }
    }
    });
}

double GridOperator::cell_kernel(int i, int j) const {
    ensure_tables();
    const Grid& g = *grid_;
    if (dense_) {
        if (i == j) {
            Vec lo, hi;  // ball grids have no box cells; midpoint fallback
            return kernel_.value(g.node(i), g.node(j));
        }
        return kernel_.value(g.node(i), g.node(j));
    }
    const int d = g.domain().dimension - 1;
    const int nt = g.tangential_per_axis();
    const int m = g.level_count();
    const int a = i / g.tangential_count(), b = j / g.tangential_count();
    int ti = i % g.tangential_count(), tj = j % g.tangential_count();
    int off = 0, stride = 1;
    for (int ax = 0; ax < d; ++ax) {
        const int delta = (ti % nt) - (tj % nt);
        ti /= nt;
        tj /= nt;
        off += (delta + nt - 1) * stride;
        stride *= offsets_per_axis_;
    }
    return table_[(static_cast<size_t>(a) * m + b) * offset_count_ + off];
}

Field GridOperator::apply(const Field& f) const {
    ensure_tables();
    const Grid& g = *grid_;
    Field out(f.grid_ptr(), kernel_.far_decay());
    if (dense_) {
        const int N = g.domain().dimension;
        const double gamma = kernel_.diagonal_exponent();
        for (int i = 0; i < g.node_count(); ++i) {
            double s = 0;
            for (int j = 0; j < g.node_count(); ++j) {
                if (j == i) continue;
                s += kernel_.value(g.node(i), g.node(j)) * f[j] * g.weight(j);
            }
            // Diagonal: integrate the local power law over the
            // equivalent-volume ball around the node.
            const double wv = g.weight(i);
            const double req = std::pow(wv / unit_ball_volume(N), 1.0 / N);
            Vec xp = g.node(i);
            const double delta = 1e-3 * req;
            xp[0] += delta;
            const double c_loc = kernel_.value(g.node(i), xp) * std::pow(delta, gamma);
            s += f[i] * c_loc * wv * (N / (N - gamma)) * std::pow(req, -gamma);
            out[i] = s;
        }
        return out;
    }

    const int d = g.domain().dimension - 1;
    const int nt = g.tangential_per_axis();
    const int m = g.level_count();
    const int tc = g.tangential_count();
    const double cell_area = std::pow(g.tangential_step(), d);

    // digit decomposition of tangential indices, reused per level pair
    static thread_local std::vector<int> digits;
    digits.resize(static_cast<size_t>(tc) * d);
    for (int t = 0; t < tc; ++t) {
        int rem = t;
        for (int ax = 0; ax < d; ++ax) {
            digits[static_cast<size_t>(t) * d + ax] = rem % nt;
            rem /= nt;
        }
    }

    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            const double* row = table_.data() + (static_cast<size_t>(a) * m + b) * offset_count_;
            const double vol = cell_area * g.level_thickness(b);
            const double* fb = f.values().data() + static_cast<size_t>(b) * tc;
            double* oa = out.values().data() + static_cast<size_t>(a) * tc;
            for (int i = 0; i < tc; ++i) {
                const int* di = digits.data() + static_cast<size_t>(i) * d;
                double s = 0;
                for (int j = 0; j < tc; ++j) {
                    const int* dj = digits.data() + static_cast<size_t>(j) * d;
                    int off = 0, stride = 1;
                    for (int ax = 0; ax < d; ++ax) {
                        off += (di[ax] - dj[ax] + nt - 1) * stride;
                        stride *= offsets_per_axis_;
                    }
                    s += row[off] * fb[j];
                }
                oa[i] += s * vol;
            }
        }
    }

    if (cfg_.analytic_tail && f.tail_exponent() > 0) {
        for (int a = 0; a < m; ++a) {
            Vec x(d + 1);
            x[d] = g.level_normal(a);
            const double t = tail_at(f, x);
            for (int i = 0; i < tc; ++i) out[a * tc + i] += t;
        }
    }
    return out;
}

double GridOperator::tail_at(const Field& f, const Vec& x) const {
    const Grid& g = *grid_;
    const int d = g.domain().dimension - 1;
    const int nt = g.tangential_per_axis();
    const int tc = g.tangential_count();
    const double L = g.spec().box_halfwidth;
    const double tau = f.tail_exponent();
    if (!(tau > 0)) return 0.0;
    const double gamma_far = kernel_.far_decay();
    if (gamma_far + tau <= d)
        throw DivergenceSignal("analytic tail diverges: kernel decay + field decay <= boundary dim");

    double total = 0;
    for (int b = 0; b < g.level_count(); ++b) {
        // average of f over the tangential edge ring of level b
        double ring = 0;
        int count = 0;
        for (int t = 0; t < tc; ++t) {
            int rem = t;
            bool edge = false;
            for (int ax = 0; ax < d; ++ax) {
                const int idx = rem % nt;
                rem /= nt;
                if (idx == 0 || idx == nt - 1) edge = true;
            }
            if (edge) {
                ring += f[b * tc + t];
                ++count;
            }
        }
        if (count == 0 || ring == 0) continue;
        ring /= count;
        // ring cells sit at max-coordinate L - h/2; scale to the edge value
        ring *= std::pow((L - 0.5 * g.tangential_step()) / L, tau);
        Vec y(d + 1);
        y[d] = g.level_normal(b);
        // radial tail: int_L^inf k((0,t_x),(s e1,t_b)) (L/s)^tau s^{d-1} ds,
        // substituted s = L/u.
        auto fr = [&](double u) {
            const double s = L / u;
            Vec yy = y;
            yy[0] = s;
            Vec xx(d + 1);
            xx[d] = x[d];
            return kernel_.value(xx, yy) * std::pow(u, tau) * std::pow(s, d - 1) * L / (u * u);
        };
        const double integral = integrate_panels(fr, geometric_breaks(0.0, 1.0, 0.0, 12, 0.5), 10);
        total += ring * g.level_thickness(b) * sphere_surface_area(d) * integral;
    }
    return total;
}

double GridOperator::apply_at(const Field& f, const Vec& x) const {
    const Grid& g = *grid_;
    double s = 0;
    if (dense_) {
        for (int j = 0; j < g.node_count(); ++j) {
            if (dist(x, g.node(j)) < 1e-14) continue;
            s += kernel_.value(x, g.node(j)) * f[j] * g.weight(j);
        }
        return s;
    }
    const int d = g.domain().dimension - 1;
    const double h = g.tangential_step();
    for (int j = 0; j < g.node_count(); ++j) {
        const Vec& y = g.node(j);
        const int lev = j / g.tangential_count();
        const double dtb = g.level_thickness(lev);
        const double diag = 0.5 * std::sqrt(d * h * h + dtb * dtb);
        const double r = dist(x, y);
        double k;
        if (r <= cfg_.near_tier_radius * diag) {
            Vec lo, hi;
            g.cell_bounds(j, lo, hi);
            k = std::max(0.0, kernel_box_average(kernel_, x, lo, hi));
        } else if (r <= cfg_.mid_tier_radius * diag) {
            Vec lo, hi;
            g.cell_bounds(j, lo, hi);
            k = box_average_gl2(kernel_, x, lo, hi);
        } else {
            Vec yc = y;
            yc[d] = g.level_centroid(lev);
            k = kernel_.value(x, yc);
        }
        s += k * f[j] * g.weight(j);
    }
    if (cfg_.analytic_tail && f.tail_exponent() > 0) s += tail_at(f, x);
    return s;
}

double green_potential(const GridOperator& green_op, const Field& f, const Vec& x) {
    return green_op.apply_at(f, x);
}

// ---------------------------------------------------------------------------
// Riesz potential by the layer-cake formula
// ---------------------------------------------------------------------------

double riesz_potential(const BoundaryMeasure& mu, double gamma, const Vec& y,
                       const QuadratureConfig& cfg) {
    const int d = y.dim();
    if (!(gamma > 0 && gamma < d))
        throw DomainError("riesz_potential: gamma must lie in (0, boundary dim)");
    if (!mu.is_positive()) throw DomainError("riesz_potential: positive measures only");
    if (mu.empty_measure()) return 0.0;
    Domain half = Domain::half_space(d + 1);

    // Support geometry relative to y: inner distance and outer reach.
    double r_in = 1e300, r_out = 0;
    std::vector<double> marks;
    bool divergent_inner = false;
    for (const auto& c : mu.components()) {
        std::visit(
            [&](const auto& comp) {
                using T = std::decay_t<decltype(comp)>;
                if constexpr (std::is_same_v<T, Atom>) {
                    if (comp.mass == 0) return;
                    const double e = dist(comp.location, y);
                    r_in = std::min(r_in, e);
                    r_out = std::max(r_out, e);
                    marks.push_back(e);
                    if (e == 0) divergent_inner = true;
                } else if constexpr (std::is_same_v<T, TabulatedDensity>) {
                    const int dd = comp.origin.dim();
                    double far = 0;
                    for (int ax = 0; ax < dd; ++ax)
                        far += std::pow(std::max(std::abs(comp.origin[ax] - y[ax]),
                                                 std::abs(comp.origin[ax] +
                                                          comp.counts[ax] * comp.spacing - y[ax])),
                                        2.0);
                    r_in = 0;  // conservative
                    r_out = std::max(r_out, std::sqrt(far));
                } else {
                    double R, p = 0;
                    if constexpr (std::is_same_v<T, RadialPowerDensity>) {
                        R = comp.cutoff;
                        p = comp.exponent;
                    } else {
                        R = comp.radius;
                    }
                    const double e = dist(comp.center, y);
                    r_in = std::min(r_in, std::max(0.0, e - R));
                    r_out = std::max(r_out, e + R);
                    for (double mk : {std::abs(e - R), e, e + R}) marks.push_back(mk);
                    if (e <= R && p + gamma <= 0) divergent_inner = true;
                }
            },
            c);
    }
    if (divergent_inner)
        throw DivergenceSignal("riesz_potential: non-integrable concentration at the base point");
    if (r_out == 0) return 0.0;

    const double mass = mu.total_variation(d);
    double value = mass * std::pow(r_out, gamma - d) / (d - gamma);  // exact tail

    auto f = [&](double r) { return mu.ball_mass(half, y, r) * std::pow(r, gamma - d - 1); };
    std::vector<double> br;
    const double lo = std::max(r_in, 1e-9 * r_out);
    br.push_back(lo);
    for (double mk : marks)
        if (mk > lo && mk < r_out) br.push_back(mk);
    br.push_back(r_out);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    for (size_t i = 0; i + 1 < br.size(); ++i) {
        auto sub = geometric_breaks(br[i], br[i + 1], br[i], 10, 0.4);
        value += integrate_panels(f, sub, 10);
    }
    // inner stub below `lo` when y sits inside a density: power extrapolation
    if (r_in == 0 && lo > 0) {
        const double m_lo = mu.ball_mass(half, y, lo);
        if (m_lo > 0) {
            const double m_lo2 = mu.ball_mass(half, y, 0.5 * lo);
            const double growth = m_lo2 > 0 ? std::log(m_lo / m_lo2) / std::log(2.0) : d;
            const double expnt = growth + gamma - d;  // local integrand power + 1
            if (expnt <= 0)
                throw DivergenceSignal("riesz_potential: divergent inner contribution");
            value += m_lo * std::pow(lo, gamma - d) / expnt;
        }
    }
    return value;
}

double weighted_norm(const Field& f, double s_prime, double alpha0, bool with_tail) {
    const Grid& g = f.grid();
    if (!(s_prime > 1)) throw DomainError("weighted_norm: s' must exceed 1");
    if (!(alpha0 >= 0)) throw DomainError("weighted_norm: alpha0 must be >= 0");
    double acc = 0;
    if (g.is_half_space()) {
        // exact slab moments of rho^{alpha0}; f is collocated per node
        const int d = g.domain().dimension - 1;
        const double cell_area = std::pow(g.tangential_step(), d);
        const int tc = g.tangential_count();
        for (int i = 0; i < g.node_count(); ++i)
            acc += std::pow(std::abs(f[i]), s_prime) * cell_area *
                   g.level_rho_moment(i / tc, alpha0);
    } else {
        for (int i = 0; i < g.node_count(); ++i)
            acc += std::pow(std::abs(f[i]), s_prime) * std::pow(g.rho(i), alpha0) * g.weight(i);
    }

    if (with_tail && f.tail_exponent() > 0 && g.is_half_space()) {
        const int d = g.domain().dimension - 1;
        const double L = g.spec().box_halfwidth;
        const double tau_eff = s_prime * f.tail_exponent();
        if (tau_eff <= d)
            throw DivergenceSignal("weighted_norm: tail is not integrable");
        const int nt = g.tangential_per_axis();
        const int tc = g.tangential_count();
        for (int b = 0; b < g.level_count(); ++b) {
            double ring = 0;
            int count = 0;
            for (int t = 0; t < tc; ++t) {
                int rem = t;
                bool edge = false;
                for (int ax = 0; ax < d; ++ax) {
                    if (rem % nt == 0 || rem % nt == nt - 1) edge = true;
                    rem /= nt;
                }
                if (edge) {
                    ring += std::pow(std::abs(f[b * tc + t]), s_prime);
                    ++count;
                }
            }
            if (count == 0) continue;
            ring /= count;
            ring *= std::pow((L - 0.5 * g.tangential_step()) / L, tau_eff);
            acc += ring * g.level_rho_moment(b, alpha0) * sphere_surface_area(d) *
                   std::pow(L, d) / (tau_eff - d);
        }
    }
    return std::pow(acc, 1.0 / s_prime);
}

// ---------------------------------------------------------------------------
// Adaptive panel integration for the pointwise criteria
// ---------------------------------------------------------------------------

namespace {

struct Panel {
    Vec lo, hi;
};

}  // namespace

double kernel_apply_adaptive(const InteriorKernel& kernel, const Vec& x,
                             const std::function<double(const Vec&)>& F, double box_halfwidth,
                             const std::vector<HotSpot>& hot_spots, const QuadratureConfig& cfg) {
    const int N = kernel.domain.dimension;
    if (kernel.domain.kind != DomainKind::HalfSpace)
        throw DomainError("kernel_apply_adaptive: half-space only");
    Panel root;
    root.lo = Vec(N);
    root.hi = Vec(N);
    for (int ax = 0; ax < N - 1; ++ax) {
        root.lo[ax] = -box_halfwidth;
        root.hi[ax] = box_halfwidth;
    }
    root.lo[N - 1] = 0;
    root.hi[N - 1] = box_halfwidth;

    std::vector<Vec> features{x};
    for (const auto& hs : hot_spots) features.push_back(hs.center);

    const GaussRule& rule = gauss_rule(cfg.gl_points);
    const int npts_axis = cfg.gl_points;
    int leaf_pts = 1;
    for (int ax = 0; ax < N; ++ax) leaf_pts *= npts_axis;

    const double min_edge = 1e-8 * box_halfwidth;
    double total = 0;
    long leaves = 0;
    std::vector<Panel> stack{root};
    while (!stack.empty()) {
        Panel p = stack.back();
        stack.pop_back();
        Vec center(N);
        double max_edge = 0, diag2 = 0;
        for (int ax = 0; ax < N; ++ax) {
            center[ax] = 0.5 * (p.lo[ax] + p.hi[ax]);
            const double e = p.hi[ax] - p.lo[ax];
            max_edge = std::max(max_edge, e);
            diag2 += 0.25 * e * e;
        }
        const double half_diag = std::sqrt(diag2);

        // exclusion-ball handling
        bool skip = false, must_split = false;
        for (const auto& hs : hot_spots) {
            if (hs.radius <= 0) continue;
            const double dc = dist(center, hs.center);
            if (dc + half_diag <= hs.radius) {
                skip = true;
                break;
            }
            if (dc - half_diag < hs.radius) {
                if (max_edge > 0.35 * hs.radius) {
                    must_split = true;
                } else if (dc < hs.radius) {
                    skip = true;  // boundary panel, center inside: drop
                    break;
                }
            }
        }
        if (skip) continue;

        double dist_feat = 1e300;
        for (const auto& fpt : features)
            dist_feat = std::min(dist_feat, dist(center, fpt));
        const bool near_feature = max_edge > cfg.panel_split_ratio * std::max(dist_feat - half_diag, 0.0);

        if ((must_split || near_feature) && max_edge > min_edge) {
            // halve the longest axes
            Panel a = p, b = p;
            int split_ax = 0;
            double best = 0;
            for (int ax = 0; ax < N; ++ax) {
                const double e = p.hi[ax] - p.lo[ax];
                if (e > best) {
                    best = e;
                    split_ax = ax;
                }
            }
            const double mid = 0.5 * (p.lo[split_ax] + p.hi[split_ax]);
            a.hi[split_ax] = mid;
            b.lo[split_ax] = mid;
            stack.push_back(b);
            stack.push_back(a);
            continue;
        }

        if (++leaves > cfg.max_leaves)
            throw ToleranceFailure("kernel_apply_adaptive: panel budget exhausted", 1.0);

        // tensor Gauss on the leaf
        double acc = 0;
        for (int pi = 0; pi < leaf_pts; ++pi) {
            Vec y(N);
            double wgt = 1.0;
            int rem = pi;
            for (int ax = 0; ax < N; ++ax) {
                const int i = rem % npts_axis;
                rem /= npts_axis;
                const double half = 0.5 * (p.hi[ax] - p.lo[ax]);
                y[ax] = 0.5 * (p.lo[ax] + p.hi[ax]) + half * rule.nodes[i];
                wgt *= half * rule.weights[i];
            }
            bool inside_exclusion = false;
            for (const auto& hs : hot_spots)
                if (hs.radius > 0 && dist(y, hs.center) < hs.radius) {
                    inside_exclusion = true;
                    break;
                }
            if (inside_exclusion) continue;
            if (dist(y, x) < 1e-14) continue;
            acc += wgt * kernel.value(x, y) * F(y);
        }
        total += acc;
    }
    return total;
}

}  // namespace potkit
