#include "potkit/domain.hpp"

#include <algorithm>
#include <fstream>

namespace potkit {

Grid::Grid(const Domain& domain, const GridSpec& spec) : domain_(domain), spec_(spec) {
    spec.validate();
    if (domain.kind == DomainKind::HalfSpace)
        build_half_space();
    else
        build_ball();
    total_weight_ = 0;
    for (double w : weights_) total_weight_ += w;
}

void Grid::build_half_space() {
    const int d = domain_.dimension - 1;
    const double L = spec_.box_halfwidth;
    m_ = spec_.levels;

    nt_ = std::max(1, static_cast<int>(std::lround(2.0 * L / spec_.tangential_h)));
    ht_ = 2.0 * L / nt_;
    tang_count_ = 1;
    for (int i = 0; i < d; ++i) tang_count_ *= nt_;

    // Normal levels t_k = L r^k, k = 1..m; level k owns the slab between the
    // midpoints of consecutive levels, the top slab reaches L, the bottom
    // slab reaches the boundary. Thicknesses partition (0, L] exactly.
    level_t_.resize(m_);
    level_lo_.resize(m_);
    level_hi_.resize(m_);
    level_dt_.resize(m_);
    for (int k = 0; k < m_; ++k) level_t_[k] = L * std::pow(spec_.grading_ratio, k + 1);
    for (int k = 0; k < m_; ++k) {
        level_hi_[k] = (k == 0) ? L : 0.5 * (level_t_[k - 1] + level_t_[k]);
        level_lo_[k] = (k == m_ - 1) ? 0.0 : 0.5 * (level_t_[k] + level_t_[k + 1]);
        level_dt_[k] = level_hi_[k] - level_lo_[k];
    }

    const double cell_area = std::pow(ht_, d);
    nodes_.reserve(static_cast<size_t>(m_) * tang_count_);
    weights_.reserve(nodes_.capacity());
    rho_.reserve(nodes_.capacity());
    for (int k = 0; k < m_; ++k) {
        for (int t = 0; t < tang_count_; ++t) {
            Vec x(domain_.dimension);
            int rem = t;
            for (int ax = 0; ax < d; ++ax) {
                x[ax] = tangential_coord(rem % nt_);
                rem /= nt_;
            }
            x[d] = level_t_[k];
            nodes_.push_back(x);
            weights_.push_back(cell_area * level_dt_[k]);
            rho_.push_back(level_t_[k]);
        }
    }
}

void Grid::build_ball() {
    if (domain_.dimension != 3)
        throw DomainError("Grid: unit-ball grids are implemented for N = 3 only");
    // Radial shells graded toward |x| = 1 with the same level machinery,
    // L capped at 1 so the shells cover the whole ball. Angular cells are
    // uniform in (cos(theta), phi), so shell volumes split exactly.
    const double L = std::min(spec_.box_halfwidth, 1.0);
    m_ = spec_.levels;
    std::vector<double> t(m_), hi(m_), lo(m_);
    for (int k = 0; k < m_; ++k) t[k] = L * std::pow(spec_.grading_ratio, k + 1);
    for (int k = 0; k < m_; ++k) {
        hi[k] = (k == 0) ? 1.0 : 0.5 * (t[k - 1] + t[k]);  // top shell reaches the center
        lo[k] = (k == m_ - 1) ? 0.0 : 0.5 * (t[k] + t[k + 1]);
    }
    level_t_ = t;
    level_lo_ = lo;
    level_hi_ = hi;
    level_dt_.resize(m_);
    for (int k = 0; k < m_; ++k) level_dt_[k] = hi[k] - lo[k];

    const int n_u = std::max(2, static_cast<int>(std::lround(2.0 / spec_.tangential_h)));
    const int n_phi = std::max(4, static_cast<int>(std::lround(2.0 * M_PI / spec_.tangential_h)));
    const double du = 2.0 / n_u, dphi = 2.0 * M_PI / n_phi;

    for (int k = 0; k < m_; ++k) {
        const double r_in = 1.0 - hi[k], r_out = 1.0 - lo[k];
        const double r_node = 1.0 - t[k];
        const double shell_vol = (r_out * r_out * r_out - r_in * r_in * r_in) / 3.0;
        for (int iu = 0; iu < n_u; ++iu) {
            const double u = -1.0 + (iu + 0.5) * du;
            const double su = std::sqrt(std::max(0.0, 1.0 - u * u));
            for (int ip = 0; ip < n_phi; ++ip) {
                const double phi = (ip + 0.5) * dphi;
                Vec x{r_node * su * std::cos(phi), r_node * su * std::sin(phi), r_node * u};
                nodes_.push_back(x);
                weights_.push_back(shell_vol * du * dphi);
                rho_.push_back(t[k]);
            }
        }
    }
    nt_ = n_u * n_phi;  // angular cells per shell (no tangential lattice structure)
    tang_count_ = nt_;
    ht_ = spec_.tangential_h;
}

void Grid::cell_bounds(int i, Vec& lo, Vec& hi) const {
    if (!is_half_space()) throw DomainError("cell_bounds: half-space grids only");
    const int d = domain_.dimension - 1;
    const int k = i / tang_count_;
    int rem = i % tang_count_;
    lo = Vec(domain_.dimension);
    hi = Vec(domain_.dimension);
    for (int ax = 0; ax < d; ++ax) {
        const int idx = rem % nt_;
        rem /= nt_;
        lo[ax] = -spec_.box_halfwidth + idx * ht_;
        hi[ax] = lo[ax] + ht_;
    }
    lo[d] = level_lo_[k];
    hi[d] = level_hi_[k];
}

double Field::eval(const Vec& x) const {
    const Grid& g = *grid_;
    if (!g.is_half_space()) {
        // Ball fields: nearest-shell piecewise-constant in angle, linear in
        // the radial level coordinate. Used only for diagnostics.
        const double t = g.domain().rho(x);
        // locate bracketing shells
        int khi = 0;
        while (khi < g.level_count() && g.level_normal(khi) > t) ++khi;
        auto shell_value = [&](int k) {
            // nearest angular node on shell k
            int best = -1;
            double bd = 1e300;
            for (int j = k * g.tangential_count(); j < (k + 1) * g.tangential_count(); ++j) {
                const double dd = dist(g.node(j), x);
                if (dd < bd) { bd = dd; best = j; }
            }
            return values_[best];
        };
        if (khi == 0) return shell_value(0);
        if (khi >= g.level_count()) {
            const int k = g.level_count() - 1;
            const double tk = g.level_normal(k);
            return shell_value(k) * (t / tk);  // linear to 0 at the boundary
        }
        const double t0 = g.level_normal(khi - 1), t1 = g.level_normal(khi);
        const double w = (t0 - t) / (t0 - t1);
        return (1 - w) * shell_value(khi - 1) + w * shell_value(khi);
    }

    const int d = g.domain().dimension - 1;
    const double L = g.spec().box_halfwidth;
    double tang_scale = 1.0;
    Vec xc = x;
    // Tangential extrapolation: clamp to the box and apply the declared
    // power-decay factor in max-norm distance.
    double maxabs = 0;
    for (int ax = 0; ax < d; ++ax) maxabs = std::max(maxabs, std::abs(x[ax]));
    if (maxabs > L) {
        if (tail_exponent_ <= 0) return 0.0;
        tang_scale = std::pow(L / maxabs, tail_exponent_);
        for (int ax = 0; ax < d; ++ax) xc[ax] = std::clamp(x[ax], -L, L);
    }
    const double t = x[d];
    if (t <= 0) return 0.0;
    if (t > L) return 0.0;

    // normal interpolation pair: levels are decreasing in t
    int khi = 0;  // first level with t_k <= t
    while (khi < g.level_count() && g.level_normal(khi) > t) ++khi;

    // tangential multilinear stencil
    const int nt = g.tangential_per_axis();
    const double h = g.tangential_step();
    int base[Vec::kMaxDim];
    double fr[Vec::kMaxDim];
    for (int ax = 0; ax < d; ++ax) {
        double u = (xc[ax] + L) / h - 0.5;
        double fl = std::floor(u);
        int i0 = static_cast<int>(fl);
        double f = u - fl;
        if (i0 < 0) { i0 = 0; f = 0.0; }
        if (i0 >= nt - 1) { i0 = nt - 2; f = 1.0; }
        if (nt == 1) { i0 = 0; f = 0.0; }
        base[ax] = i0;
        fr[ax] = f;
    }
    auto tang_interp = [&](int level) {
        const int corners = 1 << d;
        double acc = 0;
        for (int c = 0; c < corners; ++c) {
            double wgt = 1.0;
            int idx = 0, stride = 1;
            for (int ax = 0; ax < d; ++ax) {
                const int bit = (c >> ax) & 1;
                int ic = base[ax] + bit;
                if (nt == 1) ic = 0;
                wgt *= bit ? fr[ax] : 1.0 - fr[ax];
                idx += ic * stride;
                stride *= nt;
            }
            acc += wgt * values_[level * g.tangential_count() + idx];
        }
        return acc;
    };

    double val;
    if (khi == 0) {
        val = tang_interp(0);  // above the top level: constant continuation
    } else if (khi >= g.level_count()) {
        const int k = g.level_count() - 1;
        val = tang_interp(k) * (t / g.level_normal(k));  // linear to 0 at the boundary
    } else {
        const double t0 = g.level_normal(khi - 1), t1 = g.level_normal(khi);
        const double w = (t0 - t) / (t0 - t1);
        val = (1 - w) * tang_interp(khi - 1) + w * tang_interp(khi);
    }
    return tang_scale * val;
}

void Field::export_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("Field::export_csv: cannot open " + path);
    const Grid& g = *grid_;
    const int n = g.domain().dimension;
    for (int ax = 0; ax < n; ++ax) out << "x" << ax + 1 << ",";
    out << "value\n";
    out.precision(17);
    for (int i = 0; i < g.node_count(); ++i) {
        for (int ax = 0; ax < n; ++ax) out << g.node(i)[ax] << ",";
        out << values_[i] << "\n";
    }
}

}  // namespace potkit
