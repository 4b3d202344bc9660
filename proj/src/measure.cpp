#include "potkit/measure.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "potkit/quadrature.hpp"

namespace potkit {

double sin_power_integral(int k) {
    static std::vector<double> cache;
    if (k < static_cast<int>(cache.size()) && cache[k] > 0) return cache[k];
    if (k >= static_cast<int>(cache.size())) cache.resize(k + 1, -1.0);
    cache[k] = integrate_gl([k](double t) { return std::pow(std::sin(t), k); }, 0.0, M_PI, 64);
    return cache[k];
}

double sphere_surface_area(int d) {
    double w = 2.0;  // |S^0|
    for (int j = 2; j <= d; ++j) w *= sin_power_integral(j - 2);
    return w;
}

double unit_ball_volume(int d) { return sphere_surface_area(d) / d; }

namespace {

/// Fraction of the sphere S^{d-1} with polar angle <= phi.
double cap_fraction(int d, double phi) {
    if (phi <= 0) return 0.0;
    if (phi >= M_PI) return 1.0;
    const int k = d - 2;
    const double part = integrate_gl([k](double t) { return std::pow(std::sin(t), k); }, 0.0, phi, 32);
    return part / sin_power_integral(k);
}

double clamp01(double x) { return std::min(1.0, std::max(-1.0, x)); }

}  // namespace

double radial_profile_total_mass(int d, double R, double p, double coef) {
    if (p + d <= 0) throw DomainError("radial density: exponent not locally integrable");
    return coef * sphere_surface_area(d) * std::pow(R, p + d) / (p + d);
}

double radial_profile_ball_mass(int d, double e, double r, double R, double p, double coef) {
    if (p + d <= 0) throw DomainError("radial density: exponent not locally integrable");
    if (r <= 0 || R <= 0) return 0.0;
    const double omega = sphere_surface_area(d);
    double mass = 0;

    // Full-coverage segment: spheres of radius s entirely inside B_r(center').
    const double full_hi = std::min(R, r - e);
    if (full_hi > 0) mass += coef * omega * std::pow(full_hi, p + d) / (p + d);

    // Partial segment, integrated with the cap-fraction weight.
    const double lo = std::max(0.0, std::abs(r - e));
    const double hi = std::min(R, r + e);
    if (hi > lo && e > 0) {
        auto f = [&](double s) {
            const double ct = clamp01((s * s + e * e - r * r) / (2.0 * s * e));
            return cap_fraction(d, std::acos(ct)) * std::pow(s, p + d - 1);
        };
        std::vector<double> br;
        if (lo <= 1e-300) {  // e == r: kink plus possible power singularity at 0
            br = geometric_breaks(0.0, hi, 0.0, 28);
        } else {
            br = geometric_breaks(lo, hi, lo, 14);
        }
        mass += coef * omega * integrate_panels(f, br, 16);
    }
    return mass;
}

double spherical_profile_cap_mass(double axis_angle, double r_chordal, double R_chordal,
                                  double p, double coef) {
    // Work in polar angles around the density center on S^2.
    auto chordal_to_angle = [](double c) {
        return 2.0 * std::asin(std::min(1.0, 0.5 * c));
    };
    const double th_R = chordal_to_angle(R_chordal);
    const double th_r = chordal_to_angle(r_chordal);
    const double th_c = axis_angle;
    auto f = [&](double th) {
        double frac;
        if (th_c <= 1e-14) {
            frac = th <= th_r ? 1.0 : 0.0;
        } else {
            const double cph = (std::cos(th_r) - std::cos(th_c) * std::cos(th)) /
                               std::max(1e-300, std::sin(th_c) * std::sin(th));
            frac = std::acos(clamp01(cph)) / M_PI;
        }
        const double chord = 2.0 * std::sin(0.5 * th);
        return frac * std::pow(chord, p) * 2.0 * M_PI * std::sin(th);
    };
    std::vector<double> br{0.0};
    for (double b : {std::abs(th_c - th_r), th_c + th_r, th_R})
        if (b > 1e-14 && b < th_R) br.push_back(b);
    br.push_back(th_R);
    std::sort(br.begin(), br.end());
    double mass = 0;
    for (size_t i = 0; i + 1 < br.size(); ++i) {
        auto sub = geometric_breaks(br[i], br[i + 1], br[i], 10);
        mass += integrate_panels(f, sub, 16);
    }
    return coef * mass;
}

bool BoundaryMeasure::is_positive() const {
    for (const auto& c : components_) {
        bool ok = std::visit(
            [](const auto& comp) -> bool {
                using T = std::decay_t<decltype(comp)>;
                if constexpr (std::is_same_v<T, Atom>) return comp.mass >= 0;
                else if constexpr (std::is_same_v<T, TabulatedDensity>) {
                    for (double v : comp.values)
                        if (v < 0) return false;
                    return true;
                } else
                    return comp.coefficient >= 0;
            },
            c);
        if (!ok) return false;
    }
    return true;
}

namespace {

BoundaryMeasure filter_sign(const std::vector<MeasureComponent>& comps, bool positive) {
    BoundaryMeasure out;
    for (const auto& c : comps) {
        MeasureComponent copy = c;
        bool keep = std::visit(
            [&](auto& comp) -> bool {
                using T = std::decay_t<decltype(comp)>;
                if constexpr (std::is_same_v<T, Atom>) {
                    if ((comp.mass >= 0) != positive) return false;
                    comp.mass = std::abs(comp.mass);
                    return comp.mass != 0;
                } else if constexpr (std::is_same_v<T, TabulatedDensity>) {
                    bool any = false;
                    for (double& v : comp.values) {
                        if ((v >= 0) == positive && v != 0) {
                            v = std::abs(v);
                            any = true;
                        } else {
                            v = 0;
                        }
                    }
                    return any;
                } else {
                    if ((comp.coefficient >= 0) != positive) return false;
                    comp.coefficient = std::abs(comp.coefficient);
                    return comp.coefficient != 0;
                }
            },
            copy);
        if (keep) out.add(std::move(copy));
    }
    return out;
}

}  // namespace

BoundaryMeasure BoundaryMeasure::positive_part() const { return filter_sign(components_, true); }
BoundaryMeasure BoundaryMeasure::negative_part() const { return filter_sign(components_, false); }

BoundaryMeasure BoundaryMeasure::absolute() const {
    BoundaryMeasure out;
    for (const auto& c : components_) {
        MeasureComponent copy = c;
        std::visit(
            [](auto& comp) {
                using T = std::decay_t<decltype(comp)>;
                if constexpr (std::is_same_v<T, Atom>) comp.mass = std::abs(comp.mass);
                else if constexpr (std::is_same_v<T, TabulatedDensity>) {
                    for (double& v : comp.values) v = std::abs(v);
                } else
                    comp.coefficient = std::abs(comp.coefficient);
            },
            copy);
        out.add(std::move(copy));
    }
    return out;
}

BoundaryMeasure BoundaryMeasure::scaled(double factor) const {
    BoundaryMeasure out;
    for (const auto& c : components_) {
        MeasureComponent copy = c;
        std::visit(
            [factor](auto& comp) {
                using T = std::decay_t<decltype(comp)>;
                if constexpr (std::is_same_v<T, Atom>) comp.mass *= factor;
                else if constexpr (std::is_same_v<T, TabulatedDensity>) {
                    for (double& v : comp.values) v *= factor;
                } else
                    comp.coefficient *= factor;
            },
            copy);
        out.add(std::move(copy));
    }
    return out;
}

double BoundaryMeasure::total_variation(int boundary_dim) const {
    double tv = 0;
    for (const auto& c : components_) {
        tv += std::visit(
            [&](const auto& comp) -> double {
                using T = std::decay_t<decltype(comp)>;
                if constexpr (std::is_same_v<T, Atom>) return std::abs(comp.mass);
                else if constexpr (std::is_same_v<T, RadialPowerDensity>)
                    return radial_profile_total_mass(boundary_dim, comp.cutoff, comp.exponent,
                                                     std::abs(comp.coefficient));
                else if constexpr (std::is_same_v<T, UniformBallDensity>)
                    return radial_profile_total_mass(boundary_dim, comp.radius, 0.0,
                                                     std::abs(comp.coefficient));
                else {
                    double s = 0;
                    for (double v : comp.values) s += std::abs(v);
                    return s * std::pow(comp.spacing, boundary_dim);
                }
            },
            c);
    }
    return tv;
}

namespace {

double tabulated_ball_mass(const TabulatedDensity& td, const Vec& center, double r) {
    const int d = td.origin.dim();
    // Recursive area fraction of an axis-aligned cell inside B_r(center).
    std::function<double(const Vec&, double, int)> frac = [&](const Vec& lo, double h, int depth) {
        // squared distances of nearest/farthest cell point to center
        double near2 = 0, far2 = 0;
        for (int ax = 0; ax < d; ++ax) {
            const double a = lo[ax], b = lo[ax] + h;
            const double c = center[ax];
            const double dn = (c < a) ? a - c : (c > b ? c - b : 0.0);
            const double df = std::max(std::abs(c - a), std::abs(c - b));
            near2 += dn * dn;
            far2 += df * df;
        }
        if (far2 <= r * r) return 1.0;
        if (near2 >= r * r) return 0.0;
        if (depth >= 6) {
            double c2 = 0;
            for (int ax = 0; ax < d; ++ax) {
                const double m = lo[ax] + 0.5 * h - center[ax];
                c2 += m * m;
            }
            return c2 <= r * r ? 1.0 : 0.0;
        }
        const int kids = 1 << d;
        double s = 0;
        for (int c = 0; c < kids; ++c) {
            Vec clo = lo;
            for (int ax = 0; ax < d; ++ax)
                if ((c >> ax) & 1) clo[ax] += 0.5 * h;
            s += frac(clo, 0.5 * h, depth + 1);
        }
        return s / kids;
    };

    double mass = 0;
    const double cell_vol = std::pow(td.spacing, d);
    std::vector<int> idx(d, 0);
    const int ncells = static_cast<int>(td.values.size());
    for (int flat = 0; flat < ncells; ++flat) {
        if (td.values[flat] != 0) {
            Vec lo(d);
            int rem = flat;
            for (int ax = 0; ax < d; ++ax) {
                lo[ax] = td.origin[ax] + (rem % td.counts[ax]) * td.spacing;
                rem /= td.counts[ax];
            }
            const double f = frac(lo, td.spacing, 0);
            if (f > 0) mass += td.values[flat] * cell_vol * f;
        }
    }
    return mass;
}

}  // namespace

double BoundaryMeasure::ball_mass(const Domain& domain, const Vec& center, double r) const {
    if (!(r > 0)) throw DomainError("ball_mass: radius must be positive");
    if (!is_positive())
        throw DomainError("ball_mass: defined for positive measures only; use absolute()");
    const int d = domain.dimension - 1;
    const bool ball = domain.kind == DomainKind::UnitBall;
    double mass = 0;
    for (const auto& c : components_) {
        mass += std::visit(
            [&](const auto& comp) -> double {
                using T = std::decay_t<decltype(comp)>;
                if constexpr (std::is_same_v<T, Atom>) {
                    return dist(comp.location, center) <= r ? comp.mass : 0.0;
                } else if constexpr (std::is_same_v<T, RadialPowerDensity>) {
                    if (ball)
                        return spherical_profile_cap_mass(
                            std::acos(clamp01(dot(comp.center, center))), r, comp.cutoff,
                            comp.exponent, comp.coefficient);
                    return radial_profile_ball_mass(d, dist(comp.center, center), r, comp.cutoff,
                                                    comp.exponent, comp.coefficient);
                } else if constexpr (std::is_same_v<T, UniformBallDensity>) {
                    if (ball)
                        return spherical_profile_cap_mass(
                            std::acos(clamp01(dot(comp.center, center))), r, comp.radius, 0.0,
                            comp.coefficient);
                    return radial_profile_ball_mass(d, dist(comp.center, center), r, comp.radius,
                                                    0.0, comp.coefficient);
                } else {
                    if (ball) throw DomainError("tabulated densities: half-space boundary only");
                    return tabulated_ball_mass(comp, center, r);
                }
            },
            c);
    }
    return mass;
}

std::vector<Vec> BoundaryMeasure::singular_points() const {
    std::vector<Vec> pts;
    for (const auto& c : components_) {
        if (const auto* a = std::get_if<Atom>(&c)) {
            if (a->mass != 0) pts.push_back(a->location);
        } else if (const auto* rp = std::get_if<RadialPowerDensity>(&c)) {
            if (rp->coefficient != 0 && rp->exponent < 0) pts.push_back(rp->center);
        }
    }
    return pts;
}

}  // namespace potkit
