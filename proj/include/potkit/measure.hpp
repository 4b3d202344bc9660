#pragma once

#include <variant>
#include <vector>

#include "potkit/domain.hpp"
#include "potkit/vec.hpp"

namespace potkit {

/// Point mass on the boundary. `location` has N-1 coordinates on the
/// half-space boundary plane, N coordinates (unit vector) on the sphere.
struct Atom {
    Vec location;
    double mass = 0;
};

/// Density c |z - center|^p restricted to |z - center| <= R.
struct RadialPowerDensity {
    Vec center;
    double exponent = 0;  // p > -(N-1) for local integrability
    double cutoff = 1;    // R
    double coefficient = 0;
};

/// Constant density on a boundary ball (spherical cap on the sphere,
/// chordal radius).
struct UniformBallDensity {
    Vec center;
    double radius = 1;
    double coefficient = 0;
};

/// Piecewise-constant density on a uniform cell grid in R^{N-1}
/// (half-space boundary only). `origin` is the lower corner, cells are
/// `spacing`-sized, values in row-major order (first axis fastest).
struct TabulatedDensity {
    Vec origin;
    double spacing = 1;
    std::vector<int> counts;
    std::vector<double> values;
};

using MeasureComponent = std::variant<Atom, RadialPowerDensity, UniformBallDensity, TabulatedDensity>;

/// Radon measure on the boundary, stored as a component list. Signed data
/// enters through negative masses/coefficients; all capacity and criteria
/// operations act on |sigma|.
class BoundaryMeasure {
public:
    BoundaryMeasure() = default;
    explicit BoundaryMeasure(std::vector<MeasureComponent> comps) : components_(std::move(comps)) {}

    static BoundaryMeasure atom(const Vec& z, double mass) {
        return BoundaryMeasure({Atom{z, mass}});
    }

    void add(MeasureComponent c) { components_.push_back(std::move(c)); }
    const std::vector<MeasureComponent>& components() const { return components_; }
    bool empty_measure() const { return components_.empty(); }

    bool is_positive() const;
    BoundaryMeasure positive_part() const;
    BoundaryMeasure negative_part() const;  // returned with positive masses
    BoundaryMeasure absolute() const;
    BoundaryMeasure scaled(double factor) const;

    double total_variation(int boundary_dim) const;

    /// sigma(B'_r(center)) for positive measures; additive over components.
    double ball_mass(const Domain& domain, const Vec& center, double r) const;

    /// Centers where the Poisson potential of the measure can blow up:
    /// atom locations and centers of radial densities with negative exponent.
    std::vector<Vec> singular_points() const;

private:
    std::vector<MeasureComponent> components_;
};

/// Mass of a radial profile c s^p chi_{s<=R} over B_r(center') in R^d where
/// e = |center' - density center|. Exact up to 1-D Gauss panels.
double radial_profile_ball_mass(int d, double e, double r, double R, double p, double coef);

/// Same for a chordal-radial profile on the unit sphere S^2 in R^3.
double spherical_profile_cap_mass(double axis_angle, double r_chordal, double R_chordal,
                                  double p, double coef);

/// Total mass of the radial profile (r -> infinity limit).
double radial_profile_total_mass(int d, double R, double p, double coef);

/// int_0^pi sin^k(t) dt, by Gauss-Legendre (cached).
double sin_power_integral(int k);

/// Surface area of the unit sphere S^{d-1} in R^d, built recursively from
/// sin-power quadratures.
double sphere_surface_area(int d);

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

}  // namespace potkit
