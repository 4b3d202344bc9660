#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "potkit/errors.hpp"
#include "potkit/vec.hpp"

namespace potkit {

enum class DomainKind { HalfSpace, UnitBall };

/// Half-space R^{N-1} x (0,inf) or the unit ball, N >= 3.
struct Domain {
    DomainKind kind = DomainKind::HalfSpace;
    int dimension = 3;

    Domain() = default;
    Domain(DomainKind k, int n) : kind(k), dimension(n) {
        if (n < 3) throw DomainError("Domain: dimension must be >= 3");
        if (n > Vec::kMaxDim) throw DomainError("Domain: dimension too large");
    }

    static Domain half_space(int n) { return Domain(DomainKind::HalfSpace, n); }
    static Domain unit_ball(int n) { return Domain(DomainKind::UnitBall, n); }

    /// Distance to the boundary; x_N on the half-space, 1-|x| on the ball.
    double rho(const Vec& x) const {
        double r = kind == DomainKind::HalfSpace ? x[dimension - 1] : 1.0 - x.norm();
        if (r < 0) {
            if (r > -1e-14) return 0.0;  // closure, up to roundoff
            throw DomainError("rho: point outside the closure of the domain");
        }
        return r;
    }

    bool inside(const Vec& x) const {
        return kind == DomainKind::HalfSpace ? x[dimension - 1] > 0 : x.norm2() < 1.0;
    }
    bool in_closure(const Vec& x) const {
        return kind == DomainKind::HalfSpace ? x[dimension - 1] >= -1e-14
                                             : x.norm2() <= 1.0 + 1e-12;
    }
    bool on_boundary(const Vec& x) const {
        return kind == DomainKind::HalfSpace ? std::abs(x[dimension - 1]) <= 1e-14
                                             : std::abs(x.norm() - 1.0) <= 1e-12;
    }

    std::string name() const { return kind == DomainKind::HalfSpace ? "half-space" : "unit-ball"; }
};

/// Tensor grid over the truncation box [-L,L]^{N-1} x (0,L] (half-space) or
/// over the unit ball, geometrically graded toward the boundary: normal
/// levels t_k = L r^k, k = 1..m.
struct GridSpec {
    double box_halfwidth = 2.0;   // L
    double tangential_h = 0.25;   // h
    double grading_ratio = 0.5;   // r in (0,1)
    int levels = 12;              // m

    void validate() const {
        if (!(box_halfwidth > 0)) throw DomainError("GridSpec: L must be positive");
        if (!(tangential_h > 0)) throw DomainError("GridSpec: h must be positive");
        if (!(grading_ratio > 0 && grading_ratio < 1))
            throw DomainError("GridSpec: grading ratio must lie in (0,1)");
        if (levels < 1) throw DomainError("GridSpec: need at least one grading level");
    }

    /// Normal coordinate of level k (1-based as in t_k = L r^k).
    double level_coord(int k) const { return box_halfwidth * std::pow(grading_ratio, k + 1); }
};

/// A realized grid: node coordinates, quadrature weights, and the index
/// structure (tangential lattice x normal levels) the fast operators rely on.
class Grid {
public:
    Grid(const Domain& domain, const GridSpec& spec);

    const Domain& domain() const { return domain_; }
    const GridSpec& spec() const { return spec_; }

    int node_count() const { return static_cast<int>(weights_.size()); }
    const Vec& node(int i) const { return nodes_[i]; }
    double weight(int i) const { return weights_[i]; }
    double rho(int i) const { return rho_[i]; }

    // Half-space index structure. Node id = level*tangential_count + tangential id.
    int tangential_per_axis() const { return nt_; }
    int tangential_count() const { return tang_count_; }
    int level_count() const { return m_; }
    double tangential_step() const { return ht_; }
    double level_normal(int k) const { return level_t_[k]; }
    double level_thickness(int k) const { return level_dt_[k]; }
    double level_centroid(int k) const { return 0.5 * (level_lo_[k] + level_hi_[k]); }
    /// Exact slab moment int t^{a0} dt over level k.
    double level_rho_moment(int k, double a0) const {
        return (std::pow(level_hi_[k], a0 + 1) - std::pow(level_lo_[k], a0 + 1)) / (a0 + 1);
    }
    double tangential_coord(int idx_1d) const { return -spec_.box_halfwidth + (idx_1d + 0.5) * ht_; }

    bool is_half_space() const { return domain_.kind == DomainKind::HalfSpace; }

    /// Axis-aligned cell of a half-space node: [lo, hi) per coordinate.
    void cell_bounds(int i, Vec& lo, Vec& hi) const;

    double total_weight() const { return total_weight_; }

private:
    void build_half_space();
    void build_ball();

    Domain domain_;
    GridSpec spec_;
    std::vector<Vec> nodes_;
    std::vector<double> weights_;
    std::vector<double> rho_;
    // half-space structure
    int nt_ = 0, m_ = 0, tang_count_ = 0;
    double ht_ = 0;
    std::vector<double> level_t_, level_dt_, level_lo_, level_hi_;
    double total_weight_ = 0;
};

/// Scalar field tabulated on a Grid. Multilinear interpolation between nodes
/// (half-space); declared power-decay extrapolation beyond the tangential box.
class Field {
public:
    Field() = default;
    Field(std::shared_ptr<const Grid> grid, double tail_exponent = 0.0)
        : grid_(std::move(grid)), values_(grid_->node_count(), 0.0), tail_exponent_(tail_exponent) {}

    const Grid& grid() const { return *grid_; }
    std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    double operator[](int i) const { return values_[i]; }
    double& operator[](int i) { return values_[i]; }

    /// Tangential decay exponent tau: beyond the box the field continues as
    /// edge value * (L/|y'|)^tau. tau = 0 means constant continuation is
    /// never used -- the field is treated as 0 outside.
    double tail_exponent() const { return tail_exponent_; }
    void set_tail_exponent(double tau) { tail_exponent_ = tau; }

    /// Multilinear interpolation; exact at nodes, nonnegative for
    /// nonnegative tabulated values. Outside the box: 0 (or declared tail).
    double eval(const Vec& x) const;

    double sup_norm() const {
        double s = 0;
        for (double v : values_) s = std::max(s, std::abs(v));
        return s;
    }

    void export_csv(const std::string& path) const;

private:
    std::shared_ptr<const Grid> grid_;
    std::vector<double> values_;
    double tail_exponent_ = 0.0;
};

}  // namespace potkit
