#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "potkit/domain.hpp"
#include "potkit/kernels.hpp"
#include "potkit/measure.hpp"
#include "potkit/quadrature.hpp"

namespace potkit {

/// Interior kernels the quadrature engine integrates against.
enum class InteriorKernelKind {
    Green,         // exact Green kernel of -Laplace
    Model,         // N_{alpha,beta}
    GradMajorant,  // N_{1,1} (majorant of |grad G| / rho(y))
};

struct InteriorKernel {
    InteriorKernelKind kind = InteriorKernelKind::Green;
    Domain domain;
    KernelSpec spec;  // used by Model

    double value(const Vec& x, const Vec& y) const;
    /// Tangential far-field decay exponent of value((x',t_a),(y',t_b)) in |x'-y'|.
    double far_decay() const;
    /// |x-y| power of the diagonal singularity (must be < N to be integrable).
    double diagonal_exponent() const;
};

/// Kernels applied to boundary measures.
enum class BoundaryKernelKind {
    Poisson,  // exact Poisson kernel
    Model,    // N_{alpha,beta}(x, z), z on the boundary
};

/// K[sigma](x) for a boundary measure: atoms in closed form, radial density
/// components reduced to (s,phi) quadratures around their own centers and
/// cached on a log-log table in (tangential offset, height).
class BoundaryPotential {
public:
    BoundaryPotential(const Domain& domain, BoundaryMeasure sigma, BoundaryKernelKind kind,
                      KernelSpec spec = {}, QuadratureConfig cfg = {});

    double eval(const Vec& x) const;
    double eval_direct(const Vec& x) const;  // bypass the tables

    /// Decay exponent of K[sigma] in |x| at fixed rho(x)/|x| (half-space).
    double far_decay() const;
    const BoundaryMeasure& measure() const { return sigma_; }
    const Domain& domain() const { return domain_; }

private:
    struct ComponentTable {
        double log_e_min, log_e_step;
        double log_t_min, log_t_step;
        int ne, nt;
        std::vector<double> log_values;  // log K_comp(e, t)
    };
    double eval_component(size_t ci, const Vec& x, bool allow_table) const;
    double component_direct(size_t ci, double e, double t) const;
    double component_direct_ball(size_t ci, const Vec& x) const;
    void build_table(size_t ci);

    Domain domain_;
    BoundaryMeasure sigma_;
    BoundaryKernelKind kind_;
    KernelSpec spec_;
    QuadratureConfig cfg_;
    std::vector<std::optional<ComponentTable>> tables_;
};

inline double poisson_potential(const Domain& domain, const BoundaryMeasure& sigma, const Vec& x,
                                const QuadratureConfig& cfg = {}) {
    return BoundaryPotential(domain, sigma, BoundaryKernelKind::Poisson, {}, cfg).eval_direct(x);
}

/// Tabulate a boundary potential on a grid; the tail exponent is the
/// potential's tangential decay.
Field tabulate(const BoundaryPotential& pot, std::shared_ptr<const Grid> grid);

/// Nystrom-type collocation operator for interior potentials on half-space
/// grids: translation-invariant kernel tables per level pair, cell-averaged
/// near the diagonal, midpoint elsewhere; analytic tangential tail.
class GridOperator {
public:
    GridOperator(std::shared_ptr<const Grid> grid, InteriorKernel kernel,
                 QuadratureConfig cfg = {});

    /// out(x_i) = sum_j k(x_i,y_j) f_j w_j (+ tail), at every node.
    Field apply(const Field& f) const;
    /// Same quadrature evaluated at an arbitrary interior point.
    double apply_at(const Field& f, const Vec& x) const;

    const Grid& grid() const { return *grid_; }
    const InteriorKernel& kernel() const { return kernel_; }

    /// Cell-averaged kernel between node i and cell j (table-backed for
    /// half-space pairs); used to measure discrete majorant constants.
    double cell_kernel(int i, int j) const;

private:
    double tail_at(const Field& f, const Vec& x) const;
    void ensure_tables() const;
    std::shared_ptr<const Grid> grid_;
    InteriorKernel kernel_;
    QuadratureConfig cfg_;
    // table[(a*m+b)*offsets + offset] = kernel value (cell-averaged if near);
    // built on first apply()/cell_kernel()
    mutable std::vector<double> table_;
    mutable std::once_flag table_once_;
    int offsets_per_axis_ = 0;
    int offset_count_ = 0;
    bool dense_ = false;  // ball grids: direct O(M^2) apply
};

/// Average of k(x,.) over an axis-aligned box by the cone decomposition
/// around x; exact for pure powers of |x-y|, valid for any apex location.
double kernel_box_average(const InteriorKernel& k, const Vec& x, const Vec& lo, const Vec& hi);

/// Tensor 2-point Gauss average of k(x,.) over a box (x well separated).
double box_average_gl2(const InteriorKernel& k, const Vec& x, const Vec& lo, const Vec& hi);

/// Green potential of a tabulated nonnegative density.
double green_potential(const GridOperator& green_op, const Field& f, const Vec& x);

/// Riesz potential on the boundary plane R^d via the layer-cake formula
///   I_gamma[mu](y) = int_0^inf mu(B_r(y)) r^{gamma-d} dr/r,
/// which equals the convolution with |x|^{gamma-d}/(d-gamma).
double riesz_potential(const BoundaryMeasure& mu, double gamma, const Vec& y,
                       const QuadratureConfig& cfg = {});

/// Riesz kernel matching the layer-cake normalization above.
inline double riesz_kernel(int d, double gamma, double r) {
    return std::pow(r, gamma - d) / (d - gamma);
}

/// (int |f|^{s'} rho^{alpha0} dx)^{1/s'} over the grid box plus the declared
/// power tail.
double weighted_norm(const Field& f, double s_prime, double alpha0, bool with_tail = true);

/// Hot spot of an integrand: a boundary point where it may blow up.
struct HotSpot {
    Vec center;     // interior coordinates (lifted for the half-space)
    double radius;  // exclusion-ball radius; 0 = no exclusion
};

/// Adaptive panel integration of int k(x,y) F(y) dy over the truncated
/// half-space box, panels graded toward x and toward each hot spot, hot-spot
/// exclusion balls removed. Used by the pointwise criteria.
double kernel_apply_adaptive(const InteriorKernel& kernel, const Vec& x,
                             const std::function<double(const Vec&)>& F, double box_halfwidth,
                             const std::vector<HotSpot>& hot_spots, const QuadratureConfig& cfg);

}  // namespace potkit
