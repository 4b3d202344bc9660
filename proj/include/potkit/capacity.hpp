#pragma once

#include <utility>
#include <vector>

#include "potkit/domain.hpp"
#include "potkit/kernels.hpp"
#include "potkit/measure.hpp"
#include "potkit/vec.hpp"

namespace potkit {

/// Compact test set on the boundary plane: a finite union of balls.
struct BallSet {
    std::vector<std::pair<Vec, double>> balls;  // (center, radius)

    bool empty_set() const { return balls.empty(); }
    bool contains(const Vec& z) const {
        for (const auto& [c, r] : balls)
            if (dist(z, c) <= r) return true;
        return false;
    }
    double outer_radius() const {
        double R = 0;
        for (const auto& [c, r] : balls) R = std::max(R, c.norm() + r);
        return R;
    }
    static BallSet ball(const Vec& center, double radius) { return BallSet{{{center, radius}}}; }
};

/// Discretization and iteration budget of the capacity programs.
struct CapacityConfig {
    double box_halfwidth = 6.0;  // f lives on [-B,B]^d
    double h = 1.0 / 6.0;        // cell size; constraint points at spacing h/2
    int penalty_rounds = 4;      // outer x inner = primal iteration budget
    int inner_iterations = 60;
    int dual_iterations = 200;
    double tol = 1e-7;

    /// Discretization proportional to the set size (keeps the relative
    /// resolution constant across a family of dilated sets).
    static CapacityConfig scaled_to(double R) {
        CapacityConfig c;
        c.box_halfwidth = 4.0 * R;
        c.h = R / 6.0;
        return c;
    }
};

struct CapacityEstimate {
    double primal = 0;       // value of a repaired feasible point: upper estimate
    double dual = 0;         // Lagrangian certificate: lower bound of the discrete primal
    double kkt_residual = 0; // final projected-gradient norm + constraint violation
    int primal_iterations = 0;
    int dual_iterations = 0;
    double gap() const { return primal - dual; }
};

/// Discrete Cap_{I_gamma,s}(K): minimize sum a_j f_j^s over f >= 0 subject to
/// (I_gamma * f)(x_c) >= 1 on a covering family of constraint points of K.
double riesz_capacity_primal(const BallSet& K, double gamma, double s,
                             const CapacityConfig& cfg = {});

/// Dual estimate: maximize omega(K) over masses on the constraint points with
/// ||I_gamma[omega]||_{L^{s'}} <= 1, reported as the s-th power so it is
/// comparable to the primal. Always <= the primal of the same discretization.
double riesz_capacity_dual(const BallSet& K, double gamma, double s,
                           const CapacityConfig& cfg = {});

/// Both programs on one shared discretization (weak duality holds exactly).
CapacityEstimate riesz_capacity(const BallSet& K, double gamma, double s,
                                const CapacityConfig& cfg = {});

/// Dual program for the weighted kernel capacity of E = K x {0}: maximize
/// omega(E) subject to ||N_{alpha,beta}[omega]||_{L^{s'}(rho^{alpha0} dx)} <= 1,
/// the norm taken over a graded half-space grid; returns the s-th power.
struct WeightedCapacityConfig {
    double h = 1.0 / 6.0;          // boundary mass spacing factor (times set radius)
    double box_factor = 4.0;       // norm box = box_factor * set radius
    double grading_ratio = 0.6;
    int dual_iterations = 300;
};
double weighted_capacity_dual(const KernelSpec& spec, double s, const BallSet& K,
                              const WeightedCapacityConfig& cfg = {});

/// sup over a family of test sets of sigma(K) / Cap_dual(K), with the
/// capacity denominators computed at set-scaled resolution.
struct MeasureCapacityComparison {
    double sup_ratio = 0;
    int worst_index = -1;
    std::vector<double> masses;
    std::vector<double> capacities;
    std::vector<double> ratios;
};
MeasureCapacityComparison measure_vs_capacity(const Domain& domain, const BoundaryMeasure& sigma,
                                              double q, const std::vector<BallSet>& family);

}  // namespace potkit
