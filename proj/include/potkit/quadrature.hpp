#pragma once

#include <functional>
#include <vector>

namespace potkit {

/// Nodes/weights of the n-point Gauss-Legendre rule on [-1,1] (cached).
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_rule(int n);

/// Integrate f over [a,b] with one n-point Gauss panel.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int n = 16);

/// Integrate over consecutive panels given by breakpoints.
double integrate_panels(const std::function<double(double)>& f,
                        const std::vector<double>& breaks, int n = 16);

/// Breakpoints of [a,b] graded geometrically toward `toward` (which must be
/// a or b), `count` panels, smallest panel ~ ratio^count of the interval.
std::vector<double> geometric_breaks(double a, double b, double toward, int count,
                                     double ratio = 0.5);

/// Adaptive 1-D integration (panel bisection on GL error estimate).
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, int max_depth = 24);

/// Quadrature knobs shared by the potential evaluators.
struct QuadratureConfig {
    double rel_tol = 1e-3;            // eps_q, relative error target
    double panel_split_ratio = 0.6;   // split a panel when size > ratio * distance-to-feature
    int gl_points = 3;                // tensor Gauss points per axis on a leaf panel
    int max_leaves = 400000;          // budget before a ToleranceFailure is raised
    double hotspot_exclusion = 0.0;   // exclusion-ball radius at singular points (0 = auto)
    double near_tier_radius = 3.0;    // cone-average cells within this many half-diagonals
    double mid_tier_radius = 12.0;    // Gauss cell averages out to this tier
    bool analytic_tail = true;        // add the power-decay tail beyond the box
    // Divergence rule: value declared divergent when `divergence_checks`
    // successive truncation refinements each grow it by > divergence_growth.
    double divergence_growth = 0.10;
    int divergence_checks = 3;
};

}  // namespace potkit
