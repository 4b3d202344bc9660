#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "potkit/capacity.hpp"
#include "potkit/domain.hpp"
#include "potkit/kernels.hpp"
#include "potkit/measure.hpp"

namespace potkit {

enum class Verdict { Pass, Fail, Divergent, Critical };

std::string verdict_name(Verdict v);

/// Outcome of one solvability criterion or structural check.
struct CriterionReport {
    std::string criterion_id;
    Verdict verdict = Verdict::Pass;
    double constant = 0;  // measured best C (sup); meaningful for Pass
    Vec witness;          // where the sup was attained
    double witness_scale = 0;
    std::map<std::string, double> details;
    std::string note;

    bool passed() const { return verdict == Verdict::Pass; }
};

/// (N+1)/(N-1): below or at this exponent only sigma = 0 admits solutions
/// on the half-space.
double critical_exponent_pure(int N);

/// (N-1)q1 + N q2 < N+1, asserted equal to (N-1)(q1+q2-1) < 2-q2.
bool subcritical_mixed(int N, double q1, double q2);

/// Geometric controls shared by the stability-based criteria.
struct CriteriaConfig {
    GridSpec grid;                 // bulk collocation grid
    int random_probes = 200;
    uint64_t seed = 1;
    std::vector<double> ray_heights = {0.4, 0.2, 0.1, 0.05};
    double ray_exclusion = 0.5;    // hot-spot exclusion = this * probe height
    double slope_tol = 0.05;       // |slope| below this: critical/inconclusive
    double stability_tol = 0.10;   // the 10% refinement rule
    int family_depth = 6;          // shrinking-ball refinements per hot spot

    CriteriaConfig() {
        grid.box_halfwidth = 2.0;
        grid.tangential_h = 0.25;
        grid.grading_ratio = 0.5;
        grid.levels = 12;
    }
};

/// sigma(B_r) <= C r^{N-(q+1)/(q-1)} over a shrinking ball family.
CriterionReport ball_growth_test(const Domain& domain, const BoundaryMeasure& sigma, double q,
                                 const std::vector<std::pair<Vec, double>>& family,
                                 const CriteriaConfig& cfg = {});

/// Fefferman-Phong condition: sup over balls of
/// (int_{B_r} f^{1+eps}) / r^{N-1-2(eps+1)/(q-1)} for a density f.
CriterionReport fefferman_phong_test(const Domain& domain, const BoundaryMeasure& density,
                                     double eps, double q,
                                     const std::vector<std::pair<Vec, double>>& family,
                                     const CriteriaConfig& cfg = {});

/// Pointwise supersolution test G[(P[sigma])^q] <= C P[sigma]: bulk sup over
/// grid and random probes, with self-similar ray diagnostics toward every
/// singular point of sigma. Ray log-log slope 1+N-q(N-1) decides atoms.
CriterionReport pointwise_test(const Domain& domain, const BoundaryMeasure& sigma, double q,
                               const CriteriaConfig& cfg = {});

/// Kernel-model pointwise test
/// N_{a,b}[(N_{a,b}[sigma])^q rho^{alpha0}] <= C N_{a,b}[sigma].
CriterionReport kernel_model_pointwise_test(const Domain& domain, const KernelSpec& spec,
                                            const BoundaryMeasure& sigma,
                                            const CriteriaConfig& cfg = {});

/// Hardy-potential pointwise test through the kernel-model surrogates
/// (alpha = 1+sqrt(1-4 kappa), beta = 2, alpha0 = (q+1)(1+sqrt(1-4kappa))/2).
CriterionReport pointwise_test_hardy(const Domain& domain, const BoundaryMeasure& sigma,
                                     double q, double kappa, const CriteriaConfig& cfg = {});

/// Quasi-metric constant of d = 1/N_{alpha,beta}: max over sampled triples of
/// d(x,y)/(d(x,z)+d(z,y)); pass iff stable under sample doubling.
CriterionReport quasi_metric_verify(const KernelSpec& spec, const Domain& domain,
                                    int sample_count, uint64_t seed = 1);

/// Doubling checks for nu = rho^{alpha0} dx: the Euclidean-ball comparability
/// nu(B_s(x)) / ((max{rho,s})^{alpha0} s^N) two-sided constants, and the
/// quasi-metric-ball dyadic doubling constant of int_0^r nu(B_s)/s ds/s.
CriterionReport doubling_verify(double alpha0, const Domain& domain, const KernelSpec& spec,
                                int sample_count, uint64_t seed = 1);

/// Measure-vs-capacity criterion over a hot-spot-refined family, with the
/// 10%-growth divergence rule at shrinking radii.
CriterionReport capacity_criterion(const Domain& domain, const BoundaryMeasure& sigma, double q,
                                   const CriteriaConfig& cfg = {});

/// Shrinking-ball family anchored at the measure's singular points (or its
/// support center when the measure is smooth).
std::vector<std::pair<Vec, double>> default_ball_family(const BoundaryMeasure& sigma,
                                                        double base_radius, int depth);

/// nu(B_s(x)) for nu = rho^{alpha0} restricted to the domain (quadrature).
double rho_weighted_ball_mass(const Domain& domain, double alpha0, const Vec& x, double s);

/// The named battery of boundary measures used by the equivalence checks.
struct BatteryEntry {
    std::string name;
    BoundaryMeasure sigma;
    bool expected_solvable;  // supercritical q = 3, N = 3 reference verdict
};
std::vector<BatteryEntry> standard_battery();

}  // namespace potkit
