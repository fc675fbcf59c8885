#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kfp/solver.hpp"

namespace kfp {

// The seven left-hand quantities of the global L^2 estimate, plus the right
// side. Everything is an L^2 norm over (-inf,0) x R^{3d}, evaluated through
// Parseval on the Fourier side.
struct SeminormVector {
    double lambda_u = 0.0;           // lambda ||u||
    double sqrtlambda_grad_x = 0.0;  // lambda^{1/2} ||grad_x u||
    double grad_x2 = 0.0;            // ||grad_x^2 u||
    double frac_y13 = 0.0;           // ||(-Delta_y)^{1/3} u||
    double frac_z15 = 0.0;           // ||(-Delta_z)^{1/5} u||
    double mixed_xy16 = 0.0;         // ||grad_x (-Delta_y)^{1/6} u||
    double transport = 0.0;          // ||(d_t - x.grad_y - y.grad_z) u||
    double rhs = 0.0;                // ||P_0 u + lambda u|| = ||f||

    double lhs_sum() const;
    bool finite() const;
};

SeminormVector seminorms(const SpectralSolution& sol, const QuadratureSpec& quad);

// (sum of the seven LHS entries) / rhs; throws UndefinedRatioError when rhs = 0.
double estimate_ratio(const SeminormVector& v);

struct ScaleCheckResult {
    SeminormVector base;
    SeminormVector scaled;
    double expected_factor = 1.0;    // r^2 * r^{-(2+9d)/2}
    double max_entry_deviation = 0.0;
    double ratio_deviation = 0.0;
};

// Verifies that every seminorm entry and the rhs pick up the common factor
// r^2 r^{-(2+9d)/2} under u -> u o delta_r, a -> a(r^2 .), lambda -> r^2 lambda,
// and that the estimate ratio is invariant.
ScaleCheckResult scale_invariance_check(const TrialFunction& trial, const CoefficientPath& a,
                                        double lambda, double r, const QuadratureSpec& quad);

// Parameter ranges for randomized source families, sampled by constant_search.
struct TrialFamilySpec {
    int dimension = 1;
    int packets = 1;
    double support_start_min = -1.0;
    double support_start_max = -0.35;
    double min_duration = 0.25;
    double center_min = -0.5;
    double center_max = 0.5;
    double width_min = 0.9;
    double width_max = 1.4;
    int hermite_max = 2;
    double modulation_min = -1.5;
    double modulation_max = 1.5;
    std::vector<int> bump_orders = {0, 2};  // 0 = indicator profile

    void validate() const;
};

struct TrialResult {
    int trial_index = 0;
    double lambda = 0.0;
    std::vector<double> params;     // flattened continuous parameters
    std::vector<int> shape_params;  // bump order + hermite orders
    SeminormVector sem;
    double ratio = 0.0;
};

struct EstimateReport {
    std::string experiment_id;
    std::uint64_t seed = 0;
    std::string config_hash;
    int dimension = 1;
    double delta = 0.5;
    std::vector<TrialResult> trials;
    double max_ratio = 0.0;
};

// Seeded random sampling of the family followed by interleaved coordinatewise
// refinement of the best candidate. One unit of budget = one sampled source
// evaluated on the whole lambda grid. Deterministic for a fixed seed, with the
// prefix property: a larger budget replays the smaller run's trials verbatim.
EstimateReport constant_search(const TrialFamilySpec& family, const CoefficientPath& a,
                               const std::vector<double>& lambda_grid, int budget,
                               std::uint64_t seed, const QuadratureSpec& quad, int jobs = 1);

// Rebuild a family member from the parameter vectors recorded in a report row.
TrialFunction realize_trial(const TrialFamilySpec& family, const std::vector<double>& params,
                            const std::vector<int>& shape_params);

// Seminorms of the r-dilated problem (f -> r^2 f o delta_r, a -> a(r^2 .),
// lambda -> r^2 lambda); scale_invariance_check compares this against the base.
SeminormVector seminorms_dilated(const TrialFunction& trial, const CoefficientPath& a,
                                 double lambda, double r, const QuadratureSpec& quad);

// max relative deviation of scaled entries from factor * base entries
double seminorm_scale_deviation(const SeminormVector& base, const SeminormVector& scaled,
                                double factor);

}  // namespace kfp
