#pragma once

#include "parisian/analytics.hpp"
#include "parisian/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace parisian {

// Shared Monte Carlo controls for the limit-constant estimators.
// delta = 0 selects max(min(S, 1) / 32, 1/256); empty ladders select the
// per-estimator defaults.
struct McOptions {
    long n_paths = 100000;
    std::uint64_t seed = 20240801;
    int workers = 1;
    double delta = 0.0;
    std::vector<double> t_ladder;
    std::vector<double> h_ladder;
    bool closed_form_s0 = true;
    bool sup_correction = true;
    bool allow_w2_neq_2w1 = false;
    bool keep_samples = false;
};

struct LadderLevel {
    double span = 0.0;
    double value = 0.0;
    double se = 0.0;
};

struct ConstantEstimate {
    std::string key;
    double value = 0.0;
    double se = 0.0;
    bool closed_form = false;
    std::vector<LadderLevel> ladder;
    std::vector<std::string> warnings;
    std::vector<double> samples;
};

// Zero-window closed forms used both as shortcuts and as test anchors.
double exact_p_s0(double w1, double w2);
double exact_h_s0(double w1);
double exact_cp_s0();

// Horizon ladder matched to the mixing time of a drift-w1 field.
std::vector<double> default_h_ladder(double w1);

// Pickands-type functional of a unit Brownian field with drift w1:
// expectation of e^{w2 X} for X the all-time sup of the running window
// infimum, divided by w2. Requires 0 < w2 < 2 w1. The horizon ladder
// checks convergence of the sup; the last level is the estimate.
ConstantEstimate estimate_P(double w1, double w2, double s, const McOptions& opts);

// Density-normalized variant with the window-start range as normalizer.
// Requires w2 = 2 w1 (override flag relaxes the check). The estimate is
// the intercept of a linear fit in 1/span over the last three ladder
// levels since the bias decays as 1/span.
ConstantEstimate estimate_H(double w1, double w2, double s, const McOptions& opts);

// Joint two-component functional over correlated fields with drifts
// (1, a); lambda1 < 2 and lambda2 < 2 a are required for finiteness.
ConstantEstimate estimate_R(double s1, double s2, double a, double rho,
                            double lambda1, double lambda2, const McOptions& opts);

// Fully-dominated limit constant: expectation of e^X for X the sup over
// window right ends t >= 0 of the window infimum of
// sqrt(2) B(tau) - 2 tau_+, B two-sided and pinned at tau = 0, so the
// window reaches back into a driftless arm on tau < 0.
ConstantEstimate estimate_Cp(double s1, const McOptions& opts);

// Positional forms: a single horizon T_max expands to the geometric
// ladder {T/4, T/2, T}; delta = 0 selects the default grid; everything
// else takes the McOptions defaults.
ConstantEstimate estimate_P(double w1, double w2, double s, double t_max, double delta,
                            long n_paths, std::uint64_t seed);
ConstantEstimate estimate_H(double w1, double w2, double s,
                            const std::vector<double>& delta_schedule, double delta,
                            long n_paths, std::uint64_t seed);
ConstantEstimate estimate_R(double s1, double s2, double a, double rho,
                            double lambda1, double lambda2, double t_max, double delta,
                            long n_paths, std::uint64_t seed);
ConstantEstimate estimate_Cp(double s1, double t_max, double delta, long n_paths,
                             std::uint64_t seed);

// Dispatch on a regime requirement; lambda exponents for the joint
// functional come from the diagonal block relation of the model.
ConstantEstimate estimate_constant(const ConstantSpec& spec, const ModelParams& p,
                                   const McOptions& opts);

// Cross-check: rebuilds E[e^{w2 X}] / w2 from raw functional samples by
// integrating the empirical survival function against w2 e^{w2 x} on a
// uniform grid, with the exact sub-minimum tail added in closed form.
double survival_weighted_integral(const std::vector<double>& samples, double w2,
                                  int grid_points = 512);

} // namespace parisian
