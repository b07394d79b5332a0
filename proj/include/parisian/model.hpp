#pragma once

#include <optional>
#include <string>
#include <vector>

namespace parisian {

// Model of two correlated Brownian surplus processes with barriers (u, a*u),
// drifts (c1, c2), endpoint correlation rho, and Parisian window sizes
// (s1, s2) expressed at the local scale (actual window lengths are S_i/u^2).
struct ModelParams {
    double c1 = 0.0;
    double c2 = 0.0;
    double a = 1.0;
    double rho = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;

    // Validates domains: a in (0,1], |rho| < 1, windows >= 0, everything finite.
    static ModelParams validated(double c1, double c2, double a, double rho,
                                 double s1, double s2);
};

// Inputs with barrier ratio above 1 are normalized by swapping coordinates so
// the second barrier is always the lower one. Requested barrier levels refer
// to the first coordinate and must be rescaled by barrier_scale after a swap.
struct NormalizedModel {
    ModelParams params;
    bool swapped = false;
    double barrier_scale = 1.0;
};

NormalizedModel normalize_model(double c1, double c2, double a_raw, double rho,
                                double s1, double s2);

enum class Regime {
    dom_a_lt_rho,
    dom_a_eq_rho,
    case_i,
    case_ii,
    case_iii,
    case_iv,
    case_v,
};

const char* regime_name(Regime r);
bool regime_is_dominated(Regime r);

// Critical correlation A_a = (1 - sqrt(8a^2+1))/(4a), always in (-1, 0).
double critical_rho(double a);

// Dispatches on (a, rho) relative to the critical correlation. Boundary
// comparisons use the caller-supplied tolerance; the tolerance band wins over
// the strict orderings so classification is stable near boundaries.
Regime classify_regime(const ModelParams& p, double tol = 1e-12);

// t* = limit of the optimizer time coordinate as the barrier grows.
double limit_optimizer_time(const ModelParams& p, double tol = 1e-12);

struct OptimizerPoint {
    double s = 1.0;
    double t = 1.0;
};

// Closed-form minimizer(s) of the drift-adjusted quadratic form on [0,1]^2 at
// barrier level u. Returns two mirror points when the symmetric branches
// apply, otherwise one point. A nonpositive or above-one time coordinate
// clamps to (1,1). Dominated regimes return (1,1) by convention.
std::vector<OptimizerPoint> optimizer_point(const ModelParams& p, double u,
                                            double tol = 1e-12);

enum class BlockRelation { diagonal, l_gt_k, l_lt_k };

// Exponential tilt rates for the two coordinates at t*, plus the Taylor
// coefficients of the local expansion where the regime defines them.
struct LocalExponents {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::optional<double> tau1;
    std::optional<double> tau4;
};

LocalExponents local_exponents(const ModelParams& p, BlockRelation rel,
                               double tol = 1e-12);

} // namespace parisian
