#pragma once

#include "parisian/model.hpp"

#include <map>
#include <string>
#include <vector>

namespace parisian {

struct NormalTriple {
    double cdf;
    double sf;
    double pdf;
};

NormalTriple std_normal(double x);
double norm_cdf(double x);
double norm_sf(double x);
double norm_pdf(double x);
// Accurate for deep left tails where norm_cdf underflows.
double log_norm_cdf(double x);

// P(sup_{[0,T]} (W(t) - c t) > u) for a single Brownian surplus process.
double single_ruin_prob(double c, double u, double T = 1.0);

// Drift-adjusted quadratic form q(s,t) = a^T Sigma^{-1} a with
// a = (1 + c1 s/u, a + c2 t/u) and Sigma the covariance of (W1(s), W2(t)).
double quadratic_form(const ModelParams& p, double u, double s, double t);

struct GridMinimum {
    double s;
    double t;
    double value;
};

// Brute-force minimizer of q over (0,1]^2: coarse scan plus nested tenfold
// refinements around the incumbent. Resolution after r refinements is
// coarse_step / 10^r.
GridMinimum grid_minimize_q(const ModelParams& p, double u,
                            double coarse_step = 1e-3, int refinements = 2);

// Piecewise drift constants entering the boundary-case limit.
struct DriftConstants {
    double c41_prime;
    double c42_prime;
    double c4;
};

DriftConstants c4_drift_constants(double c1, double c2);

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

// Pool of estimated limit constants keyed by canonical parameter strings.
struct LimitConstants {
    std::map<std::string, Estimate> values;
};

// A single constant the current regime's limit requires.
struct ConstantSpec {
    enum class Kind { p_const, h_const, r_const, cp_const };
    Kind kind;
    double w1 = 0.0; // drift (p/h kinds)
    double w2 = 0.0; // exponent (p/h kinds)
    double s = 0.0;  // window (p/h/cp kinds), first window for r kind
    double s2 = 0.0; // second window (r kind only)
    std::string key() const;
};

std::string constant_key_p(double w1, double w2, double s);
std::string constant_key_h(double w1, double w2, double s);
std::string constant_key_r(double s1, double s2);
std::string constant_key_cp(double s1);

// Constants the regime's limit formula consumes, deduplicated by key.
std::vector<ConstantSpec> required_constants(const ModelParams& p, double tol = 1e-12);

// Assembles the theoretical limit of the conditional Parisian ruin probability
// from estimated constants, with first-order stderr propagation. Missing keys
// raise assembly_error.
Estimate theoretical_ratio_limit(const ModelParams& p, const LimitConstants& constants,
                                 double tol = 1e-12);

} // namespace parisian
