#pragma once

#include "parisian/model.hpp"
#include "parisian/rng.hpp"

#include <cstdint>
#include <vector>

namespace parisian {

// Uniform grid on the unit horizon; detection happens at t_j = j * dt(),
// j = 1..n_steps. The origin is never a ruin point since u > 0.
struct GridSpec {
    long n_steps = 0;

    double dt() const { return 1.0 / static_cast<double>(n_steps); }
};

// Resolution scales with the shortest positive window: m grid steps per
// window at the working barrier level, floored so coarse runs stay sane.
GridSpec make_grid(const ModelParams& p, double u, int m = 16, long floor_steps = 4096);

// Number of whole grid intervals a clearance window of length H covers.
// Snaps near-integer products down, returns 0 for H = 0 and -1 when the
// window exceeds the horizon (the event is then impossible on the grid).
long window_steps(double window_h, long n_steps);

struct TiltConfig {
    bool enabled = false;
    double alpha = 0.0;
    double beta = 0.0;
};

// Exponential change of measure pushing the pair to its cheapest ruin
// point. When the second optimizer time is interior the second drift
// aims the combination at the lower barrier crossing as well.
TiltConfig default_tilt(const ModelParams& p, double u, double tol = 1e-12);

// One correlated pair of paths: w1[j-1] = W1(t_j), w2[j-1] = W2(t_j).
// log_weight converts tilted-measure averages back to the nominal one.
struct BivariatePath {
    double dt = 0.0;
    std::vector<double> w1;
    std::vector<double> w2;
    double b1_end = 0.0;
    double b2_end = 0.0;
    double log_weight = 0.0;
};

void sample_path(const ModelParams& p, const GridSpec& grid, const TiltConfig& tilt,
                 RngStream& rng, BivariatePath& out);
BivariatePath sample_path(const ModelParams& p, const GridSpec& grid,
                          const TiltConfig& tilt, RngStream& rng);

// True when the surplus w - c t crosses above u at any grid point.
bool detect_classical(const std::vector<double>& w, double c, double u, double dt);

// True when w - c t stays above u on h + 1 consecutive grid points.
// h = 0 reduces to the classical detector; h < 0 is always false.
// allow_overhang also accepts a shorter excursion still running at the
// final grid point, crediting clearance that would complete past the
// horizon.
bool detect_parisian(const std::vector<double>& w, double c, double u, double dt,
                     long h, bool allow_overhang = false);

struct RuinOutcome {
    bool classical1 = false;
    bool classical2 = false;
    bool classical_joint = false;
};

// Barrier crossing per coordinate against (u, a u); the joint event is
// the conjunction, crossing times unconstrained.
RuinOutcome detect_classical(const BivariatePath& path, double u, const ModelParams& p);

struct ParisianOutcome {
    bool parisian1 = false;
    bool parisian2 = false;
    bool parisian_joint = false;
    // set when the window S_i / u^2 exceeds the horizon, forcing false
    bool window1_overflow = false;
    bool window2_overflow = false;
};

// Sustained crossing per coordinate: some run of h_i + 1 consecutive
// over-barrier grid points, h_i covering the window S_i / u^2.
ParisianOutcome detect_parisian(const BivariatePath& path, double u,
                                const ModelParams& p, bool allow_overhang = false);

struct RatioEstimate {
    double p_classical = 0.0;
    double p_parisian = 0.0;
    double p_classical_se = 0.0;
    double p_parisian_se = 0.0;
    double ratio = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    long classical_hits = 0;
    long parisian_hits = 0;
    long n_paths = 0;
};

// Importance-sampled estimate of
//   P(both components Parisian-ruined) / P(both classically ruined)
// on one grid. Numerator paths are a subset of denominator paths, which
// the delta-method variance uses. Throws sim_error when no denominator
// hit occurs.
RatioEstimate estimate_conditional_ratio(const ModelParams& p, double u,
                                         const GridSpec& grid, long n_paths,
                                         const TiltConfig& tilt, std::uint64_t seed,
                                         int workers = 1, bool allow_overhang = false);

struct RuinEstimate {
    double p = 0.0;
    double se = 0.0;
    long hits = 0;
};

// Univariate check instrument: P(sup_{[0,1]} (B(s) - c s) > u) on a grid,
// importance sampled with drift tilt_alpha.
RuinEstimate estimate_single_ruin(double c, double u, long n_steps, long n_paths,
                                  std::uint64_t seed, int workers, double tilt_alpha);

struct RuinPair {
    RuinEstimate fine;
    RuinEstimate coarse;
    double diff = 0.0;
    double diff_se = 0.0;
};

// Fine grid plus its even-index subsample from the same noise, giving a
// paired estimate of the resolution bias step for extrapolation.
RuinPair estimate_single_ruin_pair(double c, double u, long n_steps_fine, long n_paths,
                                   std::uint64_t seed, int workers, double tilt_alpha);

} // namespace parisian
