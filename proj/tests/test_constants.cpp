#include "parisian/constants.hpp"

#include "parisian/errors.hpp"
#include "parisian/model.hpp"
#include "testkit.hpp"

#include <cmath>
#include <vector>

using namespace parisian;

namespace {

McOptions mc(long n, double delta, std::vector<double> t_ladder,
             std::uint64_t seed) {
    McOptions o;
    o.n_paths = n;
    o.delta = delta;
    o.t_ladder = std::move(t_ladder);
    o.seed = seed;
    return o;
}

void require_ladder_nondecreasing(const ConstantEstimate& est, const char* what) {
    for (std::size_t l = 1; l < est.ladder.size(); ++l) {
        if (!(est.ladder[l].value >= est.ladder[l - 1].value)) {
            testkit::fail(__FILE__, __LINE__,
                          std::string(what) + ": ladder level decreased");
        }
    }
}

} // namespace

TEST_CASE(constants_zero_window_closed_forms) {
    REQUIRE(exact_p_s0(1.0, 1.0) == 2.0, "symmetric case");
    REQUIRE_REL(exact_p_s0(1.0, 1.5), 8.0 / 3.0, 1e-15, "generic case");
    REQUIRE_REL(exact_p_s0(2.0, 1.0), 4.0 / 3.0, 1e-15, "w1 above w2");
    REQUIRE_THROWS(exact_p_s0(1.0, 2.0), param_error, "w2 = 2 w1 diverges");
    REQUIRE_THROWS(exact_p_s0(1.0, 2.5), param_error, "w2 > 2 w1");
    REQUIRE_THROWS(exact_p_s0(0.0, 1.0), param_error, "w1 must be positive");
    REQUIRE(exact_h_s0(1.3) == 1.3, "drift itself");
    REQUIRE_THROWS(exact_h_s0(0.0), param_error, "w1 must be positive");
    REQUIRE(exact_cp_s0() == 2.0, "dominated constant");

    const std::vector<double> lad1 = default_h_ladder(1.0);
    REQUIRE(lad1.size() == 3 && lad1[0] == 1.25 && lad1[1] == 2.5 && lad1[2] == 5.0,
            "unit drift ladder");
    const std::vector<double> lad_small = default_h_ladder(0.25);
    REQUIRE(lad_small[2] == 64.0, "slow mixing clamps at the top");
    const std::vector<double> lad_big = default_h_ladder(2.0);
    REQUIRE(lad_big[2] == 4.0 && lad_big[0] == 1.0, "fast mixing clamps at the floor");
    REQUIRE_THROWS(default_h_ladder(-1.0), param_error, "ladder scale");
}

TEST_CASE(constants_closed_form_dispatch) {
    McOptions opts;
    const ConstantEstimate p = estimate_P(1.0, 1.0, 0.0, opts);
    REQUIRE(p.value == 2.0 && p.closed_form && p.se == 0.0, "P at zero window");
    REQUIRE(p.ladder.empty(), "no ladder for a closed form");
    REQUIRE(p.key == "P(1,1,0)", "key " << p.key);
    const ConstantEstimate h = estimate_H(0.8, 1.6, 0.0, opts);
    REQUIRE(h.value == 0.8 && h.closed_form, "H at zero window");
    const ConstantEstimate cp = estimate_Cp(0.0, opts);
    REQUIRE(cp.value == 2.0 && cp.closed_form, "Cp at zero window");

    // regime requirements route through the same entry points
    const ModelParams dom = ModelParams::validated(0, 0, 0.3, 0.7, 0, 0);
    const auto dom_req = required_constants(dom);
    REQUIRE(dom_req.size() == 1, "dominated regime needs one constant");
    const ConstantEstimate d = estimate_constant(dom_req[0], dom, opts);
    REQUIRE(d.key == "Cp(0)" && d.value == 2.0 && d.closed_form, "dispatch match");

    const ModelParams ci = ModelParams::validated(0, 0, 0.8, 0.1, 0, 0);
    const auto ci_req = required_constants(ci);
    McOptions light = mc(500, 1.0 / 64.0, {2.0, 4.0, 8.0}, 42);
    bool saw_r = false;
    for (const auto& spec : ci_req) {
        const ConstantEstimate e = estimate_constant(spec, ci, light);
        REQUIRE(e.key == spec.key(), "key round trip " << e.key);
        if (e.key.rfind("R(", 0) == 0) {
            saw_r = true;
            REQUIRE(!e.closed_form, "joint functional has no closed form");
            REQUIRE(e.value > 1.0, "joint functional exceeds 1, got " << e.value);
        }
    }
    REQUIRE(saw_r, "joint functional requested");
}

TEST_CASE(constants_p_zero_window_grid_anchor) {
    McOptions opts = mc(20000, 1.0 / 1024.0, {4.0, 8.0, 16.0}, 31415);
    opts.closed_form_s0 = false;
    const ConstantEstimate est = estimate_P(1.0, 1.0, 0.0, opts);
    REQUIRE(!est.closed_form, "grid path taken");
    REQUIRE(est.value > 1.90 && est.value < 2.10,
            "grid estimate brackets the closed form 2: got " << est.value);
    REQUIRE(est.ladder.size() == 3 && est.value == est.ladder.back().value,
            "estimate is the largest horizon");
    require_ladder_nondecreasing(est, "P");

    McOptions raw = opts;
    raw.sup_correction = false;
    const ConstantEstimate plain = estimate_P(1.0, 1.0, 0.0, raw);
    REQUIRE(plain.value < est.value,
            "discretization correction raises the estimate on the same noise");
}

TEST_CASE(constants_cp_zero_window_grid_anchor) {
    McOptions opts = mc(20000, 1.0 / 1024.0, {4.0, 8.0, 16.0}, 31415);
    opts.closed_form_s0 = false;
    const ConstantEstimate est = estimate_Cp(0.0, opts);
    REQUIRE(!est.closed_form, "grid path taken");
    REQUIRE(est.value > 1.92 && est.value < 2.14,
            "grid estimate brackets the closed form 2: got " << est.value);
    require_ladder_nondecreasing(est, "Cp");
}

TEST_CASE(constants_p_window_anchor) {
    const McOptions opts = mc(20000, 1.0 / 256.0, {8.0, 16.0, 32.0}, 31415);
    const ConstantEstimate est = estimate_P(1.0, 1.0, 1.0, opts);
    REQUIRE(est.value > 0.45 && est.value < 0.52,
            "unit window anchor: got " << est.value);
    REQUIRE(est.se > 0.0 && est.se < 0.03, "error estimate sane: " << est.se);
    require_ladder_nondecreasing(est, "P");
}

TEST_CASE(constants_p_monotone_in_window) {
    // common noise and a grid both windows divide: larger windows can
    // only lower the functional, path by path
    McOptions opts = mc(10000, 1.0 / 256.0, {4.0, 8.0, 16.0}, 777);
    opts.closed_form_s0 = false;
    const double v0 = estimate_P(1.0, 1.0, 0.0, opts).value;
    const double v_half = estimate_P(1.0, 1.0, 0.5, opts).value;
    const double v1 = estimate_P(1.0, 1.0, 1.0, opts).value;
    REQUIRE(v0 > v_half && v_half > v1,
            "window monotone: " << v0 << " " << v_half << " " << v1);
    REQUIRE(v0 - v1 > 1.0, "unit window cuts the functional deeply");
}

TEST_CASE(constants_h_fit_structure) {
    McOptions opts = mc(30000, 1.0 / 128.0, {}, 31415);
    opts.h_ladder = {1.25, 2.5, 5.0};
    const ConstantEstimate est = estimate_H(1.0, 2.0, 1.0, opts);
    REQUIRE(est.ladder.size() == 3, "three levels");
    REQUIRE(est.ladder[0].span == 1.25 && est.ladder[1].span == 2.5 &&
                est.ladder[2].span == 5.0,
            "spans cover the requested ranges exactly");
    for (const auto& lvl : est.ladder) {
        REQUIRE(lvl.value > 0.0 && lvl.se > 0.0, "level sanity");
    }
    REQUIRE(est.value > 0.02 && est.value < 0.12,
            "unit window anchor: got " << est.value);

    // the reported value is the intercept of the least squares line in
    // 1/span through the level means
    double xs[3];
    for (int k = 0; k < 3; ++k) {
        xs[k] = 1.0 / est.ladder[static_cast<std::size_t>(k)].span;
    }
    const double xbar = (xs[0] + xs[1] + xs[2]) / 3.0;
    double sxx = 0.0;
    for (const double x : xs) {
        sxx += (x - xbar) * (x - xbar);
    }
    double fit = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double coeff = 1.0 / 3.0 - xbar * (xs[k] - xbar) / sxx;
        fit += coeff * est.ladder[static_cast<std::size_t>(k)].value;
    }
    REQUIRE_REL(est.value, fit, 1e-12, "intercept recomputed from the ladder");
}

TEST_CASE(constants_h_levels_monotone_in_window) {
    McOptions opts = mc(10000, 1.0 / 128.0, {}, 2468);
    opts.h_ladder = {1.25, 2.5, 5.0};
    const ConstantEstimate narrow = estimate_H(1.0, 2.0, 0.5, opts);
    const ConstantEstimate wide = estimate_H(1.0, 2.0, 1.0, opts);
    for (std::size_t l = 0; l < 3; ++l) {
        REQUIRE(narrow.ladder[l].value > wide.ladder[l].value,
                "level " << l << " ordered by window on common noise");
    }
}

TEST_CASE(constants_h_drift_override) {
    REQUIRE_THROWS(estimate_H(1.0, 1.5, 0.5, McOptions{}), param_error,
                   "canonical drift relation enforced");
    McOptions opts = mc(2000, 1.0 / 64.0, {}, 13);
    opts.h_ladder = {2.0, 4.0, 8.0};
    opts.allow_w2_neq_2w1 = true;
    const ConstantEstimate est = estimate_H(1.0, 1.5, 0.5, opts);
    REQUIRE(est.value > 0.0, "override runs");
    REQUIRE(est.key == "H(1,1.5,0.5)", "key " << est.key);
}

TEST_CASE(constants_r_anchor) {
    // independent unit-drift components with unit exponents factor into
    // two zero-window closed forms: 2 * 2 = 4
    const McOptions opts = mc(20000, 1.0 / 256.0, {4.0, 8.0, 16.0}, 31415);
    const ConstantEstimate est = estimate_R(0.0, 0.0, 1.0, 0.0, 1.0, 1.0, opts);
    REQUIRE(est.value > 3.65 && est.value < 4.40,
            "factorized anchor: got " << est.value);
    require_ladder_nondecreasing(est, "R");
    REQUIRE(est.key == "R(0,0)", "key " << est.key);
}

TEST_CASE(constants_r_exchange_symmetry) {
    // at a = 1 the two components are exchangeable, so swapping windows
    // and exponents together is a distributional identity
    const McOptions o1 = mc(10000, 1.0 / 128.0, {4.0, 8.0, 16.0}, 111);
    const McOptions o2 = mc(10000, 1.0 / 128.0, {4.0, 8.0, 16.0}, 222);
    const ConstantEstimate r1 = estimate_R(0.3, 0.7, 1.0, 0.3, 0.8, 0.9, o1);
    const ConstantEstimate r2 = estimate_R(0.7, 0.3, 1.0, 0.3, 0.9, 0.8, o2);
    const double band = 3.0 * std::hypot(r1.se, r2.se);
    REQUIRE_CLOSE(r1.value, r2.value, band,
                  "exchange symmetry within noise, se " << r1.se << "/" << r2.se);
}

TEST_CASE(constants_cp_window_anchor_and_decrease) {
    const McOptions opts = mc(20000, 1.0 / 256.0, {8.0, 16.0, 32.0}, 31415);
    const ConstantEstimate est = estimate_Cp(1.0, opts);
    REQUIRE(est.value > 0.72 && est.value < 0.83,
            "unit window anchor: got " << est.value);
    require_ladder_nondecreasing(est, "Cp");

    // forward noise is drawn before the arm, so runs differing only in
    // the window share a path and the estimates order exactly
    McOptions small = mc(10000, 1.0 / 256.0, {8.0, 16.0, 32.0}, 31415);
    const double c1 = estimate_Cp(1.0, small).value;
    const double c2 = estimate_Cp(2.0, small).value;
    small.closed_form_s0 = false;
    const double c0 = estimate_Cp(0.0, small).value;
    REQUIRE(c0 > c1 && c1 > c2,
            "window widening lowers the constant: " << c0 << " " << c1 << " " << c2);
}

TEST_CASE(constants_survival_integral_matches_mean) {
    McOptions opts = mc(5000, 1.0 / 128.0, {4.0, 8.0, 16.0}, 999);
    opts.keep_samples = true;
    const ConstantEstimate est = estimate_P(1.0, 1.0, 1.0, opts);
    REQUIRE(est.samples.size() == 5000, "one functional sample per path");
    const double rebuilt = survival_weighted_integral(est.samples, 1.0);
    REQUIRE_REL(rebuilt, est.value, 0.02,
                "survival form rebuilds the mean: " << rebuilt << " vs " << est.value);
}

TEST_CASE(constants_worker_invariance) {
    McOptions opts = mc(10000, 1.0 / 128.0, {4.0, 8.0}, 5150);
    const ConstantEstimate one = estimate_P(1.0, 1.0, 0.5, opts);
    opts.workers = 3;
    const ConstantEstimate three = estimate_P(1.0, 1.0, 0.5, opts);
    REQUIRE(one.value == three.value && one.se == three.se,
            "estimate independent of worker count");
    REQUIRE(one.ladder[0].value == three.ladder[0].value, "levels too");
}

TEST_CASE(constants_validation_errors) {
    McOptions opts;
    opts.n_paths = 99;
    REQUIRE_THROWS(estimate_P(1.0, 1.0, 1.0, opts), param_error, "path budget");
    opts.n_paths = 1000;
    opts.workers = 0;
    REQUIRE_THROWS(estimate_P(1.0, 1.0, 1.0, opts), param_error, "workers");
    opts.workers = 1;
    opts.delta = -0.1;
    REQUIRE_THROWS(estimate_P(1.0, 1.0, 1.0, opts), param_error, "delta");
    opts.delta = 0.0;

    REQUIRE_THROWS(estimate_P(1.0, 2.0, 1.0, opts), param_error, "w2 = 2 w1");
    REQUIRE_THROWS(estimate_P(1.0, 1.0, -1.0, opts), param_error, "negative window");
    opts.t_ladder = {8.0, 8.0};
    REQUIRE_THROWS(estimate_P(1.0, 1.0, 1.0, opts), param_error, "flat ladder");
    opts.t_ladder = {8.0, 4.0};
    REQUIRE_THROWS(estimate_P(1.0, 1.0, 1.0, opts), param_error, "decreasing ladder");
    opts.t_ladder.clear();

    REQUIRE_THROWS(estimate_R(0, 0, 1.5, 0.0, 1, 1, opts), param_error, "a > 1");
    REQUIRE_THROWS(estimate_R(0, 0, 1.0, 1.0, 1, 1, opts), param_error, "|rho| = 1");
    REQUIRE_THROWS(estimate_R(0, 0, 0.5, 0.5, 1, 0.5, opts), param_error, "rho = a");
    REQUIRE_THROWS(estimate_R(0, 0, 1.0, 0.0, 2.0, 1, opts), param_error,
                   "first exponent at the boundary");
    REQUIRE_THROWS(estimate_R(0, 0, 0.5, 0.0, 1.0, 1.0, opts), param_error,
                   "second exponent at the boundary");
    REQUIRE_THROWS(estimate_R(0, 0, 1.0, 0.0, -1.0, 1, opts), param_error,
                   "exponents must be positive");
    REQUIRE_THROWS(estimate_Cp(-1.0, opts), param_error, "negative window");

    McOptions warn = mc(200, 1.0 / 32.0, {2.0, 4.0}, 3);
    const ConstantEstimate near = estimate_R(0, 0, 1.0, 0.0, 1.9, 1.0, warn);
    bool flagged = false;
    for (const auto& w : near.warnings) {
        flagged = flagged || w.find("finiteness boundary") != std::string::npos;
    }
    REQUIRE(flagged, "slow convergence warning near the moment boundary");

    REQUIRE_THROWS(estimate_P(1.0, 1.0, 1.0, -8.0, 0.0, 1000, 1), param_error,
                   "positional horizon must be positive");
    const ConstantEstimate pos = estimate_P(1.0, 1.0, 0.0, 8.0, 0.0, 1000, 1);
    REQUIRE(pos.value == 2.0 && pos.closed_form, "positional zero window");

    REQUIRE_THROWS(survival_weighted_integral({}, 1.0), param_error, "no samples");
    REQUIRE_THROWS(survival_weighted_integral({1.0}, 0.0), param_error, "w2 = 0");
    REQUIRE_THROWS(survival_weighted_integral({1.0, 2.0}, 1.0, 1), param_error,
                   "grid too small");
    const std::vector<double> flat(50, 1.7);
    REQUIRE_REL(survival_weighted_integral(flat, 2.0), std::exp(3.4) / 2.0, 1e-13,
                "degenerate sample set integrates exactly");
}
