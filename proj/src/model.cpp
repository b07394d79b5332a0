#include "parisian/model.hpp"

#include "parisian/errors.hpp"

#include <cmath>

namespace parisian {

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw param_error(std::string(name) + " must be finite");
    }
}

} // namespace

ModelParams ModelParams::validated(double c1, double c2, double a, double rho,
                                   double s1, double s2) {
    require_finite(c1, "c1");
    require_finite(c2, "c2");
    require_finite(a, "a");
    require_finite(rho, "rho");
    require_finite(s1, "s1");
    require_finite(s2, "s2");
    if (a <= 0.0 || a > 1.0) {
        throw param_error("a must be in (0, 1]; normalize by swapping coordinates first");
    }
    if (rho <= -1.0 || rho >= 1.0) {
        throw param_error("rho must be in (-1, 1)");
    }
    if (s1 < 0.0 || s2 < 0.0) {
        throw param_error("window sizes s1, s2 must be nonnegative");
    }
    ModelParams p;
    p.c1 = c1;
    p.c2 = c2;
    p.a = a;
    p.rho = rho;
    p.s1 = s1;
    p.s2 = s2;
    return p;
}

NormalizedModel normalize_model(double c1, double c2, double a_raw, double rho,
                                double s1, double s2) {
    require_finite(a_raw, "a");
    if (a_raw <= 0.0) {
        throw param_error("barrier ratio a must be positive");
    }
    NormalizedModel n;
    if (a_raw > 1.0) {
        // second barrier higher: exchange coordinates so a <= 1 afterwards
        n.params = ModelParams::validated(c2, c1, 1.0 / a_raw, rho, s2, s1);
        n.swapped = true;
        n.barrier_scale = a_raw;
    } else {
        n.params = ModelParams::validated(c1, c2, a_raw, rho, s1, s2);
    }
    return n;
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::dom_a_lt_rho: return "DOM_A_LT_RHO";
        case Regime::dom_a_eq_rho: return "DOM_A_EQ_RHO";
        case Regime::case_i: return "CASE_I";
        case Regime::case_ii: return "CASE_II";
        case Regime::case_iii: return "CASE_III";
        case Regime::case_iv: return "CASE_IV";
        case Regime::case_v: return "CASE_V";
    }
    return "UNKNOWN";
}

bool regime_is_dominated(Regime r) {
    return r == Regime::dom_a_lt_rho || r == Regime::dom_a_eq_rho;
}

double critical_rho(double a) {
    if (!(a > 0.0) || a > 1.0) {
        throw param_error("critical_rho requires a in (0, 1]");
    }
    return (1.0 - std::sqrt(8.0 * a * a + 1.0)) / (4.0 * a);
}

Regime classify_regime(const ModelParams& p, double tol) {
    if (tol < 0.0 || !std::isfinite(tol)) {
        throw param_error("tolerance must be nonnegative and finite");
    }
    if (std::fabs(p.a - p.rho) <= tol) {
        return Regime::dom_a_eq_rho;
    }
    if (p.a < p.rho) {
        return Regime::dom_a_lt_rho;
    }
    const double crit = critical_rho(p.a);
    const bool a_is_one = std::fabs(p.a - 1.0) <= tol;
    if (p.rho > crit + tol) {
        return Regime::case_i;
    }
    if (std::fabs(p.rho - crit) <= tol) {
        return a_is_one ? Regime::case_iii : Regime::case_ii;
    }
    return a_is_one ? Regime::case_v : Regime::case_iv;
}

double limit_optimizer_time(const ModelParams& p, double tol) {
    switch (classify_regime(p, tol)) {
        case Regime::dom_a_lt_rho:
        case Regime::dom_a_eq_rho:
        case Regime::case_i:
        case Regime::case_ii:
        case Regime::case_iii:
            return 1.0;
        case Regime::case_iv: {
            if (std::fabs(p.rho) <= tol) {
                throw internal_error("case_iv reached with rho = 0");
            }
            return p.a / (p.rho * (2.0 * p.a * p.rho - 1.0));
        }
        case Regime::case_v: {
            if (std::fabs(p.rho) <= tol) {
                throw internal_error("case_v reached with rho = 0");
            }
            return 1.0 / (p.rho * (2.0 * p.rho - 1.0));
        }
    }
    throw internal_error("unreachable regime");
}

namespace {

// Time coordinate of the interior minimizer at barrier level u; the "otherwise"
// branch of the lemma collapses to the corner (1,1).
double interior_time(const ModelParams& p, double u, double cx, double cy) {
    const double den = p.rho * (2.0 * p.a * p.rho - 1.0) + (cx - p.rho * cy) / u;
    if (den <= 0.0) {
        return 1.0;
    }
    const double t = p.a / den;
    return t <= 1.0 ? t : 1.0;
}

} // namespace

std::vector<OptimizerPoint> optimizer_point(const ModelParams& p, double u, double tol) {
    if (!(u > 0.0) || !std::isfinite(u)) {
        throw param_error("barrier level u must be positive and finite");
    }
    const Regime regime = classify_regime(p, tol);
    if (regime_is_dominated(regime)) {
        return {OptimizerPoint{1.0, 1.0}};
    }
    const bool a_is_one = std::fabs(p.a - 1.0) <= tol;
    const bool mirror_pair = a_is_one && p.rho <= -0.5 + tol;
    const double t_fwd = interior_time(p, u, p.c2, p.c1);
    if (mirror_pair) {
        const double t_mir = interior_time(p, u, p.c1, p.c2);
        return {OptimizerPoint{1.0, t_fwd}, OptimizerPoint{t_mir, 1.0}};
    }
    return {OptimizerPoint{1.0, t_fwd}};
}

LocalExponents local_exponents(const ModelParams& p, BlockRelation rel, double tol) {
    const Regime regime = classify_regime(p, tol);
    const double ts = limit_optimizer_time(p, tol);
    const double a = p.a;
    const double rho = p.rho;

    LocalExponents e;
    switch (rel) {
        case BlockRelation::diagonal:
            if (std::fabs(ts - 1.0) > tol) {
                throw param_error("diagonal block relation requires t* = 1");
            }
            e.lambda1 = (1.0 - a * rho) / (ts * (1.0 - rho * rho));
            e.lambda2 = (a - rho) / (ts * (1.0 - rho * rho));
            break;
        case BlockRelation::l_gt_k:
            e.lambda1 = (ts - a * rho) / (ts - rho * rho);
            e.lambda2 = (a - rho) / (ts - rho * rho);
            break;
        case BlockRelation::l_lt_k:
            e.lambda1 = (1.0 - a * rho) / (1.0 - rho * rho * ts);
            e.lambda2 = (a - rho * ts) / (ts * (1.0 - rho * rho * ts));
            break;
    }

    switch (regime) {
        case Regime::case_ii:
        case Regime::case_iii: {
            const double d = 1.0 - rho * rho;
            e.tau1 = (1.0 - a * rho) * (1.0 - a * rho) / (d * d);
            e.tau4 = (rho * rho - 2.0 * a * rho * rho * rho + a * a * rho * rho) / (d * d);
            break;
        }
        case Regime::case_iv:
        case Regime::case_v: {
            if (std::fabs(rho) <= tol) {
                throw internal_error("taylor coefficients reached with rho = 0");
            }
            const double g = 1.0 - 2.0 * a * rho;
            e.tau1 = g * g;
            e.tau4 = -rho * rho * rho * g * g * g * g / (a * (1.0 - a * rho));
            break;
        }
        default:
            break;
    }
    return e;
}

} // namespace parisian
