#include "parisian/analytics.hpp"

#include "parisian/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace parisian {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kLogSqrt2Pi = 0.9189385332046727;

} // namespace

double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / kSqrt2);
}

double norm_sf(double x) {
    return 0.5 * std::erfc(x / kSqrt2);
}

double norm_pdf(double x) {
    return std::exp(-0.5 * x * x - kLogSqrt2Pi);
}

NormalTriple std_normal(double x) {
    if (!std::isfinite(x)) {
        throw param_error("std_normal requires finite x");
    }
    return NormalTriple{norm_cdf(x), norm_sf(x), norm_pdf(x)};
}

double log_norm_cdf(double x) {
    if (x > -8.0) {
        return std::log(norm_cdf(x));
    }
    // asymptotic expansion of the Mills ratio, relative error < 1e-12 here
    const double z = -x;
    const double zz = z * z;
    const double series = 1.0 - 1.0 / zz + 3.0 / (zz * zz) - 15.0 / (zz * zz * zz);
    return -0.5 * zz - kLogSqrt2Pi - std::log(z) + std::log(series);
}

double single_ruin_prob(double c, double u, double T) {
    if (!std::isfinite(c) || !std::isfinite(u)) {
        throw param_error("single_ruin_prob requires finite c, u");
    }
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw param_error("horizon T must be positive and finite");
    }
    if (u < 0.0) {
        return 1.0;
    }
    const double rt = std::sqrt(T);
    const double p1 = norm_cdf(-u / rt - c * rt);
    // reflection term in log space: e^{-2cu} can overflow for c < 0 alone
    const double p2 = std::exp(-2.0 * c * u + log_norm_cdf(-u / rt + c * rt));
    return std::min(1.0, std::max(0.0, p1 + p2));
}

double quadratic_form(const ModelParams& p, double u, double s, double t) {
    if (!(u > 0.0) || !std::isfinite(u)) {
        throw param_error("barrier level u must be positive and finite");
    }
    if (!(s > 0.0) || s > 1.0 || !(t > 0.0) || t > 1.0) {
        throw param_error("quadratic form requires s, t in (0, 1]");
    }
    const double m = std::min(s, t);
    const double det = s * t - p.rho * p.rho * m * m;
    const double a1 = 1.0 + p.c1 * s / u;
    const double a2 = p.a + p.c2 * t / u;
    return (a1 * a1 * t - 2.0 * p.rho * m * a1 * a2 + a2 * a2 * s) / det;
}

GridMinimum grid_minimize_q(const ModelParams& p, double u, double coarse_step,
                            int refinements) {
    if (!(coarse_step > 0.0) || coarse_step > 0.5) {
        throw param_error("coarse_step must be in (0, 0.5]");
    }
    if (refinements < 0 || refinements > 8) {
        throw param_error("refinements must be in [0, 8]");
    }
    const double rho = p.rho;
    const double rr = rho * rho;
    const auto q_at = [&](double s, double t) {
        const double m = std::min(s, t);
        const double a1 = 1.0 + p.c1 * s / u;
        const double a2 = p.a + p.c2 * t / u;
        return (a1 * a1 * t - 2.0 * rho * m * a1 * a2 + a2 * a2 * s) /
               (s * t - rr * m * m);
    };

    GridMinimum best{1.0, 1.0, q_at(1.0, 1.0)};
    const long n = std::lround(1.0 / coarse_step);
    for (long i = 1; i <= n; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(n);
        for (long j = 1; j <= n; ++j) {
            const double t = static_cast<double>(j) / static_cast<double>(n);
            const double v = q_at(s, t);
            if (v < best.value) {
                best = GridMinimum{s, t, v};
            }
        }
    }

    double step = coarse_step;
    for (int r = 0; r < refinements; ++r) {
        const double fine = step / 10.0;
        const double s_lo = std::max(fine, best.s - step);
        const double s_hi = std::min(1.0, best.s + step);
        const double t_lo = std::max(fine, best.t - step);
        const double t_hi = std::min(1.0, best.t + step);
        for (double s = s_lo; s <= s_hi + 0.5 * fine; s += fine) {
            for (double t = t_lo; t <= t_hi + 0.5 * fine; t += fine) {
                const double v = q_at(std::min(s, 1.0), std::min(t, 1.0));
                if (v < best.value) {
                    best = GridMinimum{std::min(s, 1.0), std::min(t, 1.0), v};
                }
            }
        }
        step = fine;
    }
    return best;
}

DriftConstants c4_drift_constants(double c1, double c2) {
    if (!std::isfinite(c1) || !std::isfinite(c2)) {
        throw param_error("drift constants require finite c1, c2");
    }
    const double g1 = 0.5 * c1 + c2;
    const double g2 = 0.5 * c2 + c1;
    const double e1 = std::exp(-2.0 * g1 * g1 / 3.0) * norm_cdf(g1);
    const double e2 = std::exp(-2.0 * g2 * g2 / 3.0) * norm_cdf(g2);

    DriftConstants d;
    // saturation at 1/2 keeps each prime continuous at its seam and makes
    // the primes sum to c4 in every branch, which the zero-window identity
    // (sustained ruin = instantaneous ruin) requires
    d.c41_prime = (-0.5 * c1 < c2) ? e1 : 0.5;
    d.c42_prime = (-0.5 * c2 < c1) ? e2 : 0.5;
    if (c2 > std::max(-0.5 * c1, -2.0 * c1)) {
        d.c4 = e1 + e2;
    } else if (-0.5 * c1 < c2 && c2 <= -2.0 * c1) {
        d.c4 = e1 + 0.5;
    } else if (-2.0 * c1 < c2 && c2 <= -0.5 * c1) {
        d.c4 = 0.5 + e2;
    } else {
        d.c4 = 1.0;
    }
    return d;
}

namespace {

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
}

} // namespace

std::string constant_key_p(double w1, double w2, double s) {
    return "P(" + fmt_num(w1) + "," + fmt_num(w2) + "," + fmt_num(s) + ")";
}

std::string constant_key_h(double w1, double w2, double s) {
    return "H(" + fmt_num(w1) + "," + fmt_num(w2) + "," + fmt_num(s) + ")";
}

std::string constant_key_r(double s1, double s2) {
    return "R(" + fmt_num(s1) + "," + fmt_num(s2) + ")";
}

std::string constant_key_cp(double s1) {
    return "Cp(" + fmt_num(s1) + ")";
}

std::string ConstantSpec::key() const {
    switch (kind) {
        case Kind::p_const: return constant_key_p(w1, w2, s);
        case Kind::h_const: return constant_key_h(w1, w2, s);
        case Kind::r_const: return constant_key_r(s, s2);
        case Kind::cp_const: return constant_key_cp(s);
    }
    throw internal_error("unknown constant kind");
}

std::vector<ConstantSpec> required_constants(const ModelParams& p, double tol) {
    const Regime regime = classify_regime(p, tol);
    const double a = p.a;
    const double rho = p.rho;
    std::vector<ConstantSpec> specs;

    const auto add_p = [&](double w1, double w2, double s) {
        specs.push_back(ConstantSpec{ConstantSpec::Kind::p_const, w1, w2, s, 0.0});
    };
    const auto add_h = [&](double w1, double w2, double s) {
        specs.push_back(ConstantSpec{ConstantSpec::Kind::h_const, w1, w2, s, 0.0});
    };

    switch (regime) {
        case Regime::dom_a_lt_rho:
        case Regime::dom_a_eq_rho:
            specs.push_back(ConstantSpec{ConstantSpec::Kind::cp_const, 0, 0, p.s1, 0.0});
            break;
        case Regime::case_i:
            specs.push_back(ConstantSpec{ConstantSpec::Kind::r_const, 0, 0, p.s1, p.s2});
            specs.push_back(ConstantSpec{ConstantSpec::Kind::r_const, 0, 0, 0.0, 0.0});
            break;
        case Regime::case_ii: {
            const double w = (1.0 - a * rho) / (1.0 - rho * rho);
            add_p(w, w, p.s1);
            add_h(a, 2.0 * a, p.s2);
            break;
        }
        case Regime::case_iii:
            add_p(2.0, 2.0, p.s1);
            add_h(1.0, 2.0, p.s2);
            add_p(2.0, 2.0, p.s2);
            add_h(1.0, 2.0, p.s1);
            break;
        case Regime::case_iv: {
            const double ts = limit_optimizer_time(p, tol);
            const double w = (1.0 - a * rho) / (1.0 - rho * rho * ts);
            add_p(w, w, p.s1);
            add_h(a / ts, 2.0 * a / ts, p.s2);
            break;
        }
        case Regime::case_v: {
            const double ts = limit_optimizer_time(p, tol);
            const double w = (1.0 - rho) / (1.0 - rho * rho * ts);
            if (p.c1 <= p.c2) {
                add_p(w, w, p.s1);
                add_h(1.0 / ts, 2.0 / ts, p.s2);
            } else {
                add_p(w, w, p.s2);
                add_h(1.0 / ts, 2.0 / ts, p.s1);
            }
            break;
        }
    }

    std::vector<ConstantSpec> unique;
    std::set<std::string> seen;
    for (const auto& s : specs) {
        if (seen.insert(s.key()).second) {
            unique.push_back(s);
        }
    }
    return unique;
}

namespace {

const Estimate& fetch(const LimitConstants& c, const std::string& key) {
    const auto it = c.values.find(key);
    if (it == c.values.end()) {
        throw assembly_error("missing constant: " + key);
    }
    return it->second;
}

// Accumulates d(limit)/d(constant) per key so shared constants propagate once.
struct SensitivityMap {
    std::map<std::string, double> d;
    void add(const std::string& key, double partial) { d[key] += partial; }
    double se(const LimitConstants& c) const {
        double acc = 0.0;
        for (const auto& [key, partial] : d) {
            const double s = partial * fetch(c, key).se;
            acc += s * s;
        }
        return std::sqrt(acc);
    }
};

} // namespace

Estimate theoretical_ratio_limit(const ModelParams& p, const LimitConstants& constants,
                                 double tol) {
    const Regime regime = classify_regime(p, tol);
    const double a = p.a;
    const double rho = p.rho;

    switch (regime) {
        case Regime::dom_a_lt_rho:
        case Regime::dom_a_eq_rho: {
            const auto& cp = fetch(constants, constant_key_cp(p.s1));
            return Estimate{cp.value / 2.0, cp.se / 2.0};
        }
        case Regime::case_i: {
            const std::string num_key = constant_key_r(p.s1, p.s2);
            const std::string den_key = constant_key_r(0.0, 0.0);
            if (num_key == den_key) {
                return Estimate{1.0, 0.0};
            }
            const auto& num = fetch(constants, num_key);
            const auto& den = fetch(constants, den_key);
            const double v = num.value / den.value;
            const double rel = std::hypot(num.se / num.value, den.se / den.value);
            return Estimate{v, std::fabs(v) * rel};
        }
        case Regime::case_ii: {
            const double w = (1.0 - a * rho) / (1.0 - rho * rho);
            const auto& pc = fetch(constants, constant_key_p(w, w, p.s1));
            const auto& hc = fetch(constants, constant_key_h(a, 2.0 * a, p.s2));
            const double pref = (1.0 - a * rho) / (2.0 * a * (1.0 - rho * rho));
            const double v = pref * pc.value * hc.value;
            const double rel = std::hypot(pc.se / pc.value, hc.se / hc.value);
            return Estimate{v, std::fabs(v) * rel};
        }
        case Regime::case_iii: {
            const std::string p1k = constant_key_p(2.0, 2.0, p.s1);
            const std::string h2k = constant_key_h(1.0, 2.0, p.s2);
            const std::string p2k = constant_key_p(2.0, 2.0, p.s2);
            const std::string h1k = constant_key_h(1.0, 2.0, p.s1);
            const double p1 = fetch(constants, p1k).value;
            const double h2 = fetch(constants, h2k).value;
            const double p2 = fetch(constants, p2k).value;
            const double h1 = fetch(constants, h1k).value;
            const DriftConstants d = c4_drift_constants(p.c1, p.c2);
            const double v = (p1 * h2 * d.c41_prime + p2 * h1 * d.c42_prime) / d.c4;
            SensitivityMap sm;
            sm.add(p1k, h2 * d.c41_prime / d.c4);
            sm.add(h2k, p1 * d.c41_prime / d.c4);
            sm.add(p2k, h1 * d.c42_prime / d.c4);
            sm.add(h1k, p2 * d.c42_prime / d.c4);
            return Estimate{v, sm.se(constants)};
        }
        case Regime::case_iv: {
            const double ts = limit_optimizer_time(p, tol);
            const double w = (1.0 - a * rho) / (1.0 - rho * rho * ts);
            const auto& pc = fetch(constants, constant_key_p(w, w, p.s1));
            const auto& hc = fetch(constants, constant_key_h(a / ts, 2.0 * a / ts, p.s2));
            if (std::fabs(rho) <= tol) {
                throw internal_error("case_iv limit reached with rho = 0");
            }
            const double v = -pc.value * hc.value / (2.0 * rho);
            const double rel = std::hypot(pc.se / pc.value, hc.se / hc.value);
            return Estimate{v, std::fabs(v) * rel};
        }
        case Regime::case_v: {
            const double ts = limit_optimizer_time(p, tol);
            const double w = (1.0 - rho) / (1.0 - rho * rho * ts);
            const double sp = p.c1 <= p.c2 ? p.s1 : p.s2;
            const double sh = p.c1 <= p.c2 ? p.s2 : p.s1;
            const auto& pc = fetch(constants, constant_key_p(w, w, sp));
            const auto& hc = fetch(constants, constant_key_h(1.0 / ts, 2.0 / ts, sh));
            if (std::fabs(rho) <= tol) {
                throw internal_error("case_v limit reached with rho = 0");
            }
            const double v = -pc.value * hc.value / (2.0 * rho);
            const double rel = std::hypot(pc.se / pc.value, hc.se / hc.value);
            return Estimate{v, std::fabs(v) * rel};
        }
    }
    throw internal_error("unreachable regime");
}

} // namespace parisian
