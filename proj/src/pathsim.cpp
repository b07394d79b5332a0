#include "parisian/pathsim.hpp"

#include "parisian/analytics.hpp"
#include "parisian/errors.hpp"
#include "parisian/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace parisian {

namespace {

constexpr long kBlockPaths = 8192;

} // namespace

GridSpec make_grid(const ModelParams& p, double u, int m, long floor_steps) {
    if (!(u > 0.0) || !std::isfinite(u)) {
        throw param_error("barrier level u must be positive and finite");
    }
    if (m < 8) {
        throw param_error("grid refinement m must be >= 8");
    }
    if (floor_steps < 1) {
        throw param_error("floor_steps must be >= 1");
    }
    double divisor = 1.0;
    if (p.s1 > 0.0 && p.s2 > 0.0) {
        divisor = std::min(p.s1, p.s2);
    } else if (p.s1 > 0.0) {
        divisor = p.s1;
    } else if (p.s2 > 0.0) {
        divisor = p.s2;
    }
    const double want = std::ceil(static_cast<double>(m) * u * u / divisor);
    const long n = std::max(static_cast<long>(want), floor_steps);
    return GridSpec{n};
}

long window_steps(double window_h, long n_steps) {
    if (window_h < 0.0 || !std::isfinite(window_h)) {
        throw param_error("window length must be nonnegative and finite");
    }
    if (n_steps < 1) {
        throw param_error("n_steps must be >= 1");
    }
    if (window_h == 0.0) {
        return 0;
    }
    const double x = window_h * static_cast<double>(n_steps);
    if (x > static_cast<double>(n_steps) + 1e-9) {
        return -1;
    }
    return static_cast<long>(std::ceil(x - 1e-9));
}

TiltConfig default_tilt(const ModelParams& p, double u, double tol) {
    if (!(u > 0.0) || !std::isfinite(u)) {
        throw param_error("barrier level u must be positive and finite");
    }
    const Regime regime = classify_regime(p, tol);
    const double ts = limit_optimizer_time(p, tol);
    if (!(ts > 0.0)) {
        throw internal_error("limiting optimizer time is not positive");
    }
    OptimizerPoint pick{1.0, ts};
    if (regime == Regime::case_v) {
        // either mirror point is a local optimum; aim at the cheaper one
        const OptimizerPoint mir{ts, 1.0};
        if (quadratic_form(p, u, mir.s, mir.t) <
            quadratic_form(p, u, pick.s, pick.t)) {
            pick = mir;
        }
    }
    const double alpha = u / pick.s + p.c1;
    const double root = std::sqrt(1.0 - p.rho * p.rho);
    double beta =
        (p.a * u + p.c2 * pick.t - p.rho * alpha * pick.t) / (root * pick.t);
    if (regime_is_dominated(regime) && beta < 0.0) {
        // the first component alone already carries the event
        beta = 0.0;
    }
    return TiltConfig{true, alpha, beta};
}

void sample_path(const ModelParams& p, const GridSpec& grid, const TiltConfig& tilt,
                 RngStream& rng, BivariatePath& out) {
    const long n = grid.n_steps;
    const double dt = grid.dt();
    const double sdt = std::sqrt(dt);
    const double rho = p.rho;
    const double root = std::sqrt(1.0 - rho * rho);
    const double add1 = tilt.enabled ? tilt.alpha * dt : 0.0;
    const double add2 = tilt.enabled ? tilt.beta * dt : 0.0;

    out.dt = dt;
    out.w1.resize(static_cast<std::size_t>(n));
    out.w2.resize(static_cast<std::size_t>(n));
    double b1 = 0.0;
    double b2 = 0.0;
    for (long j = 0; j < n; ++j) {
        b1 += rng.normal() * sdt + add1;
        b2 += rng.normal() * sdt + add2;
        out.w1[static_cast<std::size_t>(j)] = b1;
        out.w2[static_cast<std::size_t>(j)] = rho * b1 + root * b2;
    }
    out.b1_end = b1;
    out.b2_end = b2;
    out.log_weight =
        tilt.enabled ? -tilt.alpha * b1 + 0.5 * tilt.alpha * tilt.alpha -
                           tilt.beta * b2 + 0.5 * tilt.beta * tilt.beta
                     : 0.0;
}

BivariatePath sample_path(const ModelParams& p, const GridSpec& grid,
                          const TiltConfig& tilt, RngStream& rng) {
    BivariatePath out;
    sample_path(p, grid, tilt, rng, out);
    return out;
}

bool detect_classical(const std::vector<double>& w, double c, double u, double dt) {
    double thresh = u + c * dt;
    const double step = c * dt;
    for (const double v : w) {
        if (v > thresh) {
            return true;
        }
        thresh += step;
    }
    return false;
}

bool detect_parisian(const std::vector<double>& w, double c, double u, double dt,
                     long h, bool allow_overhang) {
    if (h < 0) {
        return false;
    }
    double thresh = u + c * dt;
    const double step = c * dt;
    long run = 0;
    for (const double v : w) {
        if (v > thresh) {
            if (++run > h) {
                return true;
            }
        } else {
            run = 0;
        }
        thresh += step;
    }
    return allow_overhang && run > 0;
}

RuinOutcome detect_classical(const BivariatePath& path, double u, const ModelParams& p) {
    if (!(u > 0.0) || !std::isfinite(u)) {
        throw param_error("barrier level u must be positive and finite");
    }
    RuinOutcome out;
    out.classical1 = detect_classical(path.w1, p.c1, u, path.dt);
    out.classical2 = detect_classical(path.w2, p.c2, p.a * u, path.dt);
    out.classical_joint = out.classical1 && out.classical2;
    return out;
}

ParisianOutcome detect_parisian(const BivariatePath& path, double u,
                                const ModelParams& p, bool allow_overhang) {
    if (!(u > 0.0) || !std::isfinite(u)) {
        throw param_error("barrier level u must be positive and finite");
    }
    const long n = static_cast<long>(path.w1.size());
    const double uu = u * u;
    const long h1 = window_steps(p.s1 / uu, n);
    const long h2 = window_steps(p.s2 / uu, n);
    ParisianOutcome out;
    out.window1_overflow = h1 < 0;
    out.window2_overflow = h2 < 0;
    out.parisian1 = detect_parisian(path.w1, p.c1, u, path.dt, h1, allow_overhang);
    out.parisian2 = detect_parisian(path.w2, p.c2, p.a * u, path.dt, h2, allow_overhang);
    out.parisian_joint = out.parisian1 && out.parisian2;
    return out;
}

namespace {

// Log-space accumulator: sums are scaled by e^{-m} with m the running
// max log weight, so merging and the final ratio are overflow safe.
struct RatioBlock {
    double m = -std::numeric_limits<double>::infinity();
    double sn = 0.0;
    double sd = 0.0;
    double qn = 0.0;
    double qd = 0.0;
    long nh = 0;
    long dh = 0;

    void rescale_to(double new_m) {
        const double f = std::exp(m - new_m);
        sn *= f;
        sd *= f;
        qn *= f * f;
        qd *= f * f;
        m = new_m;
    }

    void add(double log_w, bool parisian) {
        if (log_w > m) {
            if (dh > 0) {
                rescale_to(log_w);
            } else {
                m = log_w;
            }
        }
        const double e = std::exp(log_w - m);
        sd += e;
        qd += e * e;
        ++dh;
        if (parisian) {
            sn += e;
            qn += e * e;
            ++nh;
        }
    }

    void merge(const RatioBlock& o) {
        if (o.dh == 0) {
            return;
        }
        if (dh == 0) {
            *this = o;
            return;
        }
        RatioBlock other = o;
        const double top = std::max(m, other.m);
        rescale_to(top);
        other.rescale_to(top);
        sn += other.sn;
        sd += other.sd;
        qn += other.qn;
        qd += other.qd;
        nh += other.nh;
        dh += other.dh;
    }
};

} // namespace

RatioEstimate estimate_conditional_ratio(const ModelParams& p, double u,
                                         const GridSpec& grid, long n_paths,
                                         const TiltConfig& tilt, std::uint64_t seed,
                                         int workers, bool allow_overhang) {
    if (!(u > 0.0) || !std::isfinite(u)) {
        throw param_error("barrier level u must be positive and finite");
    }
    if (n_paths < 10000) {
        throw param_error("n_paths must be >= 10000");
    }
    if (grid.n_steps < 1) {
        throw param_error("grid must have at least one step");
    }

    const double uu = u * u;
    const long h1 = window_steps(p.s1 / uu, grid.n_steps);
    const long h2 = window_steps(p.s2 / uu, grid.n_steps);
    const double au = p.a * u;
    const double dt = grid.dt();

    const long n_blocks = (n_paths + kBlockPaths - 1) / kBlockPaths;
    const auto blocks = run_blocks<RatioBlock>(
        static_cast<std::size_t>(n_blocks), workers, [&](std::size_t b) {
            RatioBlock acc;
            BivariatePath path;
            const long lo = static_cast<long>(b) * kBlockPaths;
            const long hi = std::min(n_paths, lo + kBlockPaths);
            for (long i = lo; i < hi; ++i) {
                RngStream rng(seed, static_cast<std::uint64_t>(i));
                sample_path(p, grid, tilt, rng, path);
                const bool cl = detect_classical(path.w1, p.c1, u, dt) &&
                                detect_classical(path.w2, p.c2, au, dt);
                if (!cl) {
                    continue;
                }
                const bool par =
                    detect_parisian(path.w1, p.c1, u, dt, h1, allow_overhang) &&
                    detect_parisian(path.w2, p.c2, au, dt, h2, allow_overhang);
                acc.add(path.log_weight, par);
            }
            return acc;
        });

    RatioBlock total;
    for (const auto& b : blocks) {
        total.merge(b);
    }
    if (total.dh == 0) {
        throw sim_error("no classical ruin event observed; increase n_paths or enable tilting");
    }

    RatioEstimate est;
    est.n_paths = n_paths;
    est.classical_hits = total.dh;
    est.parisian_hits = total.nh;
    const double nd = static_cast<double>(n_paths);
    const double scale = std::exp(total.m);
    est.p_classical = scale * total.sd / nd;
    est.p_parisian = scale * total.sn / nd;
    const double md = total.sd / nd;
    const double mn = total.sn / nd;
    est.p_classical_se =
        scale * std::sqrt(std::max(total.qd / nd - md * md, 0.0) / nd);
    est.p_parisian_se =
        scale * std::sqrt(std::max(total.qn / nd - mn * mn, 0.0) / nd);
    const double r = total.sn / total.sd;
    est.ratio = r;
    // delta method; the cross moment equals qn because the numerator
    // indicator implies the denominator one
    double var = (total.qn * (1.0 - 2.0 * r) + r * r * total.qd) /
                 (total.sd * total.sd);
    var = std::max(var, 0.0);
    const double half = 1.96 * std::sqrt(var);
    est.ci_low = std::max(0.0, r - half);
    est.ci_high = std::min(1.0, r + half);
    return est;
}

namespace {

struct RuinBlock {
    double m = -std::numeric_limits<double>::infinity();
    double sf = 0.0;
    double qf = 0.0;
    double sc = 0.0;
    double qc = 0.0;
    double sdiff = 0.0;
    double qdiff = 0.0;
    long hits_f = 0;
    long hits_c = 0;
    long n = 0;

    void rescale_to(double new_m) {
        const double f = std::exp(m - new_m);
        sf *= f;
        sc *= f;
        sdiff *= f;
        qf *= f * f;
        qc *= f * f;
        qdiff *= f * f;
        m = new_m;
    }

    void add(double log_w, bool hit_fine, bool hit_coarse) {
        if (!hit_fine && !hit_coarse) {
            ++n;
            return;
        }
        if (m == -std::numeric_limits<double>::infinity()) {
            m = log_w;
        } else if (log_w > m) {
            rescale_to(log_w);
        }
        const double e = std::exp(log_w - m);
        if (hit_fine) {
            sf += e;
            qf += e * e;
            ++hits_f;
        }
        if (hit_coarse) {
            sc += e;
            qc += e * e;
            ++hits_c;
        }
        if (hit_fine != hit_coarse) {
            const double d = hit_fine ? e : -e;
            sdiff += d;
            qdiff += e * e;
        }
        ++n;
    }

    void merge(const RuinBlock& o) {
        if (o.hits_f == 0 && o.hits_c == 0) {
            n += o.n;
            return;
        }
        if (hits_f == 0 && hits_c == 0) {
            const long keep = n;
            *this = o;
            n += keep;
            return;
        }
        RuinBlock other = o;
        const double top = std::max(m, other.m);
        rescale_to(top);
        other.rescale_to(top);
        sf += other.sf;
        sc += other.sc;
        sdiff += other.sdiff;
        qf += other.qf;
        qc += other.qc;
        qdiff += other.qdiff;
        hits_f += other.hits_f;
        hits_c += other.hits_c;
        n += other.n;
    }
};

RuinBlock run_single_ruin(double c, double u, long n_steps_fine, bool with_coarse,
                          long n_paths, std::uint64_t seed, int workers,
                          double alpha) {
    if (!(u > 0.0) || !std::isfinite(u)) {
        throw param_error("barrier level u must be positive and finite");
    }
    if (n_paths < 1) {
        throw param_error("n_paths must be >= 1");
    }
    if (n_steps_fine < 1 || (with_coarse && n_steps_fine % 2 != 0)) {
        throw param_error("n_steps must be positive (and even for a paired run)");
    }

    const double dt = 1.0 / static_cast<double>(n_steps_fine);
    const double sdt = std::sqrt(dt);
    const double add = alpha * dt;
    const double half_alpha_sq = 0.5 * alpha * alpha;
    const double step = c * dt;

    const long n_blocks = (n_paths + kBlockPaths - 1) / kBlockPaths;
    const auto blocks = run_blocks<RuinBlock>(
        static_cast<std::size_t>(n_blocks), workers, [&](std::size_t blk) {
            RuinBlock acc;
            const long lo = static_cast<long>(blk) * kBlockPaths;
            const long hi = std::min(n_paths, lo + kBlockPaths);
            for (long i = lo; i < hi; ++i) {
                RngStream rng(seed, static_cast<std::uint64_t>(i));
                double b = 0.0;
                double thresh = u + step;
                bool hit_f = false;
                bool hit_c = false;
                for (long j = 1; j <= n_steps_fine; ++j) {
                    b += rng.normal() * sdt + add;
                    const bool over = b > thresh;
                    hit_f |= over;
                    if (with_coarse && (j & 1L) == 0) {
                        hit_c |= over;
                    }
                    thresh += step;
                }
                const double log_w = -alpha * b + half_alpha_sq;
                acc.add(log_w, hit_f, hit_c);
            }
            return acc;
        });

    RuinBlock total;
    for (const auto& b : blocks) {
        total.merge(b);
    }
    return total;
}

RuinEstimate finish_ruin(double m, double s, double q, long hits, long n_paths) {
    RuinEstimate est;
    est.hits = hits;
    if (hits == 0) {
        return est;
    }
    const double nd = static_cast<double>(n_paths);
    const double mean = s / nd;
    const double var = std::max(q / nd - mean * mean, 0.0) / nd;
    est.p = std::exp(m) * mean;
    est.se = std::exp(m) * std::sqrt(var);
    return est;
}

} // namespace

RuinEstimate estimate_single_ruin(double c, double u, long n_steps, long n_paths,
                                  std::uint64_t seed, int workers, double tilt_alpha) {
    const RuinBlock total =
        run_single_ruin(c, u, n_steps, false, n_paths, seed, workers, tilt_alpha);
    return finish_ruin(total.m, total.sf, total.qf, total.hits_f, n_paths);
}

RuinPair estimate_single_ruin_pair(double c, double u, long n_steps_fine, long n_paths,
                                   std::uint64_t seed, int workers, double tilt_alpha) {
    const RuinBlock total =
        run_single_ruin(c, u, n_steps_fine, true, n_paths, seed, workers, tilt_alpha);
    RuinPair pair;
    pair.fine = finish_ruin(total.m, total.sf, total.qf, total.hits_f, n_paths);
    pair.coarse = finish_ruin(total.m, total.sc, total.qc, total.hits_c, n_paths);
    const double nd = static_cast<double>(n_paths);
    const double mean = total.sdiff / nd;
    const double var = std::max(total.qdiff / nd - mean * mean, 0.0) / nd;
    pair.diff = std::exp(total.m) * mean;
    pair.diff_se = std::exp(total.m) * std::sqrt(var);
    return pair;
}

} // namespace parisian
