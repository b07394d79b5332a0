#include "parisian/constants.hpp"

#include "parisian/errors.hpp"
#include "parisian/parallel.hpp"
#include "parisian/rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <utility>

namespace parisian {

namespace {

// grid sup deficit constant: -zeta(1/2)/sqrt(2 pi)
constexpr double kBeta1 = 0.5825971579390107;
constexpr long kBlockPaths = 4096;
constexpr double kInf = std::numeric_limits<double>::infinity();

double auto_delta(double s) {
    return std::max(std::min(s, 1.0) / 32.0, 1.0 / 256.0);
}

void check_common(const McOptions& opts) {
    if (opts.n_paths < 100) {
        throw param_error("n_paths must be >= 100");
    }
    if (opts.workers < 1) {
        throw param_error("workers must be >= 1");
    }
    if (opts.delta < 0.0 || !std::isfinite(opts.delta)) {
        throw param_error("delta must be nonnegative and finite");
    }
}

std::vector<double> checked_ladder(std::vector<double> v, const char* what) {
    if (v.empty()) {
        throw internal_error("empty ladder reached an estimator");
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
            throw param_error(std::string(what) + " ladder entries must be positive and finite");
        }
        if (i > 0 && v[i] <= v[i - 1]) {
            throw param_error(std::string(what) + " ladder must be strictly increasing");
        }
    }
    return v;
}

// Streams v_j = vol B(j delta) - drift j delta and returns, per ladder
// level, the running sup of window minima over starts i <= limits[level].
// The window spans h grid intervals; h = 0 degenerates to the plain
// running sup.
void sample_sup_levels(RngStream& rng, double delta, double drift, double vol,
                       long h, const std::vector<long>& limits,
                       std::deque<std::pair<long, double>>& dq,
                       std::vector<double>& x_out) {
    dq.clear();
    const double sdt = std::sqrt(delta) * vol;
    const double drop = drift * delta;
    const long n_total = limits.back() + h;
    double b = 0.0;
    double best = -kInf;
    std::size_t lvl = 0;
    for (long j = 0; j <= n_total; ++j) {
        if (j > 0) {
            b += rng.normal() * sdt;
            b -= drop;
        }
        const double v = b;
        double wmin;
        long i;
        if (h == 0) {
            i = j;
            wmin = v;
        } else {
            while (!dq.empty() && dq.back().second >= v) {
                dq.pop_back();
            }
            dq.emplace_back(j, v);
            i = j - h;
            if (i < 0) {
                continue;
            }
            if (dq.front().first < i) {
                dq.pop_front();
            }
            wmin = dq.front().second;
        }
        if (wmin > best) {
            best = wmin;
        }
        while (lvl < limits.size() && i == limits[lvl]) {
            x_out[lvl] = best;
            ++lvl;
        }
    }
    for (; lvl < limits.size(); ++lvl) {
        x_out[lvl] = best;
    }
}

// Variant with the field pinned at tau = 0: forward values
// v(k delta) = vol B(k delta) - drift k delta consume the stream first,
// then a driftless arm extends backward to tau = -h delta. Window
// minima over h grid intervals are supped over window right ends
// i <= limits[level]. The forward-first draw order keeps the tau >= 0
// noise and the arm prefix shared across runs differing only in h.
void sample_arm_sup_levels(RngStream& rng, double delta, double drift, double vol,
                           long h, const std::vector<long>& limits,
                           std::vector<double>& field,
                           std::deque<std::pair<long, double>>& dq,
                           std::vector<double>& x_out) {
    dq.clear();
    const double sdt = std::sqrt(delta) * vol;
    const double drop = drift * delta;
    const long nfwd = limits.back();
    field.assign(static_cast<std::size_t>(nfwd + h + 1), 0.0);
    double b = 0.0;
    for (long k = 1; k <= nfwd; ++k) {
        b += rng.normal() * sdt;
        b -= drop;
        field[static_cast<std::size_t>(h + k)] = b;
    }
    b = 0.0;
    for (long k = 1; k <= h; ++k) {
        b -= rng.normal() * sdt;
        field[static_cast<std::size_t>(h - k)] = b;
    }
    double best = -kInf;
    std::size_t lvl = 0;
    for (long m = 0; m <= nfwd + h; ++m) {
        const double v = field[static_cast<std::size_t>(m)];
        while (!dq.empty() && dq.back().second >= v) {
            dq.pop_back();
        }
        dq.emplace_back(m, v);
        const long i = m - h;
        if (i < 0) {
            continue;
        }
        if (dq.front().first < i) {
            dq.pop_front();
        }
        if (dq.front().second > best) {
            best = dq.front().second;
        }
        while (lvl < limits.size() && i == limits[lvl]) {
            x_out[lvl] = best;
            ++lvl;
        }
    }
    for (; lvl < limits.size(); ++lvl) {
        x_out[lvl] = best;
    }
}

// Per-block sums of the scaled level contributions c_l, the
// last-minus-previous level gap, and an optional fitted combination.
struct FieldAccum {
    std::vector<double> sum;
    std::vector<double> sumsq;
    double dsum = 0.0;
    double dsq = 0.0;
    double gsum = 0.0;
    double gsq = 0.0;
    long n = 0;
    std::vector<double> samples;

    void init(std::size_t levels) {
        sum.assign(levels, 0.0);
        sumsq.assign(levels, 0.0);
    }

    void add(const std::vector<double>& c, const double* g) {
        for (std::size_t l = 0; l < c.size(); ++l) {
            sum[l] += c[l];
            sumsq[l] += c[l] * c[l];
        }
        if (c.size() >= 2) {
            const double d = c[c.size() - 1] - c[c.size() - 2];
            dsum += d;
            dsq += d * d;
        }
        if (g != nullptr) {
            gsum += *g;
            gsq += *g * *g;
        }
        ++n;
    }

    void merge(const FieldAccum& o) {
        if (o.n == 0) {
            return;
        }
        if (n == 0) {
            *this = o;
            return;
        }
        for (std::size_t l = 0; l < sum.size(); ++l) {
            sum[l] += o.sum[l];
            sumsq[l] += o.sumsq[l];
        }
        dsum += o.dsum;
        dsq += o.dsq;
        gsum += o.gsum;
        gsq += o.gsq;
        n += o.n;
        samples.insert(samples.end(), o.samples.begin(), o.samples.end());
    }
};

struct LevelStats {
    double mean = 0.0;
    double se = 0.0;
};

LevelStats level_stats(double sum, double sumsq, long n) {
    const double nd = static_cast<double>(n);
    const double mean = sum / nd;
    const double var = std::max(sumsq / nd - mean * mean, 0.0) / nd;
    return LevelStats{mean, std::sqrt(var)};
}

void fill_ladder(ConstantEstimate& est, const std::vector<double>& spans,
                 const FieldAccum& acc) {
    est.ladder.clear();
    for (std::size_t l = 0; l < spans.size(); ++l) {
        const LevelStats st = level_stats(acc.sum[l], acc.sumsq[l], acc.n);
        est.ladder.push_back(LadderLevel{spans[l], st.mean, st.se});
    }
}

void plateau_check(ConstantEstimate& est, const FieldAccum& acc, const char* what) {
    if (est.ladder.size() < 2) {
        return;
    }
    const LevelStats d = level_stats(acc.dsum, acc.dsq, acc.n);
    if (std::fabs(d.mean) > 2.0 * d.se) {
        est.warnings.push_back(std::string(what) +
                               ": no plateau at the largest span, estimate may be biased low; "
                               "extend the ladder");
    }
}

} // namespace

double exact_p_s0(double w1, double w2) {
    if (!(w1 > 0.0) || !(w2 > 0.0) || !(w2 < 2.0 * w1)) {
        throw param_error("closed form requires 0 < w2 < 2 w1");
    }
    return 2.0 * w1 / (w2 * (2.0 * w1 - w2));
}

double exact_h_s0(double w1) {
    if (!(w1 > 0.0)) {
        throw param_error("closed form requires w1 > 0");
    }
    return w1;
}

double exact_cp_s0() {
    return 2.0;
}

std::vector<double> default_h_ladder(double w1) {
    if (!(w1 > 0.0) || !std::isfinite(w1)) {
        throw param_error("ladder scale requires w1 > 0");
    }
    const double top = std::clamp(5.0 / (w1 * w1), 4.0, 64.0);
    return {0.25 * top, 0.5 * top, top};
}

ConstantEstimate estimate_P(double w1, double w2, double s, const McOptions& opts) {
    check_common(opts);
    if (!(w1 > 0.0) || !std::isfinite(w1) || !(w2 > 0.0) || !(w2 < 2.0 * w1)) {
        throw param_error("estimate_P requires 0 < w2 < 2 w1");
    }
    if (s < 0.0 || !std::isfinite(s)) {
        throw param_error("window length must be nonnegative and finite");
    }

    ConstantEstimate est;
    est.key = constant_key_p(w1, w2, s);
    if (s == 0.0 && opts.closed_form_s0) {
        est.value = exact_p_s0(w1, w2);
        est.closed_form = true;
        return est;
    }

    const double delta = opts.delta > 0.0 ? opts.delta : auto_delta(s);
    const std::vector<double> ladder = checked_ladder(
        opts.t_ladder.empty() ? std::vector<double>{8.0, 16.0, 32.0} : opts.t_ladder,
        "horizon");
    const long h = std::lround(s / delta);
    const double corr = (h == 0 && opts.sup_correction) ? kBeta1 * std::sqrt(delta) : 0.0;

    std::vector<long> limits;
    for (const double t : ladder) {
        limits.push_back(std::max<long>(
            0, static_cast<long>(std::floor((t - s) / delta + 1e-9))));
    }
    const std::size_t levels = ladder.size();

    const long n_blocks = (opts.n_paths + kBlockPaths - 1) / kBlockPaths;
    const auto blocks = run_blocks<FieldAccum>(
        static_cast<std::size_t>(n_blocks), opts.workers, [&](std::size_t blk) {
            FieldAccum acc;
            acc.init(levels);
            std::deque<std::pair<long, double>> dq;
            std::vector<double> x(levels);
            std::vector<double> c(levels);
            const long lo = static_cast<long>(blk) * kBlockPaths;
            const long hi = std::min(opts.n_paths, lo + kBlockPaths);
            for (long i = lo; i < hi; ++i) {
                RngStream rng(opts.seed, static_cast<std::uint64_t>(i));
                sample_sup_levels(rng, delta, w1, 1.0, h, limits, dq, x);
                for (std::size_t l = 0; l < levels; ++l) {
                    c[l] = std::exp(w2 * (x[l] + corr)) / w2;
                }
                acc.add(c, nullptr);
                if (opts.keep_samples) {
                    acc.samples.push_back(x[levels - 1] + corr);
                }
            }
            return acc;
        });

    FieldAccum total;
    for (const auto& b : blocks) {
        total.merge(b);
    }

    fill_ladder(est, ladder, total);
    plateau_check(est, total, "P");
    est.value = est.ladder.back().value;
    est.se = est.ladder.back().se;
    est.samples = std::move(total.samples);
    return est;
}

ConstantEstimate estimate_H(double w1, double w2, double s, const McOptions& opts) {
    check_common(opts);
    if (!(w1 > 0.0) || !std::isfinite(w1) || !(w2 > 0.0) || !std::isfinite(w2)) {
        throw param_error("estimate_H requires positive w1, w2");
    }
    const bool canonical = std::fabs(w2 - 2.0 * w1) <= 1e-12 * std::max(1.0, 2.0 * w1);
    if (!canonical && !opts.allow_w2_neq_2w1) {
        throw param_error("estimate_H requires w2 = 2 w1");
    }
    if (s < 0.0 || !std::isfinite(s)) {
        throw param_error("window length must be nonnegative and finite");
    }

    ConstantEstimate est;
    est.key = constant_key_h(w1, w2, s);
    if (s == 0.0 && canonical && opts.closed_form_s0) {
        est.value = exact_h_s0(w1);
        est.closed_form = true;
        return est;
    }

    const double delta = opts.delta > 0.0 ? opts.delta : auto_delta(s);
    const std::vector<double> ladder = checked_ladder(
        opts.h_ladder.empty() ? std::vector<double>{16.0, 32.0, 64.0} : opts.h_ladder,
        "span");
    const long h = std::lround(s / delta);
    const double corr = (h == 0 && opts.sup_correction) ? kBeta1 * std::sqrt(delta) : 0.0;

    std::vector<long> limits;
    std::vector<double> spans;
    for (const double t : ladder) {
        const long lim = std::max<long>(1, std::lround(t / delta));
        limits.push_back(lim);
        // normalize by the span the grid actually covers
        spans.push_back(static_cast<double>(lim) * delta);
    }
    const std::size_t levels = ladder.size();

    // intercept weights of the least squares line in x = 1/span over the
    // last three levels; the level bias is proportional to 1/span
    std::vector<double> coeff(levels, 0.0);
    const bool fit = levels >= 3;
    if (fit) {
        const std::size_t base = levels - 3;
        double xs[3];
        for (int k = 0; k < 3; ++k) {
            xs[k] = 1.0 / spans[base + static_cast<std::size_t>(k)];
        }
        const double xbar = (xs[0] + xs[1] + xs[2]) / 3.0;
        double sxx = 0.0;
        for (const double x : xs) {
            sxx += (x - xbar) * (x - xbar);
        }
        for (int k = 0; k < 3; ++k) {
            coeff[base + static_cast<std::size_t>(k)] =
                1.0 / 3.0 - xbar * (xs[k] - xbar) / sxx;
        }
    }

    const long n_blocks = (opts.n_paths + kBlockPaths - 1) / kBlockPaths;
    const auto blocks = run_blocks<FieldAccum>(
        static_cast<std::size_t>(n_blocks), opts.workers, [&](std::size_t blk) {
            FieldAccum acc;
            acc.init(levels);
            std::deque<std::pair<long, double>> dq;
            std::vector<double> x(levels);
            std::vector<double> c(levels);
            const long lo = static_cast<long>(blk) * kBlockPaths;
            const long hi = std::min(opts.n_paths, lo + kBlockPaths);
            for (long i = lo; i < hi; ++i) {
                RngStream rng(opts.seed, static_cast<std::uint64_t>(i));
                sample_sup_levels(rng, delta, w1, 1.0, h, limits, dq, x);
                double g = 0.0;
                for (std::size_t l = 0; l < levels; ++l) {
                    c[l] = std::exp(w2 * (x[l] + corr)) / (w2 * spans[l]);
                    g += coeff[l] * c[l];
                }
                acc.add(c, fit ? &g : nullptr);
                if (opts.keep_samples) {
                    acc.samples.push_back(x[levels - 1] + corr);
                }
            }
            return acc;
        });

    FieldAccum total;
    for (const auto& b : blocks) {
        total.merge(b);
    }

    fill_ladder(est, spans, total);
    plateau_check(est, total, "H");
    if (fit) {
        const LevelStats g = level_stats(total.gsum, total.gsq, total.n);
        est.value = g.mean;
        est.se = g.se;
    } else {
        est.warnings.push_back("H: fewer than three ladder levels, no bias extrapolation");
        est.value = est.ladder.back().value;
        est.se = est.ladder.back().se;
    }
    est.samples = std::move(total.samples);
    return est;
}

ConstantEstimate estimate_R(double s1, double s2, double a, double rho,
                            double lambda1, double lambda2, const McOptions& opts) {
    check_common(opts);
    if (s1 < 0.0 || s2 < 0.0 || !std::isfinite(s1) || !std::isfinite(s2)) {
        throw param_error("window lengths must be nonnegative and finite");
    }
    if (!(a > 0.0) || a > 1.0 || std::fabs(rho) >= 1.0) {
        throw param_error("joint functional requires a in (0, 1] and |rho| < 1");
    }
    if (rho >= a) {
        throw param_error("joint functional requires rho < a");
    }
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) {
        throw param_error("exponents must be positive");
    }
    if (lambda1 >= 2.0 || lambda2 >= 2.0 * a) {
        throw param_error("joint functional moment is infinite: requires lambda1 < 2 and lambda2 < 2 a");
    }

    ConstantEstimate est;
    est.key = constant_key_r(s1, s2);
    if (lambda1 > 1.8 || lambda2 > 1.8 * a) {
        est.warnings.push_back("R: exponent near the finiteness boundary, convergence is slow");
    }

    const double delta = opts.delta > 0.0 ? opts.delta : auto_delta(std::min(s1, s2));
    const std::vector<double> ladder = checked_ladder(
        opts.t_ladder.empty() ? std::vector<double>{8.0, 16.0, 32.0} : opts.t_ladder,
        "horizon");
    const long h1 = std::lround(s1 / delta);
    const long h2 = std::lround(s2 / delta);
    const double corr1 = (h1 == 0 && opts.sup_correction) ? kBeta1 * std::sqrt(delta) : 0.0;
    const double corr2 = (h2 == 0 && opts.sup_correction) ? kBeta1 * std::sqrt(delta) : 0.0;

    std::vector<long> limits1;
    std::vector<long> limits2;
    for (const double t : ladder) {
        limits1.push_back(std::max<long>(
            0, static_cast<long>(std::floor((t - s1) / delta + 1e-9))));
        limits2.push_back(std::max<long>(
            0, static_cast<long>(std::floor((t - s2) / delta + 1e-9))));
    }
    const std::size_t levels = ladder.size();
    const long n_total = std::max(limits1.back() + h1, limits2.back() + h2);

    const double sdt = std::sqrt(delta);
    const double root = std::sqrt(1.0 - rho * rho);
    const double scale = 1.0 / (lambda1 * lambda2);

    const long n_blocks = (opts.n_paths + kBlockPaths - 1) / kBlockPaths;
    const auto blocks = run_blocks<FieldAccum>(
        static_cast<std::size_t>(n_blocks), opts.workers, [&](std::size_t blk) {
            FieldAccum acc;
            acc.init(levels);
            std::deque<std::pair<long, double>> dq1;
            std::deque<std::pair<long, double>> dq2;
            std::vector<double> x(levels);
            std::vector<double> y(levels);
            std::vector<double> c(levels);
            const long lo = static_cast<long>(blk) * kBlockPaths;
            const long hi = std::min(opts.n_paths, lo + kBlockPaths);
            for (long pi = lo; pi < hi; ++pi) {
                RngStream rng(opts.seed, static_cast<std::uint64_t>(pi));
                dq1.clear();
                dq2.clear();
                double b1 = 0.0;
                double b2 = 0.0;
                double best1 = -kInf;
                double best2 = -kInf;
                std::size_t lvl1 = 0;
                std::size_t lvl2 = 0;
                const long end1 = limits1.back() + h1;
                const long end2 = limits2.back() + h2;
                for (long j = 0; j <= n_total; ++j) {
                    if (j > 0) {
                        b1 += rng.normal() * sdt;
                        b2 += rng.normal() * sdt;
                    }
                    const double t = static_cast<double>(j) * delta;
                    if (j <= end1) {
                        const double v = b1 - t;
                        double wmin;
                        long i;
                        if (h1 == 0) {
                            i = j;
                            wmin = v;
                        } else {
                            while (!dq1.empty() && dq1.back().second >= v) {
                                dq1.pop_back();
                            }
                            dq1.emplace_back(j, v);
                            i = j - h1;
                            if (i >= 0 && dq1.front().first < i) {
                                dq1.pop_front();
                            }
                            wmin = i >= 0 ? dq1.front().second : -kInf;
                        }
                        if (i >= 0) {
                            if (wmin > best1) {
                                best1 = wmin;
                            }
                            while (lvl1 < levels && i == limits1[lvl1]) {
                                x[lvl1] = best1;
                                ++lvl1;
                            }
                        }
                    }
                    if (j <= end2) {
                        const double v = rho * b1 + root * b2 - a * t;
                        double wmin;
                        long i;
                        if (h2 == 0) {
                            i = j;
                            wmin = v;
                        } else {
                            while (!dq2.empty() && dq2.back().second >= v) {
                                dq2.pop_back();
                            }
                            dq2.emplace_back(j, v);
                            i = j - h2;
                            if (i >= 0 && dq2.front().first < i) {
                                dq2.pop_front();
                            }
                            wmin = i >= 0 ? dq2.front().second : -kInf;
                        }
                        if (i >= 0) {
                            if (wmin > best2) {
                                best2 = wmin;
                            }
                            while (lvl2 < levels && i == limits2[lvl2]) {
                                y[lvl2] = best2;
                                ++lvl2;
                            }
                        }
                    }
                }
                for (; lvl1 < levels; ++lvl1) {
                    x[lvl1] = best1;
                }
                for (; lvl2 < levels; ++lvl2) {
                    y[lvl2] = best2;
                }
                for (std::size_t l = 0; l < levels; ++l) {
                    c[l] = std::exp(lambda1 * (x[l] + corr1) + lambda2 * (y[l] + corr2)) *
                           scale;
                }
                acc.add(c, nullptr);
            }
            return acc;
        });

    FieldAccum total;
    for (const auto& b : blocks) {
        total.merge(b);
    }

    fill_ladder(est, ladder, total);
    plateau_check(est, total, "R");
    est.value = est.ladder.back().value;
    est.se = est.ladder.back().se;
    return est;
}

ConstantEstimate estimate_Cp(double s1, const McOptions& opts) {
    check_common(opts);
    if (s1 < 0.0 || !std::isfinite(s1)) {
        throw param_error("window length must be nonnegative and finite");
    }

    ConstantEstimate est;
    est.key = constant_key_cp(s1);
    if (s1 == 0.0 && opts.closed_form_s0) {
        est.value = exact_cp_s0();
        est.closed_form = true;
        return est;
    }

    const double delta = opts.delta > 0.0 ? opts.delta : auto_delta(s1);
    const std::vector<double> ladder = checked_ladder(
        opts.t_ladder.empty() ? std::vector<double>{8.0, 16.0, 32.0} : opts.t_ladder,
        "horizon");
    const long h = std::lround(0.5 * s1 / delta);
    const double vol = std::sqrt(2.0);
    const double corr = (h == 0 && opts.sup_correction) ? kBeta1 * vol * std::sqrt(delta) : 0.0;

    std::vector<long> limits;
    for (const double t : ladder) {
        limits.push_back(std::max<long>(0, std::lround(t / delta)));
    }
    const std::size_t levels = ladder.size();

    const long n_blocks = (opts.n_paths + kBlockPaths - 1) / kBlockPaths;
    const auto blocks = run_blocks<FieldAccum>(
        static_cast<std::size_t>(n_blocks), opts.workers, [&](std::size_t blk) {
            FieldAccum acc;
            acc.init(levels);
            std::deque<std::pair<long, double>> dq;
            std::vector<double> field;
            std::vector<double> x(levels);
            std::vector<double> c(levels);
            const long lo = static_cast<long>(blk) * kBlockPaths;
            const long hi = std::min(opts.n_paths, lo + kBlockPaths);
            for (long i = lo; i < hi; ++i) {
                RngStream rng(opts.seed, static_cast<std::uint64_t>(i));
                sample_arm_sup_levels(rng, delta, 2.0, vol, h, limits, field, dq, x);
                for (std::size_t l = 0; l < levels; ++l) {
                    c[l] = std::exp(x[l] + corr);
                }
                acc.add(c, nullptr);
                if (opts.keep_samples) {
                    acc.samples.push_back(x[levels - 1] + corr);
                }
            }
            return acc;
        });

    FieldAccum total;
    for (const auto& b : blocks) {
        total.merge(b);
    }

    fill_ladder(est, ladder, total);
    plateau_check(est, total, "Cp");
    est.value = est.ladder.back().value;
    est.se = est.ladder.back().se;
    est.samples = std::move(total.samples);
    return est;
}

namespace {

std::vector<double> t_max_ladder(double t_max) {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) {
        throw param_error("t_max must be positive and finite");
    }
    return {0.25 * t_max, 0.5 * t_max, t_max};
}

McOptions positional_options(double delta, long n_paths, std::uint64_t seed) {
    McOptions opts;
    opts.n_paths = n_paths;
    opts.seed = seed;
    opts.delta = delta;
    return opts;
}

} // namespace

ConstantEstimate estimate_P(double w1, double w2, double s, double t_max, double delta,
                            long n_paths, std::uint64_t seed) {
    McOptions opts = positional_options(delta, n_paths, seed);
    opts.t_ladder = t_max_ladder(t_max);
    return estimate_P(w1, w2, s, opts);
}

ConstantEstimate estimate_H(double w1, double w2, double s,
                            const std::vector<double>& delta_schedule, double delta,
                            long n_paths, std::uint64_t seed) {
    McOptions opts = positional_options(delta, n_paths, seed);
    opts.h_ladder = delta_schedule;
    return estimate_H(w1, w2, s, opts);
}

ConstantEstimate estimate_R(double s1, double s2, double a, double rho,
                            double lambda1, double lambda2, double t_max, double delta,
                            long n_paths, std::uint64_t seed) {
    McOptions opts = positional_options(delta, n_paths, seed);
    opts.t_ladder = t_max_ladder(t_max);
    return estimate_R(s1, s2, a, rho, lambda1, lambda2, opts);
}

ConstantEstimate estimate_Cp(double s1, double t_max, double delta, long n_paths,
                             std::uint64_t seed) {
    McOptions opts = positional_options(delta, n_paths, seed);
    opts.t_ladder = t_max_ladder(t_max);
    return estimate_Cp(s1, opts);
}

ConstantEstimate estimate_constant(const ConstantSpec& spec, const ModelParams& p,
                                   const McOptions& opts) {
    ConstantEstimate est;
    switch (spec.kind) {
        case ConstantSpec::Kind::p_const:
            est = estimate_P(spec.w1, spec.w2, spec.s, opts);
            break;
        case ConstantSpec::Kind::h_const: {
            McOptions local = opts;
            if (local.h_ladder.empty()) {
                local.h_ladder = default_h_ladder(spec.w1);
            }
            est = estimate_H(spec.w1, spec.w2, spec.s, local);
            break;
        }
        case ConstantSpec::Kind::r_const: {
            const LocalExponents le = local_exponents(p, BlockRelation::diagonal);
            est = estimate_R(spec.s, spec.s2, p.a, p.rho, le.lambda1, le.lambda2, opts);
            break;
        }
        case ConstantSpec::Kind::cp_const:
            est = estimate_Cp(spec.s, opts);
            break;
    }
    est.key = spec.key();
    return est;
}

double survival_weighted_integral(const std::vector<double>& samples, double w2,
                                  int grid_points) {
    if (samples.empty()) {
        throw param_error("survival integral requires samples");
    }
    if (!(w2 > 0.0) || !std::isfinite(w2)) {
        throw param_error("survival integral requires w2 > 0");
    }
    if (grid_points < 2) {
        throw param_error("grid_points must be >= 2");
    }
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const double xmin = sorted.front();
    const double xmax = sorted.back();
    const double nd = static_cast<double>(sorted.size());
    if (xmax <= xmin) {
        return std::exp(w2 * xmin) / w2;
    }
    const double step = (xmax - xmin) / static_cast<double>(grid_points - 1);
    double integral = 0.0;
    double prev = 0.0;
    for (int k = 0; k < grid_points; ++k) {
        const double x = xmin + step * static_cast<double>(k);
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x);
        const double surv = static_cast<double>(above) / nd;
        const double f = surv * std::exp(w2 * x);
        if (k > 0) {
            integral += 0.5 * (prev + f) * step;
        }
        prev = f;
    }
    return integral + std::exp(w2 * xmin) / w2;
}

} // namespace parisian
