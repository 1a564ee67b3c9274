#include "gapspec/ltverify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gapspec/error.hpp"

namespace gapspec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Maximum of f over [lo, hi]: endpoints, a Chebyshev grid, then golden-section
// refinement around the best grid point.
template <class F>
double maximize(F&& f, double lo, double hi, std::size_t grid) {
    std::vector<double> xs{lo};
    for (double x : interior_grid(lo, hi, grid)) xs.push_back(x);
    xs.push_back(hi);
    std::size_t best = 0;
    std::vector<double> fs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        fs[i] = f(xs[i]);
        if (fs[i] > fs[best]) best = i;
    }
    double top = fs[best];
    if (best == 0 || best + 1 == xs.size()) return top;
    double a = xs[best - 1], b = xs[best + 1];
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 60 && b - a > 1e-15 * (std::abs(a) + std::abs(b) + 1.0); ++it) {
        if (fc > fd) {
            b = d, d = c, fd = fc;
            c = b - r * (b - a), fc = f(c);
        } else {
            a = c, c = d, fc = fd;
            d = a + r * (b - a), fd = f(d);
        }
    }
    return std::max({top, fc, fd});
}

// log of w~(x) dist(x,E)^{1/2} for x in the closed gap `own`.
double log_torus_weighted(const GapSet& set, std::size_t own, double x) {
    double v = -0.5 * (std::log(std::abs(x - set.lo())) + std::log(std::abs(x - set.hi())));
    const auto gaps = set.gaps();
    for (std::size_t j = 0; j < gaps.size(); ++j) {
        const double da = std::abs(x - gaps[j].lo), db = std::abs(x - gaps[j].hi);
        if (j == own)
            v += 0.5 * std::log(std::max(da, db));
        else
            v += 0.5 * std::log(std::max(da, db) / std::min(da, db));
    }
    return v;
}

// Suprema of w~ times the two outer weights; both are attained at the hull ends.
std::pair<double, double> torus_outer(const GapSet& set) {
    const double b0 = set.lo(), a0 = set.hi();
    double left = 0.0, right = 0.0;
    for (const auto& g : set.gaps()) {
        left += 0.5 * std::log((g.hi - b0) / (g.lo - b0));
        right += 0.5 * std::log((a0 - g.lo) / (a0 - g.hi));
    }
    const double tc = std::exp(std::max(left, right));
    return {tc, tc / std::sqrt(a0 - b0)};
}

std::vector<double> outer_offsets(const GapSet& set, std::size_t grid) {
    std::vector<double> d;
    const std::size_t n = std::max<std::size_t>(grid, 8);
    for (std::size_t i = 0; i < n; ++i)
        d.push_back(set.diameter() * std::pow(10.0, -8.0 + 9.0 * static_cast<double>(i) / static_cast<double>(n - 1)));
    return d;
}

void check_p(double p, double lo, double hi, const char* what) {
    if (!(p > lo && p < hi)) throw ValidationError(what);
}

double sum_eig_powers(std::span<const double> eigs, const GapSet& set, double p) {
    double s = 0.0;
    for (double l : eigs) s += std::pow(set.dist(l), p);
    return s;
}

struct Filtered {
    PairedEigenvalues eig;
    std::size_t n;
};

Filtered filtered_eigenvalues(const JacobiCoeffs& jp, const Perturbation& delta, const GapSet& set,
                              const VerifyOptions& opt) {
    if (delta.support() >= opt.n) throw ValidationError("perturbation support must be shorter than the truncation");
    if (jp.size() < 2 * opt.n) throw ValidationError("J' must hold at least 2N sites");
    const JacobiCoeffs j = perturbed(jp.section(2 * opt.n), delta);
    return {gap_eigenvalues_paired(j, set, opt.n, opt.tol), opt.n};
}

template <class G>
void fill_lhs(BoundReport& r, const Filtered& f, G&& g) {
    r.lhs = 0.0;
    r.lhs_2n = 0.0;
    for (double l : f.eig.values) r.lhs += g(l);
    for (double l : f.eig.partner) r.lhs_2n += g(l);
    r.eigenvalues = f.eig.values.size();
}

void truncation_slack(BoundReport& r) {
    const double change = std::abs(r.lhs - r.lhs_2n);
    r.slack = std::max(1e-6, r.rhs > 0.0 ? change / r.rhs : 0.0);
}

void stamp(BoundReport& r, const char* name, const GapSet& set, double p, const VerifyOptions& opt) {
    r.name = name;
    r.set_kind = to_string(set.kind());
    r.p = p;
    r.n = opt.n;
    r.seed = opt.seed;
}

}  // namespace

void finalize(BoundReport& r) {
    if (r.rhs > 0.0)
        r.ratio = r.lhs / r.rhs;
    else
        r.ratio = r.lhs > 0.0 ? kInf : 0.0;
    r.pass = r.ratio <= 1.0 + r.slack;
}

double s_p(std::span<const double> eigs, const GapSet& set, double p) {
    if (!(p >= 0.0)) throw ValidationError("p must be non-negative");
    return sum_eig_powers(eigs, set, p);
}

double power_norm(const Perturbation& delta, double q, double a_weight) {
    double s = 0.0;
    for (double a : delta.delta_a) s += a_weight * std::pow(std::abs(a), q);
    for (double b : delta.delta_b) s += std::pow(std::abs(b), q);
    return s;
}

double kato_rhs(const Perturbation& delta) { return power_norm(delta, 1.0, 4.0); }

double thm1_constant(double p, std::span<const double> c, const GapSet& set) {
    check_p(p, 0.5, 1.0, "the trace-class bound needs 1/2 < p < 1");
    if (c.size() != set.gap_count() + 1) throw ValidationError("need one constant per gap plus the outer gap");
    double inner = 0.0;
    for (std::size_t k = 0; k < set.gap_count(); ++k)
        inner += c[k + 1] * std::pow(0.5 * set.gaps()[k].length(), p - 0.5);
    const double outer = c[0] / ((1.0 - p) * std::pow(set.diameter(), 1.0 - p));
    return p / (2.0 * p - 1.0) * (outer + 2.0 * inner);
}

double thm2_factor(double p) {
    check_p(p, 1.0, kInf, "the Schatten bound needs p > 1");
    return std::pow(2.0, p - 1.5) * std::pow(3.0, p - 1.0) * (2.0 * p - 1.0) / (p - 1.0);
}

double thm2_constant(double p, std::span<const double> c) {
    const double f = thm2_factor(p);
    double s = 0.0;
    for (double v : c) s += v;
    return f * s;
}

double torus_gap_sup(const GapSet& set, std::size_t gap, std::size_t grid) {
    if (gap >= set.gap_count()) throw ValidationError("gap index out of range");
    const Gap& g = set.gaps()[gap];
    auto f = [&](double x) { return log_torus_weighted(set, gap, std::clamp(x, g.lo, g.hi)); };
    return std::exp(maximize(f, g.lo, g.hi, grid));
}

GapConstants fit_gap_constants(const GapSet& set, ConstantSource source, const ReflectionlessMeasure* mu,
                               std::size_t grid) {
    if (grid < 8) throw ValidationError("at least 8 grid points per gap are required");
    GapConstants out;
    out.source = source;
    const std::size_t n = set.gap_count();
    out.trace_class.assign(n + 1, 0.0);
    out.schatten.assign(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const int lev = set.gaps()[k].level;
        if (lev > 0) {
            const double e = set.epsilons()[static_cast<std::size_t>(lev - 1)];
            out.analytic.push_back(std::sqrt(e) * std::log(1.0 / e));
        }
    }
    if (source == ConstantSource::torus) {
        std::tie(out.trace_class[0], out.schatten[0]) = torus_outer(set);
        for (std::size_t k = 0; k < n; ++k)
            out.trace_class[k + 1] = out.schatten[k + 1] = refl_constant(set, k) * torus_gap_sup(set, k, grid);
        return out;
    }
    if (mu == nullptr) throw ValidationError("the measure source needs a reflectionless measure");
    if (!(mu->set() == set)) throw ValidationError("measure and set disagree");
    const double b0 = set.lo(), a0 = set.hi();
    for (double d : outer_offsets(set, grid)) {
        for (double x : {b0 - d, a0 + d}) {
            const double v = cauchy_abs_integral(*mu, x);
            out.trace_class[0] = std::max(out.trace_class[0], v * std::sqrt(std::abs(x - b0) * std::abs(x - a0)));
            out.schatten[0] = std::max(out.schatten[0], v * std::sqrt(d));
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        const Gap& g = set.gaps()[k];
        double best = 0.0;
        for (double x : interior_grid(g.lo, g.hi, grid))
            best = std::max(best, cauchy_abs_integral(*mu, x) * std::sqrt(set.dist(x)));
        out.trace_class[k + 1] = out.schatten[k + 1] = best;
    }
    return out;
}

BoundReport verify_kato_bound(const JacobiCoeffs& jp, const Perturbation& delta, const GapSet& set,
                              const VerifyOptions& opt) {
    BoundReport r;
    stamp(r, "kato", set, 1.0, opt);
    const Filtered f = filtered_eigenvalues(jp, delta, set, opt);
    fill_lhs(r, f, [&](double l) { return set.dist(l); });
    r.constant = 1.0;
    r.rhs = kato_rhs(delta);
    truncation_slack(r);
    finalize(r);
    return r;
}

BoundReport verify_trace_class_bound(const JacobiCoeffs& jp, const Perturbation& delta, double p, const GapSet& set,
                                     std::span<const double> c, const VerifyOptions& opt) {
    BoundReport r;
    stamp(r, "thm1", set, p, opt);
    r.constant = thm1_constant(p, c, set);
    const Filtered f = filtered_eigenvalues(jp, delta, set, opt);
    fill_lhs(r, f, [&](double l) { return std::pow(set.dist(l), p); });
    r.rhs = r.constant * kato_rhs(delta);
    truncation_slack(r);
    finalize(r);
    return r;
}

BoundReport verify_schatten_bound(const JacobiCoeffs& jp, const Perturbation& delta, double p, const GapSet& set,
                                  std::span<const double> c, const VerifyOptions& opt) {
    BoundReport r;
    stamp(r, "thm2", set, p, opt);
    if (c.size() != set.gap_count() + 1) throw ValidationError("need one constant per gap plus the outer gap");
    r.constant = thm2_constant(p, c);
    const Filtered f = filtered_eigenvalues(jp, delta, set, opt);
    fill_lhs(r, f, [&](double l) { return std::pow(set.dist(l), p - 0.5); });
    r.rhs = r.constant * power_norm(delta, p, 4.0);
    truncation_slack(r);
    finalize(r);
    return r;
}

GreenLevelConstants green_level_constants(const GreenFunction& g, std::size_t grid) {
    const GapSet& set = g.set();
    if (set.kind() == SetKind::finite) throw ValidationError("level constants need a constructed set");
    const int levels = set.levels();
    GreenLevelConstants lc;
    lc.g_ratio.assign(static_cast<std::size_t>(levels) + 1, 0.0);
    lc.c.assign(static_cast<std::size_t>(levels) + 1, 0.0);
    lc.multiplicity.assign(static_cast<std::size_t>(levels) + 1, 1.0);
    lc.analytic.assign(static_cast<std::size_t>(levels) + 1, std::exp(-0.5));

    // outer gap: g(x) / sqrt(d) decays both toward the edge limit and at infinity
    const double b0 = set.lo(), a0 = set.hi();
    for (double d : outer_offsets(set, grid))
        for (double x : {b0 - d, a0 + d}) lc.g_ratio[0] = std::max(lc.g_ratio[0], g(x) / std::sqrt(d));
    lc.c[0] = torus_outer(set).second;

    for (int k = 1; k <= levels; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const double e = set.epsilons()[ks - 1];
        lc.analytic[ks] = std::sqrt(e) * std::log(1.0 / e);
        const auto idx = set.gaps_at_level(k);
        lc.multiplicity[ks] = static_cast<double>(idx.size());
        lc.g_ratio[ks] = green_sqrt_bound_check(g, k, grid) * std::sqrt(e);
        for (std::size_t j : idx) lc.c[ks] = std::max(lc.c[ks], refl_constant(set, j) * torus_gap_sup(set, j, grid));
    }
    return lc;
}

double green_bound_constant(const GreenLevelConstants& lc, double p) {
    const double q = 0.5 * (p + 1.0);
    double s = 0.0;
    for (std::size_t k = 0; k < lc.c.size(); ++k) s += lc.multiplicity[k] * std::pow(lc.g_ratio[k], p) * lc.c[k];
    return 4.0 * thm2_factor(q) * s;
}

BoundReport verify_green_bound(const JacobiCoeffs& jp, const Perturbation& delta, double p, const GreenFunction& g,
                               const GreenLevelConstants& lc, const VerifyOptions& opt) {
    BoundReport r;
    const GapSet& set = g.set();
    stamp(r, "green", set, p, opt);
    check_p(p, 1.0, kInf, "the Green-function bound needs p > 1");
    r.constant = green_bound_constant(lc, p);
    const Filtered f = filtered_eigenvalues(jp, delta, set, opt);
    fill_lhs(r, f, [&](double l) { return std::pow(g(l), p); });
    r.rhs = r.constant * power_norm(delta, 0.5 * (p + 1.0), 1.0);
    truncation_slack(r);
    finalize(r);
    return r;
}

BirmanSchwingerResult birman_schwinger_check(const JacobiCoeffs& jp, const Perturbation& delta, double gamma_minus,
                                             double gamma_plus) {
    if (!(gamma_minus < gamma_plus)) throw ValidationError("need gamma_minus < gamma_plus");
    jp.validate();
    if (sturm_count(jp, gamma_minus) != sturm_count(jp, gamma_plus))
        throw DomainError("the interval must avoid the unperturbed spectrum");
    const PerturbationSplit sp = split_perturbation(delta);
    const JacobiCoeffs j = perturbed(jp, delta);
    BirmanSchwingerResult r;
    // strictly inside: below gamma_plus minus at-or-below gamma_minus
    const std::size_t below_plus = sturm_count(j, gamma_plus);
    const std::size_t upto_minus = sturm_count(j, std::nextafter(gamma_minus, kInf));
    r.count = below_plus > upto_minus ? below_plus - upto_minus : 0;
    r.bound = sandwich_trace_norm(jp, sp.d_plus, gamma_minus) + sandwich_trace_norm(jp, sp.d_minus, gamma_plus);
    r.pass = static_cast<double>(r.count) <= r.bound + 1e-10;
    return r;
}

double converse_statistic(const GapSet& set) {
    const double b0 = set.lo();
    double v = -0.5 * std::log(set.diameter());
    for (const auto& g : set.gaps()) v += 0.5 * std::log((g.hi - b0) / (g.lo - b0));
    return std::exp(v);
}

BandCantorEstimate band_cantor_estimate_check(const GapSet& set, int level, std::size_t grid) {
    if (set.kind() == SetKind::finite) throw ValidationError("the estimate needs a constructed set");
    if (level < 0 || level > set.levels()) throw ValidationError("level out of range");
    BandCantorEstimate r;
    r.level = level;
    r.converse = converse_statistic(set);
    if (level == 0) {
        r.fitted = torus_outer(set).first;
        return r;
    }
    const double e = set.epsilons()[static_cast<std::size_t>(level - 1)];
    auto idx = set.gaps_at_level(level);
    // deep Cantor levels: an even sample of gaps, always keeping both ends
    constexpr std::size_t kMaxGaps = 64;
    if (idx.size() > kMaxGaps) {
        std::vector<std::size_t> pick;
        for (std::size_t i = 0; i < kMaxGaps; ++i) pick.push_back(idx[i * (idx.size() - 1) / (kMaxGaps - 1)]);
        idx = std::move(pick);
    }
    for (std::size_t j : idx) r.fitted = std::max(r.fitted, torus_gap_sup(set, j, grid));
    r.fitted /= std::sqrt(e);
    return r;
}

namespace {

std::size_t ctz(std::size_t v) {
    std::size_t n = 0;
    while ((v & 1u) == 0) v >>= 1, ++n;
    return n;
}

double log_factor(double x, const Gap& g, double gamma) {
    return std::log(std::abs(x - gamma)) - 0.5 * (std::log(std::abs(x - g.lo)) + std::log(std::abs(x - g.hi)));
}

}  // namespace

CantorLemmaReport cantor_lemma_products(const GapSet& set, double x, std::span<const double> gamma) {
    if (set.kind() != SetKind::cantor) throw ValidationError("the lemma products need a Cantor set");
    if (gamma.size() != set.gap_count()) throw ValidationError("one gamma per gap is required");
    const Location loc = set.locate(x);
    if (loc.region != Location::Region::in_gap) throw DomainError("x must lie in an inner gap");
    const auto K = static_cast<std::size_t>(set.levels());
    const auto eps = set.epsilons();
    const auto gaps = set.gaps();
    const std::size_t jx = loc.index;
    const std::size_t k = K - ctz(jx + 1);

    CantorLemmaReport r;
    r.level = static_cast<int>(k);
    for (std::size_t j = 0; j < K; ++j) r.c *= 1.0 - eps[j];
    const double c = r.c;

    // final bands [m 2^{K-i}, (m+1) 2^{K-i} - 1] form level-i band m
    auto band_hull = [&](std::size_t i, std::size_t m) {
        const std::size_t w = std::size_t{1} << (K - i);
        return Interval{set.bands()[m * w].lo, set.bands()[(m + 1) * w - 1].hi};
    };
    auto log_band_product = [&](std::size_t i, std::size_t m) {
        const std::size_t w = std::size_t{1} << (K - i);
        double s = 0.0;
        for (std::size_t j = m * w; j + 1 < (m + 1) * w; ++j) s += log_factor(x, gaps[j], gamma[j]);
        return s;
    };
    auto log_r_bound = [&](std::size_t i, double m) {
        double s = 0.0;
        for (std::size_t j = i + 1; j <= K; ++j) {
            double inner = 0.0;
            for (std::size_t n = 1; n <= j - i; ++n) inner += 1.0 / (1.0 + m * std::ldexp(1.0, static_cast<int>(n)));
            s += inner * eps[j - 1];
        }
        return s / c;
    };

    const double tol = 1e-12;
    bool ok = true;
    double log_a = 0.0;
    auto check_r = [&](std::size_t i, std::size_t m) {
        const Interval a = band_hull(i, m);
        const double dist = x < a.lo ? a.lo - x : x - a.hi;
        const double lp = log_band_product(i, m);
        const double lb = log_r_bound(i, std::max(0.0, dist) / set.band_length(static_cast<int>(i)));
        r.r_worst_ratio = std::max(r.r_worst_ratio, std::exp(lp - lb));
        ++r.r_checked;
        if (lp > lb + tol) ok = false;
        return lp;
    };
    for (std::size_t i = 1; i < k; ++i) {
        const std::size_t m = jx >> (K - i);  // B_i; its sibling lies in B_{i-1} \ B_i
        log_a += check_r(i, m ^ 1u);
    }
    {
        const std::size_t m = jx >> (K - k);  // left child of B_{k-1}; x sits just to its right
        check_r(k, m);
        check_r(k, m + 1);
    }

    r.a_product = std::exp(log_a);
    double sa = 0.0;
    for (std::size_t j = 2; j <= K; ++j) sa += static_cast<double>(j - 1) * eps[j - 1];
    r.a_bound = std::exp(2.0 * sa / c);
    if (log_a > 2.0 * sa / c + tol) ok = false;

    // Q: outer factor and the ancestor gaps j_1 .. j_{k-1}
    double log_q = -0.5 * (std::log(std::abs(x - set.lo())) + std::log(std::abs(x - set.hi())));
    for (std::size_t i = 1; i < k; ++i) {
        const std::size_t parent = jx >> (K - i + 1);  // B_{i-1}
        const std::size_t w = std::size_t{1} << (K - i);
        const std::size_t j = (2 * parent + 1) * w - 1;  // gap between its two children
        log_q += log_factor(x, gaps[j], gamma[j]);
    }
    double se = 0.0;
    for (std::size_t i = 1; i <= k; ++i) se += eps[i - 1];
    const double log_qb = 0.5 * std::log(2.0 / set.diameter()) + 2.0 * se / c -
                          0.5 * std::log(set.band_length(static_cast<int>(k)));
    r.q = std::exp(log_q);
    r.q_bound = std::exp(log_qb);
    if (log_q > log_qb + tol) ok = false;
    r.pass = ok;
    return r;
}

}  // namespace gapspec
