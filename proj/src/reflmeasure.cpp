#include "gapspec/reflmeasure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gapspec/error.hpp"

namespace gapspec {

namespace {

std::vector<double> gamma_from_rule(const GapSet& set, GammaRule rule) {
    std::vector<double> g;
    g.reserve(set.gap_count());
    for (const auto& gap : set.gaps()) {
        switch (rule) {
            case GammaRule::alpha: g.push_back(gap.lo); break;
            case GammaRule::beta: g.push_back(gap.hi); break;
            case GammaRule::midpoint: g.push_back(gap.center()); break;
        }
    }
    return g;
}

// Mantissa/exponent accumulator for long products.
struct ScaledProduct {
    double mant = 1.0;
    long exp = 0;
    int pending = 0;

    void mul(double f) {
        mant *= f;
        if (++pending == 16) normalize();
    }
    void normalize() {
        int e = 0;
        mant = std::frexp(mant, &e);
        exp += e;
        pending = 0;
    }
    double value() const {
        int e = 0;
        const double m = std::frexp(mant, &e);
        const long total = exp + e;
        if (total > std::numeric_limits<int>::max()) return std::numeric_limits<double>::infinity();
        if (total < std::numeric_limits<int>::min()) return 0.0;
        return std::ldexp(m, static_cast<int>(total));
    }
};

double arg_upper(std::complex<double> w) {
    // Arguments of upper-half-plane boundary values lie in [0, pi].
    if (w.imag() == 0.0) return w.real() < 0.0 ? std::numbers::pi : 0.0;
    return std::arg(w);
}

void check_finite(std::complex<double> z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw ValidationError("non-finite argument");
}

}  // namespace

ReflectionlessMeasure::ReflectionlessMeasure(GapSet set, std::vector<double> gamma)
    : set_(std::move(set)), gamma_(std::move(gamma)) {
    if (gamma_.size() != set_.gap_count()) throw ValidationError("gamma must have one entry per gap");
    for (std::size_t j = 0; j < gamma_.size(); ++j) {
        const Gap& g = set_.gaps()[j];
        if (!std::isfinite(gamma_[j]) || gamma_[j] < g.lo || gamma_[j] > g.hi)
            throw ValidationError("gamma_j must lie in the closed gap [alpha_j, beta_j]");
    }
}

ReflectionlessMeasure::ReflectionlessMeasure(GapSet set, GammaRule rule)
    : ReflectionlessMeasure(set, gamma_from_rule(set, rule)) {}

ExtremalConfiguration extremal_configuration(const GapSet& set, double x) {
    if (!std::isfinite(x)) throw ValidationError("non-finite argument");
    if (set.contains(x)) throw DomainError("extremal configuration needs x outside the set");
    ExtremalConfiguration c;
    c.x = x;
    c.gamma_tilde.reserve(set.gap_count());
    for (const auto& g : set.gaps()) c.gamma_tilde.push_back(std::abs(x - g.lo) > std::abs(x - g.hi) ? g.lo : g.hi);
    return c;
}

// ---------------------------------------------------------------------------

ProductKernel::ProductKernel(const GapSet& set, std::span<const double> gamma) : lo_(set.lo()), hi_(set.hi()) {
    alpha_.reserve(set.gap_count());
    beta_.reserve(set.gap_count());
    for (const auto& g : set.gaps()) {
        alpha_.push_back(g.lo);
        beta_.push_back(g.hi);
    }
    gamma_.assign(gamma.begin(), gamma.end());
}

namespace {

template <class Skip>
void gap_factors(ScaledProduct& p, double t, const double* a, const double* b, const double* g, std::size_t n,
                 Skip skip) {
    for (std::size_t i = 0; i < n; ++i) {
        if (skip(i)) continue;
        p.mul(std::abs(t - g[i]) / std::sqrt(std::abs(t - a[i]) * std::abs(t - b[i])));
    }
}

}  // namespace

double ProductKernel::full(double t) const {
    ScaledProduct p;
    p.mul(1.0 / std::sqrt(std::abs(t - lo_) * std::abs(t - hi_)));
    gap_factors(p, t, alpha_.data(), beta_.data(), gamma_.data(), alpha_.size(), [](std::size_t) { return false; });
    return p.value();
}

double ProductKernel::band_reduced(std::size_t band, double t) const {
    const std::size_t n = alpha_.size();
    ScaledProduct p;
    if (band != 0) p.mul(1.0 / std::sqrt(t - lo_));
    if (band != n) p.mul(1.0 / std::sqrt(hi_ - t));
    // gap band-1 ends at this band's lo (beta), gap band starts at its hi (alpha)
    if (band != 0) {
        const std::size_t i = band - 1;
        p.mul(std::abs(t - gamma_[i]) / std::sqrt(std::abs(t - alpha_[i])));
    }
    if (band != n) p.mul(std::abs(t - gamma_[band]) / std::sqrt(std::abs(t - beta_[band])));
    gap_factors(p, t, alpha_.data(), beta_.data(), gamma_.data(), n,
                [band](std::size_t i) { return i + 1 == band || i == band; });
    return p.value();
}

double ProductKernel::gap_reduced(std::size_t gap, double t) const {
    ScaledProduct p;
    p.mul(1.0 / std::sqrt(std::abs(t - lo_) * std::abs(t - hi_)));
    gap_factors(p, t, alpha_.data(), beta_.data(), gamma_.data(), alpha_.size(),
                [gap](std::size_t i) { return i == gap; });
    return p.value();
}

double ProductKernel::hull_reduced(double t) const {
    ScaledProduct p;
    p.mul(1.0 / std::sqrt(t > hi_ ? t - lo_ : hi_ - t));
    gap_factors(p, t, alpha_.data(), beta_.data(), gamma_.data(), alpha_.size(), [](std::size_t) { return false; });
    return p.value();
}

// ---------------------------------------------------------------------------

std::complex<double> m_value(const ReflectionlessMeasure& mu, std::complex<double> z) {
    check_finite(z);
    const GapSet& set = mu.set();
    if (z.imag() < 0.0) return std::conj(m_value(mu, std::conj(z)));
    if (z.imag() == 0.0) {
        z = {z.real(), 0.0};  // drop a negative zero
        if (set.contains(z.real())) throw DomainError("real argument lies in the set; use density instead");
    }

    // Factors in order of increasing distance from z; magnitude in log form.
    const auto gaps = set.gaps();
    const auto gamma = mu.gamma();
    std::vector<std::size_t> order(gaps.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(gaps[a].center() - z.real()) < std::abs(gaps[b].center() - z.real());
    });

    const std::complex<double> dlo = z - set.lo(), dhi = z - set.hi();
    double logmag = -0.5 * (std::log(std::abs(dlo)) + std::log(std::abs(dhi)));
    double phase = std::numbers::pi - 0.5 * (arg_upper(dlo) + arg_upper(dhi));
    for (std::size_t j : order) {
        const std::complex<double> dg = z - gamma[j], da = z - gaps[j].lo, db = z - gaps[j].hi;
        const double ag = std::abs(dg);
        if (ag == 0.0) return {0.0, 0.0};
        logmag += std::log(ag / std::sqrt(std::abs(da) * std::abs(db)));
        phase += arg_upper(dg) - 0.5 * (arg_upper(da) + arg_upper(db));
    }
    return std::polar(std::exp(logmag), phase);
}

double m_real(const ReflectionlessMeasure& mu, double x) {
    if (!std::isfinite(x)) throw ValidationError("non-finite argument");
    return m_value(mu, {x, 0.0}).real();
}

double density(const ReflectionlessMeasure& mu, double t) {
    if (!std::isfinite(t)) throw ValidationError("non-finite argument");
    const Location loc = mu.set().locate(t);
    if (!loc.in_set()) throw DomainError("density is only defined inside a band");
    const Interval band = mu.set().bands()[loc.index];
    if (t == band.lo || t == band.hi) throw SingularityError("density is singular at a band endpoint");
    return ProductKernel(mu.set(), mu.gamma()).full(t) / std::numbers::pi;
}

namespace detail {

std::pair<double, double> band_feature_distances(const GapSet& set, std::size_t band) {
    const double inf = std::numeric_limits<double>::infinity();
    const auto gaps = set.gaps();
    const double dlo = band == 0 ? inf : gaps[band - 1].length();
    const double dhi = band == gaps.size() ? inf : gaps[band].length();
    return {dlo, dhi};
}

}  // namespace detail

namespace {

double checked(const quad::Result& r, const char* what) {
    if (!r.converged) throw AccuracyError(what, r.value, r.error);
    return r.value;
}

}  // namespace

double total_mass(const ReflectionlessMeasure& mu, const MeasureOptions& opt) {
    const ProductKernel kernel(mu.set(), mu.gamma());
    return checked(integrate_against(mu, kernel, [](double) { return 1.0; }, opt), "total mass did not converge");
}

double cauchy_abs_integral(const ReflectionlessMeasure& mu, double x, const MeasureOptions& opt) {
    if (!std::isfinite(x)) throw ValidationError("non-finite argument");
    if (mu.set().contains(x)) throw DomainError("x must lie outside the set");
    const ProductKernel kernel(mu.set(), mu.gamma());
    const double s[] = {x};
    return checked(integrate_against(mu, kernel, [x](double t) { return 1.0 / std::abs(t - x); }, opt, s),
                   "Cauchy integral did not converge");
}

double sup_torus_bound(const GapSet& set, double x) {
    if (!std::isfinite(x)) throw ValidationError("non-finite argument");
    if (set.contains(x)) throw DomainError("x must lie in a gap");
    double logv = -0.5 * (std::log(std::abs(x - set.lo())) + std::log(std::abs(x - set.hi())));
    for (const auto& g : set.gaps()) {
        const double da = std::abs(x - g.lo), db = std::abs(x - g.hi);
        logv += 0.5 * std::log(std::max(da, db) / std::min(da, db));
    }
    return std::exp(logv);
}

double refl_constant(const GapSet& set, std::size_t gap) {
    if (gap >= set.gap_count()) throw ValidationError("gap index out of range");
    const Gap& g = set.gaps()[gap];
    const double len = g.length();
    return 9.0 + 2.0 * std::min(std::log((g.hi - set.lo()) / len), std::log((set.hi() - g.lo) / len));
}

ReflEstimate refl_estimate_check(const ReflectionlessMeasure& mu, double x, const MeasureOptions& opt) {
    if (!std::isfinite(x)) throw ValidationError("non-finite argument");
    const Location loc = mu.set().locate(x);
    if (loc.region != Location::Region::in_gap) throw DomainError("the estimate is stated for x in an inner gap");
    ReflEstimate r;
    r.gap = loc.index;
    r.ck = refl_constant(mu.set(), loc.index);
    r.lhs = cauchy_abs_integral(mu, x, opt);
    r.rhs = r.ck * sup_torus_bound(mu.set(), x);
    r.ratio = r.lhs / r.rhs;
    return r;
}

quad::Rule discretize(const ReflectionlessMeasure& mu, std::size_t nodes_per_band) {
    const std::vector<std::size_t> counts(mu.set().band_count(), nodes_per_band);
    return discretize(mu, counts);
}

quad::Rule discretize(const ReflectionlessMeasure& mu, std::span<const std::size_t> nodes_per_band) {
    const GapSet& set = mu.set();
    if (nodes_per_band.size() != set.band_count()) throw ValidationError("one node count per band is required");
    const ProductKernel kernel(set, mu.gamma());
    quad::Rule out;
    quad::Tolerance tol;
    tol.rtol = 1e-13;
    tol.max_nodes = std::size_t{1} << 22;
    const std::size_t per_leaf = 2 * quad::kPanelOrder;
    for (std::size_t b = 0; b < set.band_count(); ++b) {
        const Interval band = set.bands()[b];
        const auto [dlo, dhi] = detail::band_feature_distances(set, b);
        const double c = band.center(), r = 0.5 * band.length();
        const auto coarse = quad::cosine_breakpoints(r, dlo, dhi);
        // split every coarse panel evenly until the node floor is met
        const std::size_t panels = coarse.size() - 1;
        const std::size_t want = (nodes_per_band[b] + per_leaf - 1) / per_leaf;
        const std::size_t split = std::max<std::size_t>(1, (want + panels - 1) / panels);
        std::vector<double> bp;
        for (std::size_t i = 0; i < panels; ++i)
            for (std::size_t s = 0; s < split; ++s)
                bp.push_back(coarse[i] + (coarse[i + 1] - coarse[i]) * static_cast<double>(s) / static_cast<double>(split));
        bp.push_back(coarse.back());

        auto g = [&](double theta) { return kernel.band_reduced(b, std::clamp(c + r * std::cos(theta), band.lo, band.hi)); };
        quad::Rule rule;
        quad::integrate(g, bp, tol, &rule);
        for (std::size_t i = 0; i < rule.x.size(); ++i) {
            const double t = std::clamp(c + r * std::cos(rule.x[i]), band.lo, band.hi);
            out.x.push_back(t);
            out.w.push_back(rule.w[i] * kernel.band_reduced(b, t) / std::numbers::pi);
        }
    }
    return out;
}

}  // namespace gapspec
