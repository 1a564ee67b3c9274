#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gapspec/gapset.hpp"
#include "gapspec/quadrature.hpp"

namespace gapspec {

enum class GammaRule { alpha, beta, midpoint };

// Reflectionless probability measure on a gap set, parametrized by one point
// gamma_j in each closed gap [alpha_j, beta_j]. Its Herglotz function is
//   m(z) = -1/sqrt((z-beta0)(z-alpha0)) * prod_j (z-gamma_j)/sqrt((z-alpha_j)(z-beta_j)).
class ReflectionlessMeasure {
  public:
    ReflectionlessMeasure(GapSet set, std::vector<double> gamma);
    ReflectionlessMeasure(GapSet set, GammaRule rule);

    const GapSet& set() const noexcept { return set_; }
    std::span<const double> gamma() const noexcept { return gamma_; }

  private:
    GapSet set_;
    std::vector<double> gamma_;
};

// Extremal choice gamma~_j in {alpha_j, beta_j} farthest from x; ties go to beta_j.
struct ExtremalConfiguration {
    double x = 0.0;
    std::vector<double> gamma_tilde;
};

ExtremalConfiguration extremal_configuration(const GapSet& set, double x);

// Evaluates products of the normalized factors |t-gamma_j| / sqrt(|t-alpha_j||t-beta_j|)
// and the outer factor 1/sqrt(|t-beta0||t-alpha0|) with running exponent
// renormalization. The "reduced" variants drop the inverse square roots that
// a cosine substitution absorbs.
class ProductKernel {
  public:
    ProductKernel(const GapSet& set, std::span<const double> gamma);

    std::size_t gap_count() const noexcept { return alpha_.size(); }
    double outer_lo() const noexcept { return lo_; }
    double outer_hi() const noexcept { return hi_; }

    // w(t) = |m(t+i0)| at a point that is not an endpoint.
    double full(double t) const;
    // w(t) sqrt((t-lo)(hi-t)) for t in band b = [lo, hi].
    double band_reduced(std::size_t band, double t) const;
    // |product without gap j| for t in gap j, i.e. w(t) sqrt(|t-alpha_j||t-beta_j|) / |t-gamma_j|.
    double gap_reduced(std::size_t gap, double t) const;
    // w(t) sqrt(|t-e|) for t outside the hull, e the nearer hull end.
    double hull_reduced(double t) const;

    std::span<const double> alpha() const noexcept { return alpha_; }
    std::span<const double> beta() const noexcept { return beta_; }
    std::span<const double> gamma() const noexcept { return gamma_; }

  private:
    double lo_, hi_;
    std::vector<double> alpha_, beta_, gamma_;
};

struct MeasureOptions {
    double rtol = 1e-9;
    std::size_t max_nodes = std::size_t{1} << 20;
};

// Boundary value m(z) with z in the closed upper half-plane (conjugate symmetry
// below). Real z must lie outside the set; the result is then real up to
// rounding and Re is the boundary value m(x+i0).
std::complex<double> m_value(const ReflectionlessMeasure& mu, std::complex<double> z);
double m_real(const ReflectionlessMeasure& mu, double x);

// Density w(t)/pi of the measure at t strictly inside a band.
double density(const ReflectionlessMeasure& mu, double t);

// Per-band cosine-substituted quadrature of integral f(t) drho(t).
// `singular_points` are extra locations (outside E) where f is large, used to
// grade the panels.
template <class F>
quad::Result integrate_against(const ReflectionlessMeasure& mu, const ProductKernel& kernel, F&& f,
                               const MeasureOptions& opt, std::span<const double> singular_points = {});

double total_mass(const ReflectionlessMeasure& mu, const MeasureOptions& opt = {});

// integral drho(t) / |t - x| for x at positive distance from the set.
double cauchy_abs_integral(const ReflectionlessMeasure& mu, double x, const MeasureOptions& opt = {});

// w~(x): the extremal product, i.e. sup over reflectionless measures of |m(x)|.
double sup_torus_bound(const GapSet& set, double x);

// 9 + 2 min{log((beta_k-beta0)/(beta_k-alpha_k)), log((alpha0-alpha_k)/(beta_k-alpha_k))}.
double refl_constant(const GapSet& set, std::size_t gap);

struct ReflEstimate {
    std::size_t gap = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double ck = 0.0;
    double ratio = 0.0;
};

ReflEstimate refl_estimate_check(const ReflectionlessMeasure& mu, double x, const MeasureOptions& opt = {});

// Composite discretization of the measure: nodes inside the bands with
// positive weights summing to the total mass. Band b gets at least
// nodes_per_band[b] nodes, more where the density has structure near its ends.
quad::Rule discretize(const ReflectionlessMeasure& mu, std::span<const std::size_t> nodes_per_band);
quad::Rule discretize(const ReflectionlessMeasure& mu, std::size_t nodes_per_band);

// ---------------------------------------------------------------------------

namespace detail {
// Distances from band b's endpoints to the nearest other endpoint.
std::pair<double, double> band_feature_distances(const GapSet& set, std::size_t band);
}  // namespace detail

template <class F>
quad::Result integrate_against(const ReflectionlessMeasure& mu, const ProductKernel& kernel, F&& f,
                               const MeasureOptions& opt, std::span<const double> singular_points) {
    const GapSet& set = mu.set();
    quad::Result total;
    total.converged = true;
    quad::Tolerance tol;
    tol.rtol = opt.rtol;
    tol.max_nodes = opt.max_nodes;
    const double inv_pi = 1.0 / std::numbers::pi;
    for (std::size_t b = 0; b < set.band_count(); ++b) {
        const Interval band = set.bands()[b];
        auto [dlo, dhi] = detail::band_feature_distances(set, b);
        for (double s : singular_points) {
            dlo = std::min(dlo, std::abs(s - band.lo));
            dhi = std::min(dhi, std::abs(s - band.hi));
        }
        const double c = band.center(), r = 0.5 * band.length();
        const auto bp = quad::cosine_breakpoints(r, dlo, dhi);
        auto g = [&](double theta) {
            double t = c + r * std::cos(theta);
            t = std::clamp(t, band.lo, band.hi);
            return kernel.band_reduced(b, t) * f(t);
        };
        quad::Result res = quad::integrate(g, bp, tol);
        total.value += res.value * inv_pi;
        total.error += res.error * inv_pi;
        total.nodes += res.nodes;
        total.converged = total.converged && res.converged;
    }
    return total;
}

}  // namespace gapspec
