#include "gapspec/potential.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "gapspec/error.hpp"

namespace gapspec {

namespace {

// Lengths of the bands adjacent to gap j: the nearest singular points of the
// reduced integrand beyond the gap's own endpoints.
std::pair<double, double> neighbour_band_lengths(const GapSet& set, std::size_t j) {
    return {set.bands()[j].length(), set.bands()[j + 1].length()};
}

struct GapGeometry {
    double c, r;
};

GapGeometry geometry(const Gap& g) { return {g.center(), 0.5 * g.length()}; }

double gap_point(const Gap& g, const GapGeometry& q, double theta) {
    return std::clamp(q.c + q.r * std::cos(theta), g.lo, g.hi);
}

// Composite rule in theta for gap j, adapted to the reduced weight at gamma.
quad::Rule gap_rule(const GapSet& set, const ProductKernel& kernel, std::size_t j, double rtol) {
    const Gap& g = set.gaps()[j];
    const GapGeometry q = geometry(g);
    const auto [dlo, dhi] = neighbour_band_lengths(set, j);
    const auto bp = quad::cosine_breakpoints(q.r, dlo, dhi);
    quad::Tolerance tol;
    tol.rtol = rtol;
    quad::Rule rule;
    quad::integrate([&](double th) { return kernel.gap_reduced(j, gap_point(g, q, th)); }, bp, tol, &rule);
    for (auto& th : rule.x) th = gap_point(g, q, th);  // store t instead of theta
    return rule;
}

struct Periods {
    std::vector<double> scaled;  // P_j / (B_j g_j)
    std::vector<double> weight;  // B_j
};

Periods periods_on_rules(const GapSet& set, std::span<const double> gamma, const std::vector<quad::Rule>& rules) {
    const ProductKernel kernel(set, gamma);
    const std::size_t n = set.gap_count();
    Periods p{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t j = 0; j < n; ++j) {
        double B = 0.0, P = 0.0;
        const auto& rule = rules[j];
        for (std::size_t i = 0; i < rule.x.size(); ++i) {
            const double h = rule.w[i] * kernel.gap_reduced(j, rule.x[i]);
            B += h;
            P += (rule.x[i] - gamma[j]) * h;
        }
        p.weight[j] = B;
        p.scaled[j] = P / (B * set.gaps()[j].length());
    }
    return p;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

bool strictly_inside(const GapSet& set, std::span<const double> gamma) {
    for (std::size_t j = 0; j < gamma.size(); ++j)
        if (!(gamma[j] > set.gaps()[j].lo && gamma[j] < set.gaps()[j].hi)) return false;
    return true;
}

std::vector<double> adaptive_residuals(const GapSet& set, std::span<const double> gamma, double rtol) {
    std::vector<double> r(set.gap_count());
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = scaled_gap_period(set, gamma, j, rtol);
    return r;
}

// Damped Newton on the frozen rules. Returns true when the frozen-rule
// residual drops below tol.
bool newton(const GapSet& set, std::vector<double>& gamma, const std::vector<quad::Rule>& rules,
            const EquilibriumOptions& opt, int& iterations) {
    const std::size_t n = set.gap_count();
    Periods cur = periods_on_rules(set, gamma, rules);
    double res = max_abs(cur.scaled);
    for (; iterations < opt.max_iterations; ++iterations) {
        if (res < 1e-2 * opt.tol) return true;
        // Jacobian of the scaled periods; row j is divided by B_j g_j.
        const ProductKernel kernel(set, gamma);
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        Eigen::VectorXd F(static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j) {
            const auto& rule = rules[j];
            const double scale = 1.0 / (cur.weight[j] * set.gaps()[j].length());
            const auto row = static_cast<Eigen::Index>(j);
            for (std::size_t q = 0; q < rule.x.size(); ++q) {
                const double t = rule.x[q];
                const double h = rule.w[q] * kernel.gap_reduced(j, t) * (t - gamma[j]) * scale;
                for (std::size_t i = 0; i < n; ++i)
                    if (i != j) J(row, static_cast<Eigen::Index>(i)) -= h / (t - gamma[i]);
            }
            J(row, row) = -cur.weight[j] * scale;
            F(row) = cur.scaled[j];
        }
        const Eigen::VectorXd step = J.partialPivLu().solve(-F);
        if (!step.allFinite()) return false;

        double lambda = 1.0;
        bool accepted = false;
        std::vector<double> trial(n);
        for (int halving = 0; halving <= 20; ++halving, lambda *= 0.5) {
            for (std::size_t j = 0; j < n; ++j) trial[j] = gamma[j] + lambda * step(static_cast<Eigen::Index>(j));
            if (!strictly_inside(set, trial)) continue;
            Periods next = periods_on_rules(set, trial, rules);
            const double r = max_abs(next.scaled);
            if (r < res || r < 1e-2 * opt.tol) {
                double rel_step = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    rel_step = std::max(rel_step, std::abs(trial[j] - gamma[j]) / set.gaps()[j].length());
                gamma = trial;
                cur = std::move(next);
                res = r;
                accepted = true;
                if (res < opt.tol && rel_step < 1e-12) {
                    ++iterations;
                    return true;
                }
                break;
            }
        }
        if (!accepted) return res < opt.tol;
    }
    return res < opt.tol;
}

// Each scaled period is affine in its own gamma_j, so the per-gap update is exact.
bool gauss_seidel(const GapSet& set, std::vector<double>& gamma, const EquilibriumOptions& opt, int& iterations) {
    const std::size_t n = set.gap_count();
    const int sweeps = std::max(200, 10 * opt.max_iterations);
    for (int s = 0; s < sweeps; ++s, ++iterations) {
        double change = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double r = scaled_gap_period(set, gamma, j, opt.quad_rtol);
            const Gap& g = set.gaps()[j];
            const double next = std::clamp(gamma[j] + r * g.length(), g.lo, g.hi);
            change = std::max(change, std::abs(next - gamma[j]) / g.length());
            gamma[j] = next;
        }
        if (change < 1e-2 * opt.tol) return true;
    }
    return false;
}

}  // namespace

double scaled_gap_period(const GapSet& set, std::span<const double> gamma, std::size_t j, double rtol) {
    if (j >= set.gap_count()) throw ValidationError("gap index out of range");
    if (gamma.size() != set.gap_count()) throw ValidationError("gamma must have one entry per gap");
    const ProductKernel kernel(set, gamma);
    const quad::Rule rule = gap_rule(set, kernel, j, rtol);
    double B = 0.0, P = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
        const double h = rule.w[i] * kernel.gap_reduced(j, rule.x[i]);
        B += h;
        P += (rule.x[i] - gamma[j]) * h;
    }
    return P / (B * set.gaps()[j].length());
}

EquilibriumMeasure solve_equilibrium(const GapSet& set, const EquilibriumOptions& opt) {
    const std::size_t n = set.gap_count();
    if (n > opt.gap_cap) throw ResourceError("gap count exceeds the equilibrium solver cap");
    if (n == 0) return {ReflectionlessMeasure(set, std::vector<double>{}), {}, 0, "none"};

    std::vector<double> gamma(n);
    for (std::size_t j = 0; j < n; ++j) gamma[j] = set.gaps()[j].center();

    int iterations = 0;
    std::vector<double> residuals;
    for (int round = 0; round < 3; ++round) {
        const ProductKernel kernel(set, gamma);
        std::vector<quad::Rule> rules(n);
        for (std::size_t j = 0; j < n; ++j) rules[j] = gap_rule(set, kernel, j, opt.quad_rtol);
        const bool ok = newton(set, gamma, rules, opt, iterations);
        residuals = adaptive_residuals(set, gamma, opt.quad_rtol);
        if (ok && max_abs(residuals) < opt.tol) return {ReflectionlessMeasure(set, gamma), residuals, iterations, "newton"};
        if (!ok) break;
    }

    for (std::size_t j = 0; j < n; ++j) gamma[j] = set.gaps()[j].center();
    gauss_seidel(set, gamma, opt, iterations);
    residuals = adaptive_residuals(set, gamma, opt.quad_rtol);
    if (max_abs(residuals) < opt.tol && strictly_inside(set, gamma))
        return {ReflectionlessMeasure(set, gamma), residuals, iterations, "gauss-seidel"};
    throw SolverError("equilibrium gap periods did not converge", residuals);
}

// ---------------------------------------------------------------------------

double green_value(const EquilibriumMeasure& eq, double x, double rtol) {
    if (!std::isfinite(x)) throw ValidationError("non-finite argument");
    const GapSet& set = eq.measure.set();
    const Location loc = set.locate(x);
    if (loc.in_set()) return 0.0;
    const ProductKernel kernel(set, eq.measure.gamma());
    quad::Tolerance tol;
    tol.rtol = rtol;
    tol.atol = 1e-16;  // g vanishes at the band edges; relative accuracy alone stalls at rounding level

    quad::Result res;
    if (loc.outside_hull()) {
        // t = e + s^2 (right) or e - s^2 (left) absorbs 1/sqrt|t - e|.
        const bool right = loc.region == Location::Region::right;
        const double e = right ? set.hi() : set.lo();
        const double delta = right ? set.bands().back().length() : set.bands().front().length();
        const auto bp = quad::sqrt_breakpoints(std::sqrt(std::abs(x - e)), delta);
        res = quad::integrate(
            [&](double s) {
                const double t = right ? e + s * s : e - s * s;
                return 2.0 * kernel.hull_reduced(t);
            },
            bp, tol);
    } else {
        // Inside gap j, t = c + r cos(theta) absorbs both edge square roots.
        const std::size_t j = loc.index;
        const Gap& g = set.gaps()[j];
        const GapGeometry q = geometry(g);
        const double gj = eq.measure.gamma()[j];
        const double tx = std::acos(std::clamp((x - q.c) / q.r, -1.0, 1.0));
        // theta = pi is alpha_j; integrate from the edge on x's side of gamma_j
        const double a = x <= gj ? tx : 0.0, b = x <= gj ? std::numbers::pi : tx;
        const auto [dlo, dhi] = neighbour_band_lengths(set, j);
        std::vector<double> bp{a, b};
        for (double p : quad::cosine_breakpoints(q.r, dlo, dhi))
            if (p > a && p < b) bp.push_back(p);
        std::sort(bp.begin(), bp.end());
        res = quad::integrate(
            [&](double th) {
                // offset from gamma_j formed before adding the center: tiny gaps lose no digits
                const double off = (q.c - gj) + q.r * std::cos(th);
                return std::abs(off) * kernel.gap_reduced(j, gap_point(g, q, th));
            },
            bp, tol);
    }
    if (!res.converged) throw AccuracyError("Green function quadrature did not converge", res.value, res.error);
    return res.value;
}

RobinCapacity robin_capacity(const EquilibriumMeasure& eq, double z0) {
    if (!std::isfinite(z0)) throw ValidationError("non-finite anchor");
    const GapSet& set = eq.measure.set();
    if (set.contains(z0)) throw DomainError("anchor lies in the set");
    if (!(z0 > set.hi())) throw DomainError("anchor must lie to the right of the set");
    const ProductKernel kernel(set, eq.measure.gamma());
    MeasureOptions mo;
    mo.rtol = 1e-13;
    const double s[] = {z0};
    const quad::Result lg =
        integrate_against(eq.measure, kernel, [z0](double t) { return std::log(std::abs(z0 - t)); }, mo, s);
    if (!lg.converged) throw AccuracyError("logarithmic potential did not converge", lg.value, lg.error);
    RobinCapacity rc;
    rc.robin_constant = green_value(eq, z0) - lg.value;
    rc.capacity = std::exp(-rc.robin_constant);
    return rc;
}

GreenFunction::GreenFunction(EquilibriumMeasure eq) : eq_(std::move(eq)) {
    const double hi = eq_.measure.set().hi();
    rc_ = robin_capacity(eq_, hi + 1.0);
    for (double d : {2.0, 5.0})
        spread_ = std::max(spread_, std::abs(robin_capacity(eq_, hi + d).robin_constant - rc_.robin_constant));
}

std::vector<double> interior_grid(double lo, double hi, std::size_t n) {
    std::vector<double> x(n);
    const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = c - r * std::cos((2.0 * static_cast<double>(i) + 1.0) * std::numbers::pi / (2.0 * static_cast<double>(n)));
    return x;
}

double green_sqrt_bound_check(const GreenFunction& g, int level, std::size_t grid) {
    const GapSet& set = g.set();
    if (set.kind() == SetKind::finite || level < 1 || level > set.levels())
        throw ValidationError("level does not exist for this set");
    const double eps = set.epsilons()[static_cast<std::size_t>(level - 1)];
    double best = 0.0;
    for (std::size_t j : set.gaps_at_level(level)) {
        const Gap& gap = set.gaps()[j];
        for (double x : interior_grid(gap.lo, gap.hi, grid))
            best = std::max(best, g(x) / (std::sqrt(eps) * std::sqrt(set.dist(x))));
    }
    return best;
}

}  // namespace gapspec
