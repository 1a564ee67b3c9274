#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <vector>

namespace gapspec::quad {

struct Tolerance {
    double rtol = 1e-9;
    double atol = 0.0;
    std::size_t max_nodes = std::size_t{1} << 20;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    std::size_t nodes = 0;
    bool converged = false;
};

// Composite rule: nodes and weights, usable as a discretized measure.
struct Rule {
    std::vector<double> x;
    std::vector<double> w;
};

// n-point Gauss-Legendre rule on [-1, 1]; cached per n.
const Rule& gauss_legendre(std::size_t n);

inline constexpr std::size_t kPanelOrder = 16;

// Breakpoints on [0, pi] for the cosine-substituted variable of an interval
// of half-width r whose endpoints sit at distance delta_lo / delta_hi from
// the nearest other singular point. Panels are graded geometrically toward
// an end down to the angular scale sqrt(2 delta / r) of the nearby feature.
std::vector<double> cosine_breakpoints(double r, double delta_lo, double delta_hi);

// Breakpoints on [0, s_max] for the substitution t = e + s^2 that removes an
// inverse square root at e; graded toward s = 0 down to sqrt(delta).
std::vector<double> sqrt_breakpoints(double s_max, double delta);

// Globally adaptive composite Gauss-Legendre. Each panel is compared against
// the sum over its two halves; the panel with the largest discrepancy is
// halved until the summed discrepancy drops below max(atol, rtol |I|) or the
// node budget is exhausted. The returned rule (when requested) holds the
// half-panel nodes of the final partition.
template <class F>
Result integrate(F&& f, std::span<const double> breakpoints, const Tolerance& tol, Rule* rule_out = nullptr) {
    const Rule& gl = gauss_legendre(kPanelOrder);
    auto panel = [&](double a, double b) {
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double s = 0.0;
        for (std::size_t i = 0; i < gl.x.size(); ++i) s += gl.w[i] * f(c + h * gl.x[i]);
        return s * h;
    };
    struct Panel {
        double a, b, left, right, err;
        bool operator<(const Panel& o) const { return err < o.err; }
    };
    auto make = [&](double a, double b, double whole) {
        const double m = 0.5 * (a + b);
        Panel p{a, b, panel(a, m), panel(m, b), 0.0};
        p.err = std::abs(whole - (p.left + p.right));
        // discrepancies at rounding level carry no information
        if (p.err <= 50.0 * std::numeric_limits<double>::epsilon() * (std::abs(p.left) + std::abs(p.right))) p.err = 0.0;
        return p;
    };

    std::priority_queue<Panel> heap;
    std::size_t nodes = 0;
    double total = 0.0, err = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const double a = breakpoints[i], b = breakpoints[i + 1];
        if (!(b > a)) continue;
        Panel p = make(a, b, panel(a, b));
        nodes += 3 * kPanelOrder;
        total += p.left + p.right;
        err += p.err;
        heap.push(p);
    }
    auto done = [&] { return err <= std::max(tol.atol, tol.rtol * std::abs(total)); };
    while (!heap.empty() && !done() && nodes + 4 * kPanelOrder <= tol.max_nodes) {
        Panel p = heap.top();
        heap.pop();
        const double m = 0.5 * (p.a + p.b);
        Panel l = make(p.a, m, p.left);
        Panel r = make(m, p.b, p.right);
        nodes += 4 * kPanelOrder;
        total += (l.left + l.right + r.left + r.right) - (p.left + p.right);
        err += l.err + r.err - p.err;
        // guard against drift of the running error sum
        if (err < 0.0) err = 0.0;
        heap.push(l);
        heap.push(r);
    }
    Result res;
    res.converged = done();
    res.nodes = nodes;
    // Re-sum the leaves to remove running-sum rounding.
    double value = 0.0, e = 0.0;
    std::vector<Panel> leaves;
    leaves.reserve(heap.size());
    while (!heap.empty()) {
        leaves.push_back(heap.top());
        heap.pop();
    }
    std::sort(leaves.begin(), leaves.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    for (const auto& p : leaves) {
        value += p.left + p.right;
        e += p.err;
    }
    res.value = value;
    res.error = e;
    if (rule_out) {
        rule_out->x.clear();
        rule_out->w.clear();
        for (const auto& p : leaves) {
            const double m = 0.5 * (p.a + p.b);
            for (auto [a, b] : {std::pair{p.a, m}, std::pair{m, p.b}}) {
                const double c = 0.5 * (a + b), h = 0.5 * (b - a);
                for (std::size_t i = 0; i < gl.x.size(); ++i) {
                    rule_out->x.push_back(c + h * gl.x[i]);
                    rule_out->w.push_back(h * gl.w[i]);
                }
            }
        }
    }
    return res;
}

// Fixed composite rule: apply `rule` to f.
template <class F>
double apply(const Rule& rule, F&& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) s += rule.w[i] * f(rule.x[i]);
    return s;
}

}  // namespace gapspec::quad
