#include "gapspec/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace gapspec::quad {

namespace {

Rule compute_gauss_legendre(std::size_t n) {
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / static_cast<double>(j);
            }
            dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return r;
}

}  // namespace

const Rule& gauss_legendre(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, std::unique_ptr<Rule>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Rule>(compute_gauss_legendre(n));
    return *slot;
}

namespace {

// Geometric breakpoints from `outer` down to below `scale`, toward zero.
std::vector<double> graded_toward_zero(double outer, double scale) {
    std::vector<double> pts;
    double p = outer;
    while (p > 0.25 * scale && pts.size() < 60) {
        pts.push_back(p);
        p *= 0.25;
    }
    return pts;
}

}  // namespace

std::vector<double> cosine_breakpoints(double r, double delta_lo, double delta_hi) {
    const double pi = std::numbers::pi;
    std::vector<double> pts{0.0, pi};
    auto grade = [&](double delta) {
        if (!(delta > 0.0) || !(r > 0.0)) return std::vector<double>{};
        const double scale = std::sqrt(2.0 * delta / r);
        if (scale >= 0.5 * pi) return std::vector<double>{};
        return graded_toward_zero(0.5 * pi, scale);
    };
    // theta = pi corresponds to t = lo, theta = 0 to t = hi
    for (double p : grade(delta_hi)) pts.push_back(p);
    for (double p : grade(delta_lo)) pts.push_back(pi - p);
    pts.push_back(0.5 * pi);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

std::vector<double> sqrt_breakpoints(double s_max, double delta) {
    std::vector<double> pts{0.0, s_max};
    if (delta > 0.0) {
        for (double p : graded_toward_zero(0.5 * s_max, std::sqrt(delta))) pts.push_back(p);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

}  // namespace gapspec::quad
