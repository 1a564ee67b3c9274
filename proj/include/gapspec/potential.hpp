#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gapspec/gapset.hpp"
#include "gapspec/reflmeasure.hpp"

namespace gapspec {

struct EquilibriumOptions {
    double tol = 1e-10;          // on the scaled gap periods
    int max_iterations = 60;
    std::size_t gap_cap = 1023;
    double quad_rtol = 1e-13;
};

struct EquilibriumMeasure {
    ReflectionlessMeasure measure;
    // Scaled gap periods P_j / (integral of the weight * gap length), re-evaluated adaptively.
    std::vector<double> residuals;
    int iterations = 0;
    std::string method;  // "none", "newton" or "gauss-seidel"
};

// Scaled period of gap j for a trial gamma: the weighted mean of t over the gap
// minus gamma_j, divided by the gap length. Zero exactly when the gap period vanishes.
double scaled_gap_period(const GapSet& set, std::span<const double> gamma, std::size_t gap, double rtol = 1e-13);

EquilibriumMeasure solve_equilibrium(const GapSet& set, const EquilibriumOptions& opt = {});

// g(x) on the real axis as the integral of |m_E| from the band edge on the
// same side of gamma_j (or from the hull end for x outside the hull).
double green_value(const EquilibriumMeasure& eq, double x, double rtol = 1e-12);

struct RobinCapacity {
    double robin_constant = 0.0;
    double capacity = 0.0;
};

// z0 must lie to the right of the hull.
RobinCapacity robin_capacity(const EquilibriumMeasure& eq, double z0);

class GreenFunction {
  public:
    // Robin constant from the anchor hi + 1; `anchor_spread` records the
    // largest deviation seen at the anchors hi + 2 and hi + 5.
    explicit GreenFunction(EquilibriumMeasure eq);

    const EquilibriumMeasure& equilibrium() const noexcept { return eq_; }
    const GapSet& set() const noexcept { return eq_.measure.set(); }
    double robin_constant() const noexcept { return rc_.robin_constant; }
    double capacity() const noexcept { return rc_.capacity; }
    double anchor_spread() const noexcept { return spread_; }

    double operator()(double x) const { return green_value(eq_, x); }

  private:
    EquilibriumMeasure eq_;
    RobinCapacity rc_;
    double spread_ = 0.0;
};

// max over a grid in the level-k gaps of g(x) / (sqrt(eps_k) dist(x,E)^{1/2}).
double green_sqrt_bound_check(const GreenFunction& g, int level, std::size_t grid = 16);

// Chebyshev-type interior sample points of (lo, hi).
std::vector<double> interior_grid(double lo, double hi, std::size_t n);

}  // namespace gapspec
