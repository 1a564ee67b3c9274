#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gapspec/gapset.hpp"
#include "gapspec/jacobi.hpp"
#include "gapspec/potential.hpp"
#include "gapspec/reflmeasure.hpp"

namespace gapspec {

struct BoundReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double constant = 0.0;
    double ratio = 0.0;
    double slack = 0.0;
    bool pass = false;
    // inputs
    std::string set_kind;
    double p = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    // truncation diagnostics
    double lhs_2n = 0.0;
    std::size_t eigenvalues = 0;
    std::string note;
};

// ratio = lhs / rhs (0/0 -> 0, x/0 -> inf) and pass = ratio <= 1 + slack.
void finalize(BoundReport& r);

double s_p(std::span<const double> eigs, const GapSet& set, double p);
double kato_rhs(const Perturbation& delta);
// sum 4|da|^q + |db|^q and sum |da|^q + |db|^q
double power_norm(const Perturbation& delta, double q, double a_weight);

// c[0] is the outer-gap constant, c[k] belongs to gap k-1 in left-to-right order.
double thm1_constant(double p, std::span<const double> c, const GapSet& set);
double thm2_constant(double p, std::span<const double> c);
// 2^{p-3/2} 3^{p-1} (2p-1)/(p-1)
double thm2_factor(double p);

enum class ConstantSource { torus, measure };

struct GapConstants {
    ConstantSource source = ConstantSource::torus;
    std::vector<double> trace_class;  // outer gap weighted by sqrt(|x-alpha0||x-beta0|)
    std::vector<double> schatten;     // outer gap weighted by dist^{1/2}
    std::vector<double> analytic;     // sqrt(eps) log(1/eps) per inner gap, constructed sets only
};

// torus: C_k = (9 + 2 min log ...) * max_x w~(x) dist^{1/2} for inner gaps,
// which dominates every reflectionless measure; the outer constants are the
// exact suprema of w~ times the weight. measure: the same maxima taken over
// the given measure's Cauchy integral on a Chebyshev grid (needs mu).
GapConstants fit_gap_constants(const GapSet& set, ConstantSource source, const ReflectionlessMeasure* mu = nullptr,
                               std::size_t grid = 32);

// sup over the closed gap of w~(x) dist(x,E)^{1/2}, endpoints included.
double torus_gap_sup(const GapSet& set, std::size_t gap, std::size_t grid = 32);

struct VerifyOptions {
    std::size_t n = 800;
    double tol = 1e-4;  // eigenvalues closer than this to E are not counted
    std::uint64_t seed = 7;
};

BoundReport verify_kato_bound(const JacobiCoeffs& jp, const Perturbation& delta, const GapSet& set,
                              const VerifyOptions& opt);
BoundReport verify_trace_class_bound(const JacobiCoeffs& jp, const Perturbation& delta, double p, const GapSet& set,
                                     std::span<const double> c, const VerifyOptions& opt);
BoundReport verify_schatten_bound(const JacobiCoeffs& jp, const Perturbation& delta, double p, const GapSet& set,
                                  std::span<const double> c, const VerifyOptions& opt);

// Per-level pieces of the Green-function bound: level 0 is the outer gap.
struct GreenLevelConstants {
    std::vector<double> g_ratio;     // max g(x) / dist^{1/2} over the level's gaps
    std::vector<double> c;           // max torus constant (dist^{1/2} convention) over the level's gaps
    std::vector<double> multiplicity;
    std::vector<double> analytic;    // sqrt(eps_k) log(1/eps_k), eps_0 = 1/e
};

GreenLevelConstants green_level_constants(const GreenFunction& g, std::size_t grid = 24);
// L = 4 K_q sum_k mult_k G_k^p C_k with q = (p+1)/2.
double green_bound_constant(const GreenLevelConstants& lc, double p);

BoundReport verify_green_bound(const JacobiCoeffs& jp, const Perturbation& delta, double p, const GreenFunction& g,
                               const GreenLevelConstants& lc, const VerifyOptions& opt);

struct BirmanSchwingerResult {
    std::size_t count = 0;
    double bound = 0.0;
    bool pass = false;
};

// Eigenvalues of jp + dJ in (gamma_minus, gamma_plus) against the sandwiched
// trace norms at the two ends. The closed interval must avoid the spectrum of jp.
BirmanSchwingerResult birman_schwinger_check(const JacobiCoeffs& jp, const Perturbation& delta, double gamma_minus,
                                             double gamma_plus);

struct BandCantorEstimate {
    int level = 0;
    double fitted = 0.0;     // max w~ dist^{1/2} / sqrt(eps_k) (level 0: w~ sqrt(|x-a0||x-b0|))
    double converse = 0.0;   // lim_{x -> beta0-} |x-beta0|^{1/2} w~(x)
};

BandCantorEstimate band_cantor_estimate_check(const GapSet& set, int level, std::size_t grid = 32);
// prod_j sqrt((beta_j - beta0)/(alpha_j - beta0)) / sqrt(alpha0 - beta0)
double converse_statistic(const GapSet& set);

struct CantorLemmaReport {
    int level = 0;
    double r_worst_ratio = 0.0;  // max over checked bands of R_i / bound
    std::size_t r_checked = 0;
    double a_product = 1.0, a_bound = 1.0;
    double q = 0.0, q_bound = 0.0;
    double c = 1.0;
    bool pass = false;
};

CantorLemmaReport cantor_lemma_products(const GapSet& set, double x, std::span<const double> gamma);

}  // namespace gapspec
