#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "gapspec/gapset.hpp"
#include "gapspec/reflmeasure.hpp"

namespace gapspec {

// Finite section of a Jacobi matrix: diagonal b (size n) and off-diagonal a
// (size n - 1, all positive). `index_origin` labels the first site.
struct JacobiCoeffs {
    std::vector<double> a;
    std::vector<double> b;
    long index_origin = 1;

    std::size_t size() const noexcept { return b.size(); }
    // Leading n x n section.
    JacobiCoeffs section(std::size_t n) const;
    // max |b_n| + 2 max a_n, a bound on the spectral radius.
    double scale() const;
    void validate() const;
};

// Finite-support perturbation: delta_a[n] couples sites n and n + 1.
struct Perturbation {
    std::vector<double> delta_a;
    std::vector<double> delta_b;

    std::size_t support() const noexcept { return std::max(delta_b.size(), delta_a.size() + (delta_a.empty() ? 0 : 1)); }
};

struct PerturbationSplit {
    std::vector<double> delta_a, delta_b;
    JacobiCoeffs dj_plus, dj_minus;  // off-diagonals +delta_a/2 and -delta_a/2
    std::vector<double> d_plus, d_minus;
};

PerturbationSplit split_perturbation(const Perturbation& delta);

// J + dJ; throws if an off-diagonal entry stops being positive.
JacobiCoeffs perturbed(const JacobiCoeffs& j, const Perturbation& delta);

// Half-line coefficients of the arcsine law on [lo, hi]: a = r [sqrt 2, 1, 1, ...], b = center.
JacobiCoeffs arcsine_coefficients(Interval outer, std::size_t n);

struct StieltjesOptions {
    std::size_t min_nodes_per_band = 64;
    double nodes_per_mass = 16.0;  // extra nodes per band: nodes_per_mass * n * (band mass)
    double check_tol = 1e-8;       // allowed change when every band's node count doubles
};

// First n recurrence coefficients of the orthonormal polynomials of mu via the
// discretized Stieltjes procedure.
JacobiCoeffs stieltjes_coefficients(const ReflectionlessMeasure& mu, std::size_t n, const StieltjesOptions& opt = {});
JacobiCoeffs stieltjes_coefficients(const quad::Rule& discrete, std::size_t n);

// Number of eigenvalues of the section strictly below x.
std::size_t sturm_count(const JacobiCoeffs& j, double x);

// All eigenvalues, ascending, by Sturm bisection to full working precision.
std::vector<double> eig_tridiag(const JacobiCoeffs& j);

// Eigenvalues with index in [first, last) (ascending order).
std::vector<double> eig_tridiag_range(const JacobiCoeffs& j, std::size_t first, std::size_t last);

struct SymmetricEigen {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // columns, only if requested
};

// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
// off_tol * ||A||_F.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a, bool vectors, double off_tol = 1e-14);

Eigen::MatrixXd dense(const JacobiCoeffs& j);

struct PointMass {
    double x;
    double w;
};

// Spectral measure of (J, delta_site), site counted from 0.
std::vector<PointMass> local_spectral_measure(const JacobiCoeffs& j, std::size_t site);

// Trace norm of D^{1/2} (J - x)^{-1} D^{1/2} for diagonal D >= 0 (D may be
// shorter than the section; missing entries are zero).
double sandwich_trace_norm(const JacobiCoeffs& j, std::span<const double> d, double x);

// ||D||_1 max_{n in supp D} integral drho_n(t) / |t - x| with exact finite spectral measures.
double finite_cauchy_bound(const JacobiCoeffs& j, std::span<const double> d, double x);

// Eigenvalues of the n-section at distance > tol from E that reappear (within
// max(1e-8, tol/100)) in the 2n-section. `j` must hold at least 2n sites.
std::vector<double> gap_eigenvalues(const JacobiCoeffs& j, const GapSet& set, std::size_t n, double tol);

struct PairedEigenvalues {
    std::vector<double> values;   // from the n-section
    std::vector<double> partner;  // matching eigenvalue of the 2n-section
};

PairedEigenvalues gap_eigenvalues_paired(const JacobiCoeffs& j, const GapSet& set, std::size_t n, double tol);

// Solutions of m(lambda) = -1/delta_b in the gaps and outside the hull.
std::vector<double> rank_one_secular(const ReflectionlessMeasure& mu, double delta_b);

}  // namespace gapspec
