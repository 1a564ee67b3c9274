#include "gapspec/jacobi.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numeric>

#include "gapspec/error.hpp"

namespace gapspec {

JacobiCoeffs JacobiCoeffs::section(std::size_t n) const {
    if (n == 0 || n > size()) throw ValidationError("section size out of range");
    JacobiCoeffs s;
    s.b.assign(b.begin(), b.begin() + static_cast<long>(n));
    s.a.assign(a.begin(), a.begin() + static_cast<long>(n - 1));
    s.index_origin = index_origin;
    return s;
}

double JacobiCoeffs::scale() const {
    double mb = 0.0, ma = 0.0;
    for (double v : b) mb = std::max(mb, std::abs(v));
    for (double v : a) ma = std::max(ma, std::abs(v));
    return mb + 2.0 * ma;
}

void JacobiCoeffs::validate() const {
    if (b.empty()) throw ValidationError("Jacobi section must have at least one site");
    if (a.size() + 1 != b.size()) throw ValidationError("need len(a) = len(b) - 1");
    for (double v : b)
        if (!std::isfinite(v)) throw ValidationError("non-finite diagonal entry");
    for (double v : a)
        if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("off-diagonal entries must be positive");
}

PerturbationSplit split_perturbation(const Perturbation& delta) {
    const std::size_t n = delta.support();
    PerturbationSplit s;
    s.delta_a = delta.delta_a;
    s.delta_b = delta.delta_b;
    s.delta_a.resize(n > 0 ? n - 1 : 0, 0.0);
    s.delta_b.resize(n, 0.0);
    auto da = [&](std::size_t i) { return i < s.delta_a.size() ? std::abs(s.delta_a[i]) : 0.0; };
    s.dj_plus.b.resize(n);
    s.dj_minus.b.resize(n);
    s.d_plus.resize(n);
    s.d_minus.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double side = da(i) + (i > 0 ? da(i - 1) : 0.0);
        const double bp = std::max(s.delta_b[i], 0.0), bm = std::max(-s.delta_b[i], 0.0);
        s.dj_plus.b[i] = bp + 0.5 * side;
        s.dj_minus.b[i] = bm + 0.5 * side;
        s.d_plus[i] = bp + side;
        s.d_minus[i] = bm + side;
    }
    s.dj_plus.a.resize(s.delta_a.size());
    s.dj_minus.a.resize(s.delta_a.size());
    for (std::size_t i = 0; i < s.delta_a.size(); ++i) {
        s.dj_plus.a[i] = 0.5 * s.delta_a[i];
        s.dj_minus.a[i] = -0.5 * s.delta_a[i];
    }
    return s;
}

JacobiCoeffs perturbed(const JacobiCoeffs& j, const Perturbation& delta) {
    if (delta.delta_b.size() > j.size() || delta.delta_a.size() > j.a.size())
        throw ValidationError("perturbation support exceeds the section");
    JacobiCoeffs out = j;
    for (std::size_t i = 0; i < delta.delta_b.size(); ++i) out.b[i] += delta.delta_b[i];
    for (std::size_t i = 0; i < delta.delta_a.size(); ++i) {
        out.a[i] += delta.delta_a[i];
        if (!(out.a[i] > 0.0)) throw ValidationError("perturbed off-diagonal entry is not positive");
    }
    return out;
}

JacobiCoeffs arcsine_coefficients(Interval outer, std::size_t n) {
    if (n == 0) throw ValidationError("need at least one coefficient");
    const double r = 0.25 * outer.length();
    JacobiCoeffs j;
    j.b.assign(n, outer.center());
    j.a.assign(n - 1, r);
    if (n > 1) j.a[0] = std::sqrt(2.0) * r;
    return j;
}

// ---------------------------------------------------------------------------

JacobiCoeffs stieltjes_coefficients(const quad::Rule& d, std::size_t n) {
    if (n == 0) throw ValidationError("need at least one coefficient");
    const std::size_t m = d.x.size();
    if (m < n) throw ValidationError("discretization has fewer nodes than requested coefficients");
    const double mass = std::accumulate(d.w.begin(), d.w.end(), 0.0);
    std::vector<double> q(m, 1.0 / std::sqrt(mass)), prev(m, 0.0), r(m);
    JacobiCoeffs j;
    j.b.resize(n);
    j.a.resize(n - 1);
    double a_prev = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double bk = 0.0;
        for (std::size_t i = 0; i < m; ++i) bk += d.w[i] * d.x[i] * q[i] * q[i];
        j.b[k] = bk;
        if (k + 1 == n) break;
        double norm2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            r[i] = (d.x[i] - bk) * q[i] - a_prev * prev[i];
            norm2 += d.w[i] * r[i] * r[i];
        }
        const double ak = std::sqrt(norm2);
        if (!(ak > 0.0)) throw AccuracyError("discrete measure exhausted before the requested degree", 0.0, 0.0);
        j.a[k] = ak;
        for (std::size_t i = 0; i < m; ++i) {
            prev[i] = q[i];
            q[i] = r[i] / ak;
        }
        a_prev = ak;
    }
    return j;
}

JacobiCoeffs stieltjes_coefficients(const ReflectionlessMeasure& mu, std::size_t n, const StieltjesOptions& opt) {
    if (n == 0) throw ValidationError("need at least one coefficient");
    const std::size_t nb = mu.set().band_count();
    // band masses from a coarse pass decide where the nodes go
    const quad::Rule coarse = discretize(mu, opt.min_nodes_per_band);
    std::vector<double> mass(nb, 0.0);
    for (std::size_t i = 0; i < coarse.x.size(); ++i) {
        const Location loc = mu.set().locate(coarse.x[i]);
        mass[loc.index] += coarse.w[i];
    }
    std::vector<std::size_t> counts(nb), doubled(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        counts[b] = opt.min_nodes_per_band +
                    static_cast<std::size_t>(std::ceil(opt.nodes_per_mass * static_cast<double>(n) * mass[b]));
        doubled[b] = 2 * counts[b];
    }
    const JacobiCoeffs j1 = stieltjes_coefficients(discretize(mu, counts), n);
    JacobiCoeffs j2 = stieltjes_coefficients(discretize(mu, doubled), n);
    double change = 0.0;
    for (std::size_t k = 0; k < n; ++k) change = std::max(change, std::abs(j1.b[k] - j2.b[k]));
    for (std::size_t k = 0; k + 1 < n; ++k) change = std::max(change, std::abs(j1.a[k] - j2.a[k]));
    if (change > opt.check_tol)
        throw AccuracyError("recurrence coefficients changed when the discretization was refined", j2.b.back(),
                            change);
    return j2;
}

// ---------------------------------------------------------------------------

std::size_t sturm_count(const JacobiCoeffs& j, double x) {
    const std::size_t n = j.size();
    const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, j.scale() * j.scale());
    std::size_t count = 0;
    double d = j.b[0] - x;
    for (std::size_t i = 0;; ++i) {
        if (std::abs(d) < pivmin) d = -pivmin;
        if (d < 0.0) ++count;
        if (i + 1 == n) break;
        d = (j.b[i + 1] - x) - j.a[i] * j.a[i] / d;
    }
    return count;
}

namespace {

double bisect_index(const JacobiCoeffs& j, std::size_t k, double lo, double hi) {
    // invariant: count(lo) <= k < count(hi)
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(j, mid) > k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

std::pair<double, double> gershgorin(const JacobiCoeffs& j) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const double r = (i > 0 ? j.a[i - 1] : 0.0) + (i < j.a.size() ? j.a[i] : 0.0);
        lo = std::min(lo, j.b[i] - r);
        hi = std::max(hi, j.b[i] + r);
    }
    const double pad = 1e-12 * std::max(1.0, j.scale());
    return {lo - pad, hi + pad};
}

}  // namespace

std::vector<double> eig_tridiag_range(const JacobiCoeffs& j, std::size_t first, std::size_t last) {
    j.validate();
    if (last > j.size() || first > last) throw ValidationError("eigenvalue index range out of bounds");
    const auto [lo, hi] = gershgorin(j);
    std::vector<double> out;
    out.reserve(last - first);
    double floor = lo;
    for (std::size_t k = first; k < last; ++k) {
        const double v = bisect_index(j, k, floor, hi);
        out.push_back(v);
        // eigenvalue k+1 is >= eigenvalue k; keep the count invariant valid
        double next = std::nextafter(v, lo);
        if (sturm_count(j, next) <= k + 1) floor = std::max(floor, next);
    }
    return out;
}

std::vector<double> eig_tridiag(const JacobiCoeffs& j) { return eig_tridiag_range(j, 0, j.size()); }

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& input, bool vectors, double off_tol) {
    if (input.rows() != input.cols()) throw ValidationError("matrix must be square");
    const Eigen::Index n = input.rows();
    Eigen::MatrixXd a = 0.5 * (input + input.transpose());
    Eigen::MatrixXd v = vectors ? Eigen::MatrixXd::Identity(n, n) : Eigen::MatrixXd();
    const double fro = a.norm();
    auto off = [&] {
        double s = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = 0; q < n; ++q)
                if (p != q) s += a(p, q) * a(p, q);
        return std::sqrt(s);
    };
    for (int sweep = 0; sweep < 100 && fro > 0.0 && off() > off_tol * fro; ++sweep) {
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                if (vectors) {
                    for (Eigen::Index k = 0; k < n; ++k) {
                        const double vkp = v(k, p), vkq = v(k, q);
                        v(k, p) = c * vkp - s * vkq;
                        v(k, q) = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
    SymmetricEigen out;
    out.values.resize(n);
    if (vectors) out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index src = order[static_cast<std::size_t>(i)];
        out.values(i) = a(src, src);
        if (vectors) out.vectors.col(i) = v.col(src);
    }
    return out;
}

Eigen::MatrixXd dense(const JacobiCoeffs& j) {
    const auto n = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) = j.b[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 0; i + 1 < n; ++i) m(i, i + 1) = m(i + 1, i) = j.a[static_cast<std::size_t>(i)];
    return m;
}

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tridiagonal_eigen(const JacobiCoeffs& j) {
    j.validate();
    Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(j.b.data(), static_cast<Eigen::Index>(j.b.size()));
    Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(j.a.data(), static_cast<Eigen::Index>(j.a.size()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    return es;
}

// Solve (J - x) y = e_site with partial pivoting (the LAPACK gtsv elimination).
std::vector<double> resolvent_column(const JacobiCoeffs& j, double x, std::size_t site) {
    const std::size_t n = j.size();
    std::vector<double> d(n), dl(j.a), du(j.a), rhs(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) d[i] = j.b[i] - x;
    rhs[site] = 1.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const bool last = i + 2 == n;
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0.0) throw SingularityError("resolvent is singular");
            const double fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            rhs[i + 1] -= fact * rhs[i];
            if (!last) dl[i] = 0.0;
        } else {
            const double fact = d[i] / dl[i];
            d[i] = dl[i];
            const double temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if (!last) {
                dl[i] = du[i + 1];
                du[i + 1] = -fact * dl[i];
            }
            du[i] = temp;
            const double tb = rhs[i];
            rhs[i] = rhs[i + 1];
            rhs[i + 1] = tb - fact * rhs[i + 1];
        }
    }
    if (d[n - 1] == 0.0) throw SingularityError("resolvent is singular");
    rhs[n - 1] /= d[n - 1];
    if (n > 1) rhs[n - 2] = (rhs[n - 2] - du[n - 2] * rhs[n - 1]) / d[n - 2];
    for (std::size_t i = n >= 3 ? n - 3 : 0; n >= 3; --i) {
        rhs[i] = (rhs[i] - du[i] * rhs[i + 1] - dl[i] * rhs[i + 2]) / d[i];
        if (i == 0) break;
    }
    return rhs;
}

void check_regular_point(const JacobiCoeffs& j, double x) {
    const double delta = 1e-12 * std::max(1.0, j.scale());
    if (sturm_count(j, x + delta) != sturm_count(j, x - delta))
        throw SingularityError("x is within 1e-12 of an eigenvalue");
}

}  // namespace

std::vector<PointMass> local_spectral_measure(const JacobiCoeffs& j, std::size_t site) {
    if (site >= j.size()) throw ValidationError("site outside the section");
    const auto es = tridiagonal_eigen(j);
    std::vector<PointMass> out(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const double v = es.eigenvectors()(static_cast<Eigen::Index>(site), static_cast<Eigen::Index>(i));
        out[i] = {es.eigenvalues()(static_cast<Eigen::Index>(i)), v * v};
    }
    return out;
}

double sandwich_trace_norm(const JacobiCoeffs& j, std::span<const double> d, double x) {
    j.validate();
    if (d.size() > j.size()) throw ValidationError("D is longer than the section");
    std::vector<std::size_t> supp;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] < 0.0 || !std::isfinite(d[i])) throw ValidationError("D must be nonnegative");
        if (d[i] > 0.0) supp.push_back(i);
    }
    check_regular_point(j, x);
    if (supp.empty()) return 0.0;
    const auto s = static_cast<Eigen::Index>(supp.size());
    Eigen::MatrixXd m(s, s);
    for (Eigen::Index c = 0; c < s; ++c) {
        const auto col = resolvent_column(j, x, supp[static_cast<std::size_t>(c)]);
        for (Eigen::Index r = 0; r < s; ++r) {
            const std::size_t ir = supp[static_cast<std::size_t>(r)], ic = supp[static_cast<std::size_t>(c)];
            m(r, c) = std::sqrt(d[ir] * d[ic]) * col[ir];
        }
    }
    const SymmetricEigen es = jacobi_eigen(m, false);
    return es.values.cwiseAbs().sum();
}

double finite_cauchy_bound(const JacobiCoeffs& j, std::span<const double> d, double x) {
    if (d.size() > j.size()) throw ValidationError("D is longer than the section");
    check_regular_point(j, x);
    const auto es = tridiagonal_eigen(j);
    double norm1 = 0.0, best = 0.0;
    for (std::size_t site = 0; site < d.size(); ++site) {
        norm1 += d[site];
        if (!(d[site] > 0.0)) continue;
        double s = 0.0;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const double v = es.eigenvectors()(static_cast<Eigen::Index>(site), i);
            s += v * v / std::abs(es.eigenvalues()(i) - x);
        }
        best = std::max(best, s);
    }
    return norm1 * best;
}

// ---------------------------------------------------------------------------

PairedEigenvalues gap_eigenvalues_paired(const JacobiCoeffs& j, const GapSet& set, std::size_t n, double tol) {
    if (n < 16) throw ValidationError("truncation size must be at least 16");
    if (!(tol > 0.0)) throw ValidationError("tol must be positive");
    if (j.size() < 2 * n) throw ValidationError("coefficients must cover the 2N-section");
    const JacobiCoeffs jn = j.section(n), j2 = j.section(2 * n);
    jn.validate();
    j2.validate();
    const auto [glo, ghi] = gershgorin(j2);

    std::vector<std::pair<double, double>> windows;
    if (set.lo() - tol > glo) windows.push_back({glo, set.lo() - tol});
    for (const auto& g : set.gaps())
        if (g.lo + tol < g.hi - tol) windows.push_back({g.lo + tol, g.hi - tol});
    if (set.hi() + tol < ghi) windows.push_back({set.hi() + tol, ghi});

    const double match = std::max(1e-8, tol / 100.0);
    PairedEigenvalues out;
    for (const auto& [u, v] : windows) {
        const std::size_t cu = sturm_count(jn, u), cv = sturm_count(jn, v);
        for (std::size_t k = cu; k < cv; ++k) {
            const double lam = bisect_index(jn, k, u, v);
            const std::size_t c0 = sturm_count(j2, lam - match), c1 = sturm_count(j2, lam + match);
            if (c1 == c0) continue;
            out.values.push_back(lam);
            out.partner.push_back(bisect_index(j2, c0, lam - match, lam + match));
        }
    }
    return out;
}

std::vector<double> gap_eigenvalues(const JacobiCoeffs& j, const GapSet& set, std::size_t n, double tol) {
    return gap_eigenvalues_paired(j, set, n, tol).values;
}

std::vector<double> rank_one_secular(const ReflectionlessMeasure& mu, double delta_b) {
    if (!(delta_b != 0.0) || !std::isfinite(delta_b)) throw ValidationError("delta_b must be finite and nonzero");
    const GapSet& set = mu.set();
    const double target = -1.0 / delta_b;
    auto f = [&](double x) { return m_real(mu, x) - target; };
    // f is increasing on every component of the complement.
    auto solve = [&](double lo, double hi) {
        for (int it = 0; it < 2000; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (f(mid) > 0.0 ? hi : lo) = mid;
        }
        return 0.5 * (lo + hi);
    };
    std::vector<double> roots;
    const double scale = std::max({1.0, std::abs(set.lo()), std::abs(set.hi())});
    const double edge = 1e-14 * scale;
    if (target > 0.0) {
        const double hi = set.lo() - edge;
        if (f(hi) > 0.0) {
            double len = set.diameter();
            while (f(set.lo() - len) > 0.0 && len < 1e300) len *= 2.0;
            roots.push_back(solve(set.lo() - len, hi));
        }
    }
    for (const auto& g : set.gaps()) {
        const double lo = g.lo + edge, hi = g.hi - edge;
        if (!(lo < hi)) continue;
        if (f(lo) < 0.0 && f(hi) > 0.0) roots.push_back(solve(lo, hi));
    }
    if (target < 0.0) {
        const double lo = set.hi() + edge;
        if (f(lo) < 0.0) {
            double len = set.diameter();
            while (f(set.hi() + len) < 0.0 && len < 1e300) len *= 2.0;
            roots.push_back(solve(lo, set.hi() + len));
        }
    }
    return roots;
}

}  // namespace gapspec
