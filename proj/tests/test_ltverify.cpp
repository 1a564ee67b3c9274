#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "gapspec/error.hpp"
#include "gapspec/ltverify.hpp"

using namespace gapspec;

namespace {

const GapSet free_set = GapSet::finite({{-2, 2}});

std::vector<double> powers(double r, int k) {
    std::vector<double> e;
    for (int i = 1; i <= k; ++i) e.push_back(std::pow(r, i));
    return e;
}

Perturbation random_perturbation(std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Perturbation d;
    const int n = 1 + static_cast<int>(std::abs(u(rng)) * 5);
    for (int i = 0; i < n; ++i) d.delta_b.push_back(scale * u(rng));
    for (int i = 0; i + 1 < n; ++i) d.delta_a.push_back(0.3 * scale * std::abs(u(rng)));
    return d;
}

}  // namespace

TEST_CASE("Kato right side and power norms") {
    CHECK(kato_rhs(Perturbation{{0.1}, {0.2}}) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(kato_rhs(Perturbation{}) == 0.0);
    const Perturbation d{{-0.5, 0.25}, {1.0, -2.0}};
    CHECK(power_norm(d, 2.0, 1.0) == doctest::Approx(0.25 + 0.0625 + 1.0 + 4.0));
    CHECK(power_norm(d, 0.5, 4.0) == doctest::Approx(4 * (std::sqrt(0.5) + 0.5) + 1.0 + std::sqrt(2.0)));
}

TEST_CASE("eigenvalue sums") {
    const GapSet set = GapSet::finite({{-2, -1}, {1, 2}});
    const std::vector<double> eigs{0.0, 0.5, 2.25, -3.0};
    // distances 1, 0.5, 0.25, 1
    CHECK(s_p(eigs, set, 1.0) == doctest::Approx(2.75));
    CHECK(s_p(eigs, set, 2.0) == doctest::Approx(1 + 0.25 + 0.0625 + 1));
    CHECK_THROWS_AS(s_p(eigs, set, -1.0), ValidationError);

    const std::vector<double> near{0.1, -0.2, 0.6, 2.3, -2.7};
    const std::vector<double> far{5.0, -4.0, 12.0};
    double prev_near = std::numeric_limits<double>::infinity(), prev_far = 0.0;
    for (double p = 0.25; p <= 4.0; p += 0.25) {
        const double a = s_p(near, set, p), b = s_p(far, set, p);
        CHECK(a <= prev_near);
        CHECK(b >= prev_far);
        prev_near = a;
        prev_far = b;
    }
}

TEST_CASE("constant formulas") {
    CHECK(thm2_factor(1.5) == doctest::Approx(4.0 * std::sqrt(3.0)).epsilon(1e-15));
    CHECK(thm2_factor(2.0) == doctest::Approx(9.0 * std::sqrt(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(thm2_factor(1.0), ValidationError);

    const GapSet set = GapSet::finite({{-2, -1}, {0, 0.5}, {1, 2}});
    const std::vector<double> c{1.0, 2.0, 3.0};
    // p/(2p-1) [c0 / ((1-p) diam^{1-p}) + 2 sum c_k (|g_k|/2)^{p-1/2}]
    const double p = 0.75;
    const double expect = p / (2 * p - 1) * (1.0 / ((1 - p) * std::pow(4.0, 1 - p)) + 2 * (2.0 * std::pow(0.5, 0.25) + 3.0 * std::pow(0.25, 0.25)));
    CHECK(thm1_constant(p, c, set) == doctest::Approx(expect).epsilon(1e-14));
    CHECK_THROWS_AS(thm1_constant(0.5, c, set), ValidationError);
    CHECK_THROWS_AS(thm1_constant(1.0, c, set), ValidationError);
    CHECK_THROWS_AS(thm1_constant(0.7, std::vector<double>{1.0}, set), ValidationError);
    CHECK(thm2_constant(2.0, c) == doctest::Approx(6.0 * thm2_factor(2.0)));
}

TEST_CASE("constant formulas are linear in the constant vector") {
    const GapSet set = GapSet::cantor(powers(0.3, 3), {-2, 2});
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    std::vector<double> c(set.gap_count() + 1), d(c.size()), sum(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = u(rng);
        d[i] = u(rng);
        sum[i] = 2.5 * c[i] + d[i];
    }
    for (double p : {0.55, 0.8, 0.95}) {
        CHECK(thm1_constant(p, sum, set) == doctest::Approx(2.5 * thm1_constant(p, c, set) + thm1_constant(p, d, set)).epsilon(1e-13));
    }
    for (double p : {1.1, 2.0, 3.5}) {
        CHECK(thm2_constant(p, sum) == doctest::Approx(2.5 * thm2_constant(p, c) + thm2_constant(p, d)).epsilon(1e-13));
    }
    GreenLevelConstants lc{{0.5, 1.0, 0.7}, {2.0, 1.0, 3.0}, {1.0, 1.0, 2.0}, {}};
    const double base = green_bound_constant(lc, 1.4);
    for (double& v : lc.c) v *= 3.0;
    CHECK(green_bound_constant(lc, 1.4) == doctest::Approx(3.0 * base).epsilon(1e-14));
}

TEST_CASE("report finalization") {
    BoundReport r;
    r.slack = 1e-6;
    finalize(r);
    CHECK(r.ratio == 0.0);
    CHECK(r.pass);
    r.lhs = 1.0;
    finalize(r);
    CHECK(std::isinf(r.ratio));
    CHECK_FALSE(r.pass);
    r.rhs = 1.0 - 1e-7;
    finalize(r);
    CHECK(r.pass);
}

TEST_CASE("single-site Kato case in closed form") {
    const JacobiCoeffs jp = arcsine_coefficients({-2, 2}, 1600);
    VerifyOptions opt;
    for (double s : {-3.0, 0.5, 1.0, 4.0}) {
        const BoundReport r = verify_kato_bound(jp, Perturbation{{}, {s}}, free_set, opt);
        CHECK(r.eigenvalues == 1);
        CHECK(r.lhs == doctest::Approx(std::sqrt(s * s + 4.0) - 2.0).epsilon(1e-10));
        CHECK(r.rhs == doctest::Approx(std::abs(s)));
        CHECK(r.pass);
    }
    const BoundReport z = verify_kato_bound(jp, Perturbation{}, free_set, opt);
    CHECK(z.lhs == 0.0);
    CHECK(z.pass);
}

TEST_CASE("trace-class bound beats Kato only for small perturbations") {
    const JacobiCoeffs jp = arcsine_coefficients({-2, 2}, 1600);
    const GapConstants gc = fit_gap_constants(free_set, ConstantSource::torus);
    REQUIRE(gc.trace_class.size() == 1);
    CHECK(gc.trace_class[0] == doctest::Approx(1.0));
    const double p = 0.6;
    VerifyOptions opt;
    auto reports = [&](double s) {
        const Perturbation d{{}, {s}};
        return verify_trace_class_bound(jp, d, p, free_set, gc.trace_class, opt);
    };
    const BoundReport small = reports(0.01);
    const BoundReport large = reports(10.0);
    CHECK(small.pass);
    CHECK(large.pass);
    CHECK(small.rhs < std::pow(kato_rhs(Perturbation{{}, {0.01}}), p));
    CHECK(large.rhs > std::pow(kato_rhs(Perturbation{{}, {10.0}}), p));
}

TEST_CASE("torus constants dominate measure constants") {
    const GapSet set = GapSet::infinite_band(powers(0.5, 5), {-2, 2});
    const ReflectionlessMeasure mu(set, GammaRule::midpoint);
    const GapConstants torus = fit_gap_constants(set, ConstantSource::torus);
    const GapConstants meas = fit_gap_constants(set, ConstantSource::measure, &mu);
    REQUIRE(torus.trace_class.size() == set.gap_count() + 1);
    for (std::size_t k = 0; k < torus.trace_class.size(); ++k) {
        CHECK(meas.trace_class[k] <= torus.trace_class[k] * (1 + 1e-9));
        CHECK(meas.schatten[k] <= torus.schatten[k] * (1 + 1e-9));
    }
    CHECK_THROWS_AS(fit_gap_constants(set, ConstantSource::measure), ValidationError);
}

TEST_CASE("torus supremum against a brute-force grid") {
    const GapSet set = GapSet::cantor(powers(0.35, 3), {-2, 2});
    for (std::size_t k = 0; k < set.gap_count(); ++k) {
        const Gap& g = set.gaps()[k];
        double best = 0.0;
        for (int i = 1; i < 20000; ++i) {
            const double x = g.lo + g.length() * i / 20000.0;
            best = std::max(best, sup_torus_bound(set, x) * std::sqrt(set.dist(x)));
        }
        const double sup = torus_gap_sup(set, k);
        CHECK(sup >= best * (1 - 1e-12));
        CHECK(sup <= best * (1 + 1e-3));
    }
}

TEST_CASE("verified bounds on random perturbations") {
    const GapSet set = GapSet::finite({{-2, -0.4}, {0.3, 2}});
    const ReflectionlessMeasure mu(set, GammaRule::midpoint);
    const JacobiCoeffs jp = stieltjes_coefficients(mu, 800);
    const GapConstants gc = fit_gap_constants(set, ConstantSource::torus);
    VerifyOptions opt;
    opt.n = 400;
    std::mt19937_64 rng(17);
    for (int t = 0; t < 20; ++t) {
        const Perturbation d = random_perturbation(rng, t % 2 ? 0.05 : 1.5);
        CHECK(verify_kato_bound(jp, d, set, opt).pass);
        CHECK(verify_trace_class_bound(jp, d, 0.75, set, gc.trace_class, opt).pass);
        const BoundReport s = verify_schatten_bound(jp, d, 1.5, set, gc.schatten, opt);
        CHECK(s.pass);
        CHECK(s.slack >= 1e-6);
        CHECK(s.name == "thm2");
    }
}

TEST_CASE("Birman-Schwinger counting") {
    const GapSet set = GapSet::finite({{-2, -0.4}, {0.3, 2}});
    const JacobiCoeffs jp = stieltjes_coefficients(ReflectionlessMeasure(set, GammaRule::midpoint), 200);
    const auto spec = eig_tridiag(jp);
    // the widest spectral gap of the section centred in the gap of E
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i + 1 < spec.size(); ++i) {
        const double mid = 0.5 * (spec[i] + spec[i + 1]);
        if (mid > -0.4 && mid < 0.3 && spec[i + 1] - spec[i] > hi - lo) {
            lo = spec[i];
            hi = spec[i + 1];
        }
    }
    REQUIRE(hi > lo);
    const double gm = lo + 0.05 * (hi - lo), gp = hi - 0.05 * (hi - lo);
    std::mt19937_64 rng(99);
    for (int t = 0; t < 30; ++t) {
        const Perturbation d = random_perturbation(rng, 0.8);
        const BirmanSchwingerResult r = birman_schwinger_check(jp, d, gm, gp);
        CHECK(r.pass);
        CHECK(static_cast<double>(r.count) <= r.bound);
    }
    CHECK_THROWS(birman_schwinger_check(jp, Perturbation{{}, {1.0}}, 1.0, 0.5));
}

TEST_CASE("converse statistic") {
    const GapSet two = GapSet::finite({{-2, -1}, {0.5, 2}});
    // sqrt((beta_1 - beta0)/(alpha_1 - beta0)) / sqrt(diam)
    CHECK(converse_statistic(two) == doctest::Approx(std::sqrt(2.5 / 1.0) / 2.0).epsilon(1e-14));
    std::vector<double> eps;
    double prev = 0.0;
    for (int k = 1; k <= 10; ++k) {
        eps.push_back(1.0 / (k + 1));
        const double v = converse_statistic(GapSet::infinite_band(eps, {-2, 2}));
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("band and Cantor estimates") {
    const GapSet inf = GapSet::infinite_band(powers(0.5, 6), {-2, 2});
    for (int k = 0; k <= 6; ++k) {
        const BandCantorEstimate e = band_cantor_estimate_check(inf, k);
        CHECK(std::isfinite(e.fitted));
        CHECK(e.fitted > 0.0);
    }
    CHECK(band_cantor_estimate_check(inf, 0).converse == doctest::Approx(converse_statistic(inf)).epsilon(1e-6));
}

TEST_CASE("Cantor lemma products") {
    const GapSet set = GapSet::cantor(powers(0.5, 6), {-2, 2});
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        const Gap& g = set.gaps()[static_cast<std::size_t>(u(rng) * static_cast<double>(set.gap_count()))];
        std::vector<double> gamma;
        for (const auto& h : set.gaps()) gamma.push_back(h.lo + u(rng) * h.length());
        const CantorLemmaReport r = cantor_lemma_products(set, g.lo + u(rng) * g.length(), gamma);
        CHECK(r.pass);
        CHECK(r.level == g.level);
        CHECK(r.r_worst_ratio <= 1.0);
        CHECK(r.a_product <= r.a_bound);
        CHECK(r.q <= r.q_bound);
    }
    CHECK_THROWS(cantor_lemma_products(set, 2.0 - 1e-9, std::vector<double>(set.gap_count(), 0.0)));
}

TEST_CASE("worked values of the sums and constants") {
    const std::vector<double> pm3{3.0, -3.0};
    CHECK(s_p(pm3, free_set, 1.0) == doctest::Approx(2.0));
    CHECK(s_p(std::vector<double>{}, free_set, 0.7) == 0.0);
    CHECK(s_p(std::vector<double>{2.5, 2.25}, free_set, 0.5) == doctest::Approx(std::sqrt(0.5) + 0.5).epsilon(1e-15));
    CHECK(kato_rhs(Perturbation{{}, {1.0, -1.0}}) == 2.0);

    const std::vector<double> c0{1.0};
    CHECK(thm1_constant(0.75, c0, free_set) == doctest::Approx(1.5 / (0.25 * std::pow(4.0, 0.25))).epsilon(1e-15));
    CHECK(thm1_constant(0.75, c0, free_set) == doctest::Approx(4.24264).epsilon(1e-6));
    CHECK(thm1_constant(0.75, std::vector<double>{0.0}, free_set) == 0.0);
    // a gap whose constant is zero does not change the value
    const GapSet split = GapSet::finite({{-2, 0.1}, {0.3, 2}});
    CHECK(thm1_constant(0.75, std::vector<double>{1.0, 0.0}, split) == doctest::Approx(thm1_constant(0.75, c0, free_set)).epsilon(1e-15));
    CHECK(thm2_constant(2.0, std::vector<double>{0.25, 0.75}) == doctest::Approx(12.7279).epsilon(1e-5));
    CHECK(thm2_constant(2.0, std::vector<double>{0.0, 0.0}) == 0.0);
}

TEST_CASE("outer constant of the free set") {
    const ReflectionlessMeasure arc(free_set, std::vector<double>{});
    const GapConstants meas = fit_gap_constants(free_set, ConstantSource::measure, &arc);
    const GapConstants torus = fit_gap_constants(free_set, ConstantSource::torus);
    CHECK(torus.schatten[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(meas.schatten[0] == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(meas.schatten[0] <= 0.5);
    const GapSet set = GapSet::infinite_band(powers(0.5, 6), {-2, 2});
    const ReflectionlessMeasure mu(set, GammaRule::alpha);
    const GapConstants c = fit_gap_constants(set, ConstantSource::measure, &mu);
    for (double v : c.trace_class) CHECK(v >= 0.0);
}

TEST_CASE("single reports on worked perturbations") {
    VerifyOptions opt;
    const JacobiCoeffs free_j = arcsine_coefficients({-2, 2}, 1600);
    const GapConstants gc = fit_gap_constants(free_set, ConstantSource::torus);
    const BoundReport r = verify_trace_class_bound(free_j, Perturbation{{}, {3.0}}, 0.75, free_set, gc.trace_class, opt);
    CHECK(r.pass);
    CHECK(r.lhs == doctest::Approx(std::pow(std::sqrt(13.0) - 2.0, 0.75)).epsilon(1e-9));
    CHECK(verify_trace_class_bound(free_j, Perturbation{}, 0.75, free_set, gc.trace_class, opt).pass);

    // small perturbation: both forms hold
    const BoundReport s = verify_schatten_bound(free_j, Perturbation{{}, {0.1}}, 1.5, free_set, gc.schatten, opt);
    const BoundReport t = verify_trace_class_bound(free_j, Perturbation{{}, {0.1}}, 0.75, free_set, gc.trace_class, opt);
    CHECK(s.pass);
    CHECK(t.pass);
    CHECK(verify_schatten_bound(free_j, Perturbation{}, 1.5, free_set, gc.schatten, opt).pass);

    // Green bound on the infinite band set
    const GapSet inf = GapSet::infinite_band(powers(0.5, 10), {-2, 2});
    const GreenFunction g(solve_equilibrium(inf));
    const JacobiCoeffs jp = stieltjes_coefficients(g.equilibrium().measure, 1600);
    const GreenLevelConstants lc = green_level_constants(g);
    CHECK(lc.g_ratio.size() == 11);
    CHECK(lc.multiplicity[3] == 1.0);
    const BoundReport gr = verify_green_bound(jp, Perturbation{{}, {1.0}}, 2.0, g, lc, opt);
    CHECK(gr.pass);
    CHECK(gr.name == "green");
    CHECK(verify_green_bound(jp, Perturbation{}, 2.0, g, lc, opt).lhs == 0.0);
}

TEST_CASE("Birman-Schwinger edge cases") {
    const JacobiCoeffs jp = arcsine_coefficients({-2, 2}, 200);
    const auto spec = eig_tridiag(jp);
    // the window above the top eigenvalue of the section
    const double gm = spec.back() + 0.1, gp = 10.0;
    const BirmanSchwingerResult z = birman_schwinger_check(jp, Perturbation{}, gm, gp);
    CHECK(z.count == 0);
    CHECK(z.pass);
    for (double v : {0.5, 5.0, 50.0}) {
        const BirmanSchwingerResult r = birman_schwinger_check(jp, Perturbation{{0.2}, {v, v}}, gm, gp);
        CHECK(r.pass);
        CHECK(static_cast<double>(r.count) <= r.bound);
    }
}

TEST_CASE("fitted level constants are stable in the construction depth") {
    for (int K : {6, 8, 10, 12}) {
        const GapSet set = GapSet::infinite_band(powers(0.5, K), {-2, 2});
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int k = 1; k <= K; ++k) {
            const double f = band_cantor_estimate_check(set, k).fitted;
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
        CHECK(hi / lo < 10.0);
    }
    for (int K = 2; K <= 10; K += 2) {
        const GapSet set = GapSet::cantor(powers(0.25, K), {-2, 2});
        for (int k = 1; k <= K; ++k) CHECK(band_cantor_estimate_check(set, k, 16).fitted < 10.0);
    }
}

TEST_CASE("Cantor lemma worked cases") {
    const GapSet one = GapSet::cantor({1.0 / 3.0}, {-2, 2});
    const CantorLemmaReport r1 = cantor_lemma_products(one, 0.0, std::vector<double>{0.1});
    CHECK(r1.a_product == 1.0);
    CHECK(r1.a_bound >= 1.0);
    CHECK(r1.pass);

    const GapSet set = GapSet::cantor(powers(1.0 / 3.0, 8), {-2, 2});
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> gamma;
    for (const auto& g : set.gaps()) gamma.push_back(g.lo + u(rng) * g.length());
    const Gap& g5 = set.gaps()[set.gaps_at_level(5).front()];
    const CantorLemmaReport r = cantor_lemma_products(set, g5.center(), gamma);
    CHECK(r.level == 5);
    CHECK(r.pass);
    double c = 1.0;
    for (double e : set.epsilons()) c *= 1.0 - e;
    CHECK(r.c == doctest::Approx(c).epsilon(1e-15));
}
