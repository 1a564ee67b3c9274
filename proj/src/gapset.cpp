#include "gapspec/gapset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "gapspec/error.hpp"

namespace gapspec {

std::string to_string(SetKind kind) {
    switch (kind) {
        case SetKind::finite: return "finite";
        case SetKind::infinite_band: return "infinite_band";
        case SetKind::cantor: return "cantor";
    }
    return "unknown";
}

namespace {

void check_outer(Interval outer) {
    if (!std::isfinite(outer.lo) || !std::isfinite(outer.hi) || !(outer.lo < outer.hi))
        throw ValidationError("outer interval must satisfy lo < hi");
}

void check_epsilons(std::span<const double> eps) {
    for (double e : eps)
        if (!(e > 0.0 && e < 1.0)) throw ValidationError("every epsilon must lie in (0,1)");
}

// b_k = b_0 (1-eps_1)...(1-eps_k) / 2^k, computed as a running product.
std::vector<double> band_lengths(std::span<const double> eps, double b0) {
    std::vector<double> b(eps.size() + 1);
    b[0] = b0;
    for (std::size_t k = 1; k <= eps.size(); ++k) b[k] = b[k - 1] * (1.0 - eps[k - 1]) * 0.5;
    return b;
}

}  // namespace

GapSet GapSet::finite(std::vector<Interval> bands) {
    if (bands.empty()) throw ValidationError("a gap set needs at least one band");
    for (const auto& b : bands) {
        if (!std::isfinite(b.lo) || !std::isfinite(b.hi)) throw ValidationError("band endpoints must be finite");
        if (!(b.lo < b.hi)) throw ValidationError("every band must have positive length");
    }
    std::sort(bands.begin(), bands.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (std::size_t i = 1; i < bands.size(); ++i)
        if (!(bands[i - 1].hi < bands[i].lo)) throw ValidationError("bands overlap or touch");

    GapSet s;
    s.kind_ = SetKind::finite;
    s.bands_ = std::move(bands);
    for (std::size_t i = 1; i < s.bands_.size(); ++i) s.gaps_.push_back({s.bands_[i - 1].hi, s.bands_[i].lo, 0});
    s.finalize();
    return s;
}

GapSet GapSet::infinite_band(std::vector<double> epsilons, Interval outer) {
    check_outer(outer);
    check_epsilons(epsilons);
    const std::size_t K = epsilons.size();
    GapSet s;
    s.kind_ = SetKind::infinite_band;
    s.band_len_ = band_lengths(epsilons, outer.length());
    s.gap_len_.resize(K);
    for (std::size_t k = 1; k <= K; ++k) s.gap_len_[k - 1] = epsilons[k - 1] * s.band_len_[k - 1];

    // Gap k is (beta0 + b_k, beta0 + b_{k-1}(1+eps_k)/2); gaps are listed left to right.
    std::vector<Gap> gaps(K);
    for (std::size_t k = 1; k <= K; ++k) {
        const double left = outer.lo + s.band_len_[k];
        const double right = outer.lo + 0.5 * s.band_len_[k - 1] * (1.0 + epsilons[k - 1]);
        gaps[K - k] = {left, right, static_cast<int>(k)};
    }
    s.bands_.reserve(K + 1);
    double lo = outer.lo;
    for (const auto& g : gaps) {
        s.bands_.push_back({lo, g.lo});
        lo = g.hi;
    }
    s.bands_.push_back({lo, outer.hi});
    for (const auto& b : s.bands_)
        if (!(b.lo < b.hi)) throw ValidationError("construction underflowed: band of zero length");
    s.gaps_ = std::move(gaps);
    s.epsilons_ = std::move(epsilons);
    s.finalize();
    return s;
}

GapSet GapSet::cantor(std::vector<double> epsilons, Interval outer, std::size_t band_cap) {
    check_outer(outer);
    check_epsilons(epsilons);
    const std::size_t K = epsilons.size();
    if (K >= 63 || (std::size_t{1} << K) > band_cap)
        throw ResourceError("Cantor truncation level exceeds the band-count cap");

    GapSet s;
    s.kind_ = SetKind::cantor;
    s.band_len_ = band_lengths(epsilons, outer.length());
    s.gap_len_.resize(K);
    for (std::size_t k = 1; k <= K; ++k) s.gap_len_[k - 1] = epsilons[k - 1] * s.band_len_[k - 1];

    // Left offsets of the 2^K bands relative to beta0. Choosing the right child
    // at level l adds b_{l-1} - b_l = b_{l-1}(1+eps_l)/2.
    std::vector<double> shift(K);
    for (std::size_t l = 1; l <= K; ++l) shift[l - 1] = 0.5 * s.band_len_[l - 1] * (1.0 + epsilons[l - 1]);
    const std::size_t nb = std::size_t{1} << K;
    s.bands_.resize(nb);
    for (std::size_t i = 0; i < nb; ++i) {
        double off = 0.0;
        for (std::size_t l = 1; l <= K; ++l)
            if ((i >> (K - l)) & 1U) off += shift[l - 1];
        const double lo = outer.lo + off;
        s.bands_[i] = {lo, (i + 1 == nb) ? outer.hi : lo + s.band_len_[K]};
    }
    s.gaps_.resize(nb - 1);
    for (std::size_t i = 0; i + 1 < nb; ++i) {
        const int level = static_cast<int>(K) - std::countr_zero(i + 1);
        s.gaps_[i] = {s.bands_[i].hi, s.bands_[i + 1].lo, level};
    }
    for (const auto& b : s.bands_)
        if (!(b.lo < b.hi)) throw ValidationError("construction underflowed: band of zero length");
    for (const auto& g : s.gaps_)
        if (!(g.lo < g.hi)) throw ValidationError("construction underflowed: gap of zero length");
    s.epsilons_ = std::move(epsilons);
    s.finalize();
    return s;
}

void GapSet::finalize() {
    prefix_measure_.assign(bands_.size() + 1, 0.0);
    for (std::size_t i = 0; i < bands_.size(); ++i) prefix_measure_[i + 1] = prefix_measure_[i] + bands_[i].length();
}

double GapSet::band_length(int k) const {
    if (kind_ == SetKind::finite || k < 0 || k > levels()) throw ValidationError("band level out of range");
    return band_len_[static_cast<std::size_t>(k)];
}

double GapSet::gap_length(int k) const {
    if (kind_ == SetKind::finite || k < 1 || k > levels()) throw ValidationError("gap level out of range");
    return gap_len_[static_cast<std::size_t>(k - 1)];
}

std::vector<std::size_t> GapSet::gaps_at_level(int k) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < gaps_.size(); ++i)
        if (gaps_[i].level == k) out.push_back(i);
    return out;
}

Location GapSet::locate(double x) const {
    Location loc;
    if (x < lo()) {
        loc.region = Location::Region::left;
        loc.dist = lo() - x;
        return loc;
    }
    if (x > hi()) {
        loc.region = Location::Region::right;
        loc.dist = x - hi();
        return loc;
    }
    // last band whose lo <= x
    auto it = std::upper_bound(bands_.begin(), bands_.end(), x,
                               [](double v, const Interval& b) { return v < b.lo; });
    const std::size_t i = static_cast<std::size_t>(std::distance(bands_.begin(), it)) - 1;
    if (x <= bands_[i].hi) {
        loc.region = Location::Region::in_band;
        loc.index = i;
        return loc;
    }
    const Gap& g = gaps_[i];
    loc.region = Location::Region::in_gap;
    loc.index = i;
    loc.level = g.level;
    loc.dist = std::min(x - g.lo, g.hi - x);
    return loc;
}

double GapSet::measure() const { return prefix_measure_.back(); }

double GapSet::measure_within(double a, double b) const {
    if (!(a < b)) return 0.0;
    // measure of E below y
    auto below = [&](double y) {
        if (y <= lo()) return 0.0;
        if (y >= hi()) return measure();
        auto it = std::upper_bound(bands_.begin(), bands_.end(), y,
                                   [](double v, const Interval& band) { return v < band.lo; });
        const std::size_t i = static_cast<std::size_t>(std::distance(bands_.begin(), it)) - 1;
        return prefix_measure_[i] + std::min(y, bands_[i].hi) - bands_[i].lo;
    };
    return below(b) - below(a);
}

SetDiagnostics GapSet::diagnostics(std::span<const double> delta_grid) const {
    if (delta_grid.empty()) throw ValidationError("delta grid must not be empty");
    for (double d : delta_grid)
        if (!(d > 0.0 && d < diameter())) throw ValidationError("delta values must lie in (0, diam E)");

    SetDiagnostics out;
    out.lebesgue_measure = measure();
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& band : bands_) {
        for (double x : {band.lo, band.center(), band.hi}) {
            for (double d : delta_grid) margin = std::min(margin, measure_within(x - d, x + d) / d);
        }
    }
    out.homogeneity_margin = margin;
    return out;
}

bool GapSet::contains_set(const GapSet& other, double tol) const {
    for (const auto& b : other.bands()) {
        const Location l = locate(b.center());
        if (!l.in_set()) return false;
        const Interval& host = bands_[l.index];
        if (b.lo < host.lo - tol || b.hi > host.hi + tol) return false;
    }
    return true;
}

}  // namespace gapspec
