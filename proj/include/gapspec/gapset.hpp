#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gapspec {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const noexcept { return hi - lo; }
    double center() const noexcept { return 0.5 * (lo + hi); }
    bool operator==(const Interval&) const = default;
};

// Open gap (lo, hi) inside the convex hull of the set. `level` is the
// construction level (1-based) for infinite-band and Cantor sets, 0 otherwise.
struct Gap {
    double lo = 0.0;
    double hi = 0.0;
    int level = 0;

    double length() const noexcept { return hi - lo; }
    double center() const noexcept { return 0.5 * (lo + hi); }
    bool operator==(const Gap&) const = default;
};

enum class SetKind { finite, infinite_band, cantor };

std::string to_string(SetKind kind);

struct Location {
    enum class Region { in_band, in_gap, left, right };
    Region region = Region::in_band;
    std::size_t index = 0;  // band index for in_band, gap index for in_gap
    int level = 0;          // construction level of the gap (in_gap only)
    double dist = 0.0;      // distance to the set

    bool in_set() const noexcept { return region == Region::in_band; }
    bool outside_hull() const noexcept { return region == Region::left || region == Region::right; }
};

struct SetDiagnostics {
    double lebesgue_measure = 0.0;
    double homogeneity_margin = 0.0;
};

inline constexpr std::size_t kDefaultBandCap = std::size_t{1} << 16;

// A compact set [lo, hi] minus finitely many disjoint open gaps: a finite
// gap set, or a level-K truncation of an infinite-band or middle-eps Cantor
// construction. Immutable after construction.
class GapSet {
  public:
    static GapSet finite(std::vector<Interval> bands);
    static GapSet infinite_band(std::vector<double> epsilons, Interval outer);
    static GapSet cantor(std::vector<double> epsilons, Interval outer,
                         std::size_t band_cap = kDefaultBandCap);

    double lo() const noexcept { return bands_.front().lo; }
    double hi() const noexcept { return bands_.back().hi; }
    double diameter() const noexcept { return hi() - lo(); }

    std::span<const Interval> bands() const noexcept { return bands_; }
    std::span<const Gap> gaps() const noexcept { return gaps_; }
    std::size_t band_count() const noexcept { return bands_.size(); }
    std::size_t gap_count() const noexcept { return gaps_.size(); }

    SetKind kind() const noexcept { return kind_; }
    std::span<const double> epsilons() const noexcept { return epsilons_; }
    // Number of construction levels K (0 for finite sets).
    int levels() const noexcept { return static_cast<int>(epsilons_.size()); }

    // Level tables from the exact recursions: band_length(k) = b_k for
    // k = 0..K and gap_length(k) = g_k for k = 1..K. Only for constructed sets.
    double band_length(int k) const;
    double gap_length(int k) const;

    std::vector<std::size_t> gaps_at_level(int k) const;

    Location locate(double x) const;
    double dist(double x) const { return locate(x).dist; }
    bool contains(double x) const { return locate(x).in_set(); }

    double measure() const;
    // Lebesgue measure of E intersected with (a, b).
    double measure_within(double a, double b) const;

    SetDiagnostics diagnostics(std::span<const double> delta_grid) const;

    // True when every band of `other` lies inside some band of this set.
    bool contains_set(const GapSet& other, double tol = 0.0) const;

    bool operator==(const GapSet& o) const {
        return kind_ == o.kind_ && epsilons_ == o.epsilons_ && bands_ == o.bands_ && gaps_ == o.gaps_;
    }

  private:
    GapSet() = default;
    void finalize();

    SetKind kind_ = SetKind::finite;
    std::vector<double> epsilons_;
    std::vector<Interval> bands_;
    std::vector<Gap> gaps_;
    std::vector<double> band_len_;  // b_0..b_K
    std::vector<double> gap_len_;   // g_1..g_K stored at index k-1
    std::vector<double> prefix_measure_;
};

}  // namespace gapspec
