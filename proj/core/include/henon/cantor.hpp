#pragma once

// Thickness of finite interval approximations of Cantor sets and the Gap
// Lemma test. Templated on the scalar so the horseshoe slice can stay in
// extended precision.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "henon/error.hpp"

namespace henon {

template <class Real>
struct BasicInterval {
  Real lo{};
  Real hi{};
  Real length() const { return hi - lo; }
  friend bool operator==(const BasicInterval&, const BasicInterval&) = default;
};

template <class Real>
struct BasicIntervalSet {
  std::vector<BasicInterval<Real>> intervals;  // sorted, pairwise disjoint
  int level = -1;                              // construction level when known

  std::size_t size() const { return intervals.size(); }
  bool empty() const { return intervals.empty(); }

  BasicInterval<Real> hull() const {
    if (intervals.empty()) throw Error(ErrorCode::InvalidArgument, "empty interval set has no hull");
    return {intervals.front().lo, intervals.back().hi};
  }

  /// Sorted, non-degenerate and pairwise disjoint.
  bool valid() const {
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      if (!(intervals[i].lo <= intervals[i].hi)) return false;
      if (i > 0 && !(intervals[i - 1].hi < intervals[i].lo)) return false;
    }
    return true;
  }

  bool contains(const Real& x) const {
    for (const auto& iv : intervals) {
      if (x >= iv.lo && x <= iv.hi) return true;
    }
    return false;
  }
};

using Interval = BasicInterval<double>;
using IntervalSet = BasicIntervalSet<double>;

/// Sorts and validates; raises InvalidArgument on overlap or reversed ends.
template <class Real>
BasicIntervalSet<Real> make_interval_set(std::vector<BasicInterval<Real>> ivs, int level = -1) {
  std::sort(ivs.begin(), ivs.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
  BasicIntervalSet<Real> s{std::move(ivs), level};
  if (!s.valid()) throw Error(ErrorCode::InvalidArgument, "intervals must be disjoint with lo <= hi");
  return s;
}

enum class Side { left, right };

template <class Real>
struct BasicWitness {
  std::size_t gap = 0;  // gap between intervals gap and gap + 1
  Side side = Side::left;
  Real point{};         // boundary point of the gap
  BasicInterval<Real> gap_interval;
  BasicInterval<Real> bridge;
  Real ratio{};         // |bridge| / |gap|
};

template <class Real>
struct BasicThicknessReport {
  Real tau{};
  bool infinite = false;  // no bounded gaps
  std::vector<BasicWitness<Real>> witnesses;
  std::size_t min_witness = 0;
};

using Witness = BasicWitness<double>;
using ThicknessReport = BasicThicknessReport<double>;

/// Exact thickness of a finite union of intervals. A gap blocks a bridge when
/// its length is at least the current gap's length. O(n) with two monotonic
/// stacks.
template <class Real>
BasicThicknessReport<Real> thickness(const BasicIntervalSet<Real>& k) {
  BasicThicknessReport<Real> rep;
  const std::size_t n = k.size();
  if (n < 2) {
    rep.infinite = true;
    rep.tau = std::numeric_limits<Real>::has_infinity ? std::numeric_limits<Real>::infinity()
                                                      : std::numeric_limits<Real>::max();
    return rep;
  }
  const std::size_t m = n - 1;
  std::vector<Real> g(m);
  for (std::size_t i = 0; i < m; ++i) g[i] = k.intervals[i + 1].lo - k.intervals[i].hi;

  // left_start[i]: the nearest gap j < i with g[j] >= g[i] blocks; the bridge starts at
  // interval j + 1, or at the first interval when none exists.
  std::vector<std::size_t> left_start(m), right_end(m);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < m; ++i) {
    while (!stack.empty() && g[stack.back()] < g[i]) stack.pop_back();
    left_start[i] = stack.empty() ? 0 : stack.back() + 1;
    stack.push_back(i);
  }
  stack.clear();
  for (std::size_t i = m; i-- > 0;) {
    while (!stack.empty() && g[stack.back()] < g[i]) stack.pop_back();
    right_end[i] = stack.empty() ? n - 1 : stack.back();
    stack.push_back(i);
  }

  rep.witnesses.reserve(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    const BasicInterval<Real> gap{k.intervals[i].hi, k.intervals[i + 1].lo};
    BasicWitness<Real> wl;
    wl.gap = i;
    wl.side = Side::left;
    wl.point = gap.lo;
    wl.gap_interval = gap;
    wl.bridge = {k.intervals[left_start[i]].lo, gap.lo};
    wl.ratio = wl.bridge.length() / g[i];
    BasicWitness<Real> wr = wl;
    wr.side = Side::right;
    wr.point = gap.hi;
    wr.bridge = {gap.hi, k.intervals[right_end[i]].hi};
    wr.ratio = wr.bridge.length() / g[i];
    rep.witnesses.push_back(wl);
    rep.witnesses.push_back(wr);
  }
  rep.min_witness = 0;
  for (std::size_t i = 1; i < rep.witnesses.size(); ++i) {
    if (rep.witnesses[i].ratio < rep.witnesses[rep.min_witness].ratio) rep.min_witness = i;
  }
  rep.tau = rep.witnesses[rep.min_witness].ratio;
  return rep;
}

enum class ProductClass { ProductExceedsOne, ProductAtMostOne };
enum class GeometricClass { K1InGapOfK2, K2InGapOfK1, NonemptyIntersection, Undetermined };

template <class Real>
struct BasicGapLemmaResult {
  ProductClass product_class = ProductClass::ProductAtMostOne;
  GeometricClass geometry = GeometricClass::Undetermined;
  Real product{};
  bool linked = false;                    // hulls meet and neither lies in a gap of the other
  bool approximations_intersect = false;
  bool counterexample = false;            // lemma hypotheses hold yet the approximations are disjoint
};

using GapLemmaResult = BasicGapLemmaResult<double>;

/// Index of the bounded gap of k that contains [lo, hi] strictly, if any.
template <class Real>
std::optional<std::size_t> gap_containing(const BasicIntervalSet<Real>& k, const Real& lo, const Real& hi) {
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    if (lo > k.intervals[i].hi && hi < k.intervals[i + 1].lo) return i;
  }
  return std::nullopt;
}

/// Two-pointer sweep over both sorted lists.
template <class Real>
bool approximations_intersect(const BasicIntervalSet<Real>& a, const BasicIntervalSet<Real>& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const auto& x = a.intervals[i];
    const auto& y = b.intervals[j];
    if (x.hi < y.lo) {
      ++i;
    } else if (y.hi < x.lo) {
      ++j;
    } else {
      return true;
    }
  }
  return false;
}

/// Containment in a bounded gap is decided exactly from the approximations,
/// since the limit sets lie inside them. Nonempty intersection of the limit
/// sets is only asserted when the lemma forces it. Raises LevelTooCoarse when
/// either set has fewer than two intervals.
template <class Real>
BasicGapLemmaResult<Real> gap_lemma_predicate(const BasicIntervalSet<Real>& k1, const BasicIntervalSet<Real>& k2) {
  if (k1.size() < 2 || k2.size() < 2) {
    throw Error(ErrorCode::LevelTooCoarse, "each set needs at least one bounded gap");
  }
  BasicGapLemmaResult<Real> r;
  const auto t1 = thickness(k1);
  const auto t2 = thickness(k2);
  r.product = t1.tau * t2.tau;
  r.product_class = r.product > 1 ? ProductClass::ProductExceedsOne : ProductClass::ProductAtMostOne;
  const auto h1 = k1.hull();
  const auto h2 = k2.hull();
  const bool hulls_meet = !(h1.hi < h2.lo || h2.hi < h1.lo);
  const bool k1_in_gap = gap_containing(k2, h1.lo, h1.hi).has_value();
  const bool k2_in_gap = gap_containing(k1, h2.lo, h2.hi).has_value();
  r.linked = hulls_meet && !k1_in_gap && !k2_in_gap;
  r.approximations_intersect = approximations_intersect(k1, k2);
  if (k1_in_gap) {
    r.geometry = GeometricClass::K1InGapOfK2;
  } else if (k2_in_gap) {
    r.geometry = GeometricClass::K2InGapOfK1;
  } else if (r.product_class == ProductClass::ProductExceedsOne && r.linked) {
    if (r.approximations_intersect) {
      r.geometry = GeometricClass::NonemptyIntersection;
    } else {
      r.counterexample = true;
    }
  }
  return r;
}

/// Middle-third construction at `level`; with `integer_scale` the endpoints
/// are multiplied by 3^level so every endpoint is an exact integer.
IntervalSet middle_third(int level, bool integer_scale = true);

/// Removes the central fifth of every interval; scaled by 5^level when
/// `integer_scale` is set.
IntervalSet middle_fifth(int level, bool integer_scale = true);

/// Two-branch self-similar set on [0, 1] with left piece [0, r1] and right
/// piece [1 - r2, 1], refined `level` times.
IntervalSet self_similar(double r1, double r2, int level);

/// Affine image alpha K + beta (orientation reversed for alpha < 0).
IntervalSet affine_image(const IntervalSet& k, double alpha, double beta);

std::string to_string(ProductClass c);
std::string to_string(GeometricClass c);

}  // namespace henon
