#include "henon/cantor.hpp"

#include <algorithm>
#include <cmath>

namespace henon {

namespace {

// Repeatedly keeps [lo, lo + r1 L] and [hi - r2 L, hi] of every interval.
IntervalSet refine(double r1, double r2, int level, double scale) {
  if (level < 0) throw Error(ErrorCode::InvalidArgument, "level must be non-negative");
  std::vector<Interval> cur{{0.0, scale}};
  for (int k = 0; k < level; ++k) {
    std::vector<Interval> next;
    next.reserve(2 * cur.size());
    for (const auto& iv : cur) {
      const double L = iv.length();
      next.push_back({iv.lo, iv.lo + r1 * L});
      next.push_back({iv.hi - r2 * L, iv.hi});
    }
    cur = std::move(next);
  }
  return IntervalSet{std::move(cur), level};
}

}  // namespace

IntervalSet middle_third(int level, bool integer_scale) {
  // With the scale 3^level every product r L below is an integer, so the
  // arithmetic is exact.
  return refine(1.0 / 3.0, 1.0 / 3.0, level, integer_scale ? std::pow(3.0, level) : 1.0);
}

IntervalSet middle_fifth(int level, bool integer_scale) {
  return refine(0.4, 0.4, level, integer_scale ? std::pow(5.0, level) : 1.0);
}

IntervalSet self_similar(double r1, double r2, int level) {
  if (!(r1 > 0.0 && r2 > 0.0 && r1 + r2 < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "need positive ratios with r1 + r2 < 1");
  }
  return refine(r1, r2, level, 1.0);
}

IntervalSet affine_image(const IntervalSet& k, double alpha, double beta) {
  if (alpha == 0.0) throw Error(ErrorCode::InvalidArgument, "affine factor must be nonzero");
  std::vector<Interval> out;
  out.reserve(k.size());
  for (const auto& iv : k.intervals) {
    const double a = alpha * iv.lo + beta, b = alpha * iv.hi + beta;
    out.push_back({std::min(a, b), std::max(a, b)});
  }
  if (alpha < 0.0) std::reverse(out.begin(), out.end());
  return IntervalSet{std::move(out), k.level};
}

std::string to_string(ProductClass c) {
  return c == ProductClass::ProductExceedsOne ? "ProductExceedsOne" : "ProductAtMostOne";
}

std::string to_string(GeometricClass c) {
  switch (c) {
    case GeometricClass::K1InGapOfK2: return "K1InGapOfK2";
    case GeometricClass::K2InGapOfK1: return "K2InGapOfK1";
    case GeometricClass::NonemptyIntersection: return "NonemptyIntersection";
    case GeometricClass::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

}  // namespace henon
