#include <gtest/gtest.h>

#include <random>

#include "henon/cantor.hpp"

using namespace henon;

namespace {

// Direct transcription of the bridge definition: walk outward from the gap
// across intervals until a gap at least as long is met.
double brute_force_tau(const IntervalSet& k) {
  const auto& iv = k.intervals;
  const std::size_t n = iv.size();
  double tau = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double g = iv[i + 1].lo - iv[i].hi;
    std::size_t l = i;
    while (l > 0 && iv[l].lo - iv[l - 1].hi < g) --l;
    std::size_t r = i + 1;
    while (r + 1 < n && iv[r + 1].lo - iv[r].hi < g) ++r;
    tau = std::min(tau, (iv[i].hi - iv[l].lo) / g);
    tau = std::min(tau, (iv[r].hi - iv[i + 1].lo) / g);
  }
  return tau;
}

bool brute_force_intersect(const IntervalSet& a, const IntervalSet& b) {
  for (const auto& x : a.intervals) {
    for (const auto& y : b.intervals) {
      if (std::max(x.lo, y.lo) <= std::min(x.hi, y.hi)) return true;
    }
  }
  return false;
}

IntervalSet random_set(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> pts(2 * static_cast<std::size_t>(n));
  for (auto& p : pts) p = u(rng);
  std::sort(pts.begin(), pts.end());
  std::vector<Interval> ivs;
  for (int i = 0; i < n; ++i) ivs.push_back({pts[2 * i], pts[2 * i + 1]});
  return make_interval_set(std::move(ivs));
}

}  // namespace

TEST(Thickness, MiddleThirdIsOneAtEveryLevel) {
  for (int k = 1; k <= 10; ++k) {
    const auto s = middle_third(k);
    EXPECT_EQ(s.size(), std::size_t{1} << k);
    EXPECT_EQ(thickness(s).tau, 1.0) << k;
  }
}

TEST(Thickness, MiddleFifthIsTwoAtEveryLevel) {
  for (int k = 1; k <= 10; ++k) EXPECT_EQ(thickness(middle_fifth(k)).tau, 2.0) << k;
}

TEST(Thickness, UnscaledConstructionsAgree) {
  for (int k = 1; k <= 10; ++k) {
    EXPECT_NEAR(thickness(middle_third(k, false)).tau, 1.0, 1e-9);
    EXPECT_NEAR(thickness(middle_fifth(k, false)).tau, 2.0, 1e-9);
  }
}

TEST(Thickness, WitnessStructure) {
  const auto s = middle_third(3);
  const auto rep = thickness(s);
  EXPECT_EQ(rep.witnesses.size(), 2 * (s.size() - 1));
  double m = rep.witnesses.front().ratio;
  for (const auto& w : rep.witnesses) m = std::min(m, w.ratio);
  EXPECT_EQ(rep.tau, m);
  EXPECT_EQ(rep.witnesses[rep.min_witness].ratio, rep.tau);
  // the central gap of the first level has the left third as its bridge
  const auto& central = rep.witnesses[2 * (s.size() / 2 - 1)];
  EXPECT_EQ(central.bridge.lo, 0.0);
  EXPECT_EQ(central.bridge.hi, 9.0);
}

TEST(Thickness, SingleIntervalIsInfinite) {
  const auto rep = thickness(middle_third(0));
  EXPECT_TRUE(rep.infinite);
}

TEST(Thickness, MatchesBruteForceOnRandomSets) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const auto s = random_set(rng, 20);
    EXPECT_EQ(thickness(s).tau, brute_force_tau(s)) << i;
  }
}

TEST(Thickness, EqualGapsBlockBridges) {
  // gaps of equal length: the bridge stops at the equal gap
  const auto s = make_interval_set<double>({{0, 1}, {2, 3}, {4, 5}});
  EXPECT_EQ(thickness(s).tau, 1.0);
}

TEST(Thickness, AffineInvariance) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    const auto s = random_set(rng, 15);
    const double t = thickness(s).tau;
    EXPECT_NEAR(thickness(affine_image(s, 3.5, -2.0)).tau, t, 1e-9 * t);
    EXPECT_NEAR(thickness(affine_image(s, -0.25, 1.0)).tau, t, 1e-9 * t);
  }
  EXPECT_EQ(thickness(affine_image(middle_third(6), 2.0, 5.0)).tau, 1.0);
}

TEST(Thickness, CoarseningFollowsConstructionRatio) {
  for (int k = 2; k <= 8; ++k) {
    const double fine = thickness(self_similar(0.3, 0.4, k)).tau;
    const double coarse = thickness(self_similar(0.3, 0.4, k - 1)).tau;
    EXPECT_NEAR(fine, coarse, 1e-9);
    EXPECT_NEAR(fine, 0.3 / 0.3, 1e-9);
  }
}

TEST(GapLemma, MiddleFifthLinked) {
  const auto k1 = middle_fifth(10, false);
  const auto k2 = affine_image(k1, 1.0, 0.5);
  const auto r = gap_lemma_predicate(k1, k2);
  EXPECT_EQ(r.product_class, ProductClass::ProductExceedsOne);
  EXPECT_EQ(r.geometry, GeometricClass::NonemptyIntersection);
  EXPECT_TRUE(brute_force_intersect(k1, k2));
}

TEST(GapLemma, TranslateInsideCentralGap) {
  const auto k1 = middle_third(4, false);
  const auto k2 = affine_image(middle_third(4, false), 0.2, 0.4);
  const auto r = gap_lemma_predicate(k1, k2);
  EXPECT_EQ(r.geometry, GeometricClass::K2InGapOfK1);
  const auto r2 = gap_lemma_predicate(k2, k1);
  EXPECT_EQ(r2.geometry, GeometricClass::K1InGapOfK2);
}

TEST(GapLemma, MiddleThirdsAtEquality) {
  const auto k1 = middle_third(8);
  const auto k2 = affine_image(k1, 1.0, 1000.0);
  const auto r = gap_lemma_predicate(k1, k2);
  EXPECT_EQ(r.product_class, ProductClass::ProductAtMostOne);
  EXPECT_FALSE(r.counterexample);
}

TEST(GapLemma, CoarseLevelRaises) {
  try {
    gap_lemma_predicate(middle_third(0), middle_third(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LevelTooCoarse);
  }
}

TEST(GapLemma, NoCounterexamplesOnThickLinkedPairs) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ur(0.36, 0.45), us(0.5, 2.0), ut(-1.0, 1.0);
  int tested = 0, counterexamples = 0;
  while (tested < 100) {
    const auto k1 = self_similar(ur(rng), ur(rng), 10);
    const auto k2 = affine_image(self_similar(ur(rng), ur(rng), 10), us(rng), ut(rng));
    const auto r = gap_lemma_predicate(k1, k2);
    if (!r.linked || r.product_class != ProductClass::ProductExceedsOne) continue;
    ++tested;
    EXPECT_EQ(r.approximations_intersect, brute_force_intersect(k1, k2));
    if (r.counterexample || r.geometry != GeometricClass::NonemptyIntersection) ++counterexamples;
  }
  EXPECT_EQ(counterexamples, 0);
}
