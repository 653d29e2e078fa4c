#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>

#include "henon/renorm.hpp"

using namespace henon;

namespace {

const TangencyRecord& record_005() {
  static const TangencyRecord rec = solve_tangency(0.05, -2.0);
  return rec;
}

const RenormFrame& frame_005(int n) {
  static std::map<int, RenormFrame> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_frame(record_005(), n)).first;
  return it->second;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(LimitFamily, Examples) {
  const auto a = limit_family_eval(-2.0, {2.0, 2.0});
  EXPECT_EQ(a.x, 2.0);
  EXPECT_EQ(a.y, 2.0);
  const auto b = limit_family_eval(0.0, {0.0, 0.0});
  EXPECT_EQ(b.x, 0.0);
  EXPECT_EQ(b.y, 0.0);
  const auto c = limit_family_eval(-2.0, {0.0, -2.0});
  EXPECT_EQ(c.x, -2.0);
  EXPECT_EQ(c.y, 2.0);
}

TEST(LimitFamily, DataAtMinusTwo) {
  const auto d = limit_family_data(-2.0);
  EXPECT_NEAR(d.fixed_point.x, 2.0, 1e-15);
  EXPECT_NEAR(d.fixed_point.y, 2.0, 1e-15);
  EXPECT_NEAR(d.slope_fixed, -1.0 / 3.0, 1e-12);
  EXPECT_NEAR(d.slope_endpoint, -3.0, 1e-12);
  EXPECT_NEAR(d.endpoint.x, -2.0, 1e-15);
  EXPECT_NEAR(d.endpoint.y, 2.0, 1e-15);
}

TEST(LimitFamily, DataAtZeroAndBoundary) {
  const auto d = limit_family_data(0.0);
  EXPECT_EQ(d.fixed_point.x, 1.0);
  EXPECT_EQ(d.slope_fixed, -1.0);
  EXPECT_EQ(d.slope_endpoint, 1.0);
  const auto q = limit_family_data(0.25);
  EXPECT_TRUE(std::isinf(q.slope_fixed));
  EXPECT_LT(q.slope_fixed, 0.0);
  EXPECT_EQ(code_of([] { limit_family_data(0.2500001); }), ErrorCode::NoRealFixedPoints);
}

TEST(LimitFamily, ClosedFormsMatchDifferences) {
  for (double ab : {-2.1, -2.0, -1.5, -0.3, 0.1}) {
    const double h = 1e-5;
    const auto d = limit_family_data(ab);
    const double fd_fixed = (limit_family_data(ab + h).fixed_point.y - limit_family_data(ab - h).fixed_point.y) / (2 * h);
    const double fd_end = (limit_family_data(ab + h).endpoint.y - limit_family_data(ab - h).endpoint.y) / (2 * h);
    EXPECT_NEAR(fd_fixed, d.slope_fixed, 1e-8);
    EXPECT_NEAR(fd_end, d.slope_endpoint, 1e-8);
    // The fixed point really is fixed.
    const auto img = limit_family_eval(ab, d.fixed_point);
    EXPECT_NEAR(img.y, d.fixed_point.y, 1e-14);
  }
}

TEST(LimitFamily, VelocityGapClosedForm) {
  const auto r = leaf_velocity_gap(0.0, LimitMode{}, {-2.0, -2.05});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0].slope_stable, -1.0 / 3.0, 1e-12);
  EXPECT_NEAR(r[0].slope_unstable, -3.0, 1e-12);
  EXPECT_NEAR(r[0].gap, 8.0 / 3.0, 1e-12);
  EXPECT_NEAR(r[1].slope_stable, -1.0 / std::sqrt(9.2), 1e-12);
  EXPECT_NEAR(r[1].slope_unstable, -3.1, 1e-12);
  EXPECT_GT(r[1].gap, 2.0);
}

TEST(AffineFrames, InverseRoundTrip) {
  AffinePlaneMap m{{1, -2}, {HighReal("1e-20"), 3}, {2, HighReal("0.5")}};
  const HighPoint z{HighReal("0.3"), HighReal("-1.7")};
  const HighPoint back = m.inverse(m.apply(z));
  EXPECT_LT(static_cast<double>(abs(back.x - z.x)), 1e-90);
  EXPECT_LT(static_cast<double>(abs(back.y - z.y)), 1e-90);
  AffinePlaneMap bad{{0, 0}, {1, 2}, {2, 4}};
  EXPECT_EQ(code_of([&] { bad.inverse(z); }), ErrorCode::IllConditioned);
}

TEST(LimitSelfTest, SeedIsIdentity) {
  auto fam = std::make_shared<const LimitFamily>();
  const auto fr = seed_frame(fam, -1.95, {2.1, 2.05});
  EXPECT_LT(static_cast<double>(abs(fr.affine_in.origin.x)), 1e-30);
  EXPECT_LT(static_cast<double>(abs(fr.affine_in.origin.y)), 1e-30);
  EXPECT_NEAR(static_cast<double>(fr.affine_in.e1.x), 1.0, 1e-30);
  EXPECT_NEAR(static_cast<double>(fr.affine_in.e2.y), 1.0, 1e-30);
  EXPECT_LT(static_cast<double>(abs(fr.affine_in.e1.y) + abs(fr.affine_in.e2.x)), 1e-30);
  EXPECT_NEAR(static_cast<double>(fr.affine_param.slope), 1.0, 1e-30);
  EXPECT_LT(static_cast<double>(abs(fr.affine_param.offset)), 1e-30);
}

TEST(LimitSelfTest, ResidualVanishes) {
  auto fam = std::make_shared<const LimitFamily>();
  const auto fr = fit_frame(seed_frame(fam, -1.95, {2.1, 2.05}));
  EXPECT_LE(fr.fit.residual_c0, 1e-10);
  EXPECT_LE(fr.fit.residual_c1, 1e-10);
  EXPECT_GE(fr.fit.sample_count, 256);
}

TEST(LimitSelfTest, TooFewSamples) {
  auto fam = std::make_shared<const LimitFamily>();
  const auto fr = seed_frame(fam, -2.0, {2.0, 2.0});
  EXPECT_EQ(code_of([&] { quadratic_fit_residual(fr, 100); }), ErrorCode::InvalidArgument);
}

TEST(HenonFrames, TransitTimeIsStable) {
  const int n = transit_time(record_005());
  EXPECT_GT(n, 0);
  EXPECT_EQ(frame_005(0).return_time, n);
  EXPECT_EQ(frame_005(2).return_time, n + 2);
}

TEST(HenonFrames, ResidualFiniteAndRecorded) {
  const auto& fr = frame_005(0);
  EXPECT_TRUE(std::isfinite(fr.fit.residual_c0));
  EXPECT_GE(fr.fit.residual_c0, 0.0);
  EXPECT_GE(fr.fit.residual_c1, 0.0);
  EXPECT_GE(fr.fit.sample_count, 256);
  EXPECT_TRUE(fr.source_tangency.has_value());
}

TEST(HenonFrames, ResidualDecreasesOverFirstThreeN) {
  const double r0 = frame_005(0).fit.residual_c0;
  const double r1 = frame_005(1).fit.residual_c0;
  const double r2 = frame_005(2).fit.residual_c0;
  EXPECT_LT(r1, r0);
  EXPECT_LT(r2, r1);
}

TEST(HenonFrames, OutputWithinResidualOfPsi) {
  const auto& fr = frame_005(2);
  for (double ab : {-2.05, -1.95}) {
    for (double x : {-2.5, 0.7}) {
      for (double y : {-2.2, 0.1, 1.9}) {
        const auto out = renormalized_return_map(fr, ab, PlanePoint{x, y});
        const auto psi = limit_family_eval(ab, {x, y});
        EXPECT_LE(std::max(std::abs(out.x - psi.x), std::abs(out.y - psi.y)), fr.fit.residual_c0 * 1.5);
      }
    }
  }
}

TEST(HenonFrames, SaddleNearTwoTwo) {
  for (int n : {0, 4}) {
    const auto fp = renormalized_fixed_point(frame_005(n), -2.0);
    EXPECT_TRUE(fp.saddle);
    EXPECT_NEAR(fp.point.x, 2.0, 0.05);
    EXPECT_NEAR(fp.point.y, 2.0, 0.05);
  }
}

TEST(HenonFrames, FixedPointSlopeNearOneThird) {
  const auto r = leaf_velocity_gap(frame_005(4), {-2.0});
  EXPECT_NEAR(r[0].slope_stable, -1.0 / 3.0, 0.05);
}

TEST(HenonFrames, VelocityGapAboveTwo) {
  const auto& fr = frame_005(4);
  ASSERT_LE(fr.fit.residual_c0, 0.05);
  for (const auto& r : leaf_velocity_gap(fr, {-2.02, -2.0, -1.98})) EXPECT_GT(r.gap, 2.0) << "a_bar " << r.a_bar;
}

TEST(HenonFrames, EscapedBox) {
  const auto& fr = frame_005(1);
  EXPECT_EQ(code_of([&] { renormalized_return_map(fr, -2.0, PlanePoint{0.0, 40.0}); }), ErrorCode::EscapedBox);
  EXPECT_EQ(code_of([&] { renormalized_return_map(fr, -2.0, PlanePoint{0.0, 8.0}); }), ErrorCode::EscapedBox);
}

TEST(HenonFrames, FiniteModeReportsFrameUnavailable) {
  EXPECT_EQ(code_of([] { leaf_velocity_gap(0.05, NProxy{-3}, {-2.0}); }), ErrorCode::FrameUnavailable);
}
