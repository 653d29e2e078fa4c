#include <gtest/gtest.h>

#include <cmath>

#include "henon/tangency.hpp"

using namespace henon;

TEST(ThetaProfile, ClosedFormAtZeroB) {
  for (double a : {-2.1, -2.0, -1.9}) {
    const auto prof = theta_profile(Params{a, 0.0});
    EXPECT_NEAR(prof.t_star, 0.0, 1e-8);
    EXPECT_NEAR(prof.second_deriv, 4.0 * a, 1e-8);
    EXPECT_NEAR(prof.theta_star, split_function_H_at_zero_b(a), 1e-10);
    // theta(t) = a + (t^2 + a)^2 - y_{a,0} on the whole window
    const double y0 = fixed_point_coordinate(Params{a, 0.0}, Root::plus);
    for (std::size_t i = 0; i < prof.ts.size(); i += 40) {
      const double t = prof.ts[i];
      EXPECT_NEAR(prof.values[i], a + (t * t + a) * (t * t + a) - y0, 1e-10);
    }
  }
  EXPECT_NEAR(theta_profile(Params{-2.0, 0.0}).second_deriv, -8.0, 1e-8);
}

TEST(ThetaProfile, ValueAtMinusOnePointNine) {
  EXPECT_NEAR(split_function_H(Params{-1.9, 0.0}), 1.71 - 0.5 * (1.0 + std::sqrt(8.6)), 1e-10);
  EXPECT_NEAR(split_function_H(Params{-1.9, 0.0}), -0.25629, 1e-5);
}

TEST(ThetaProfile, SmallPositiveB) {
  const auto prof = theta_profile(Params{-2.0, 0.02});
  EXPECT_LE(std::abs(prof.t_star), 0.05);
  EXPECT_NEAR(prof.second_deriv, -8.0, 0.5);
}

TEST(ThetaProfile, BoundaryMaximumRaises) {
  // at b = 0.05 the maximum sits near t = -0.015, outside a 0.005 window
  try {
    theta_profile(Params{-2.0, 0.05}, 0.005, 11);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoInteriorMax);
  }
}

TEST(SplitFunction, HZeroAndSlope) {
  EXPECT_NEAR(split_function_H(Params{-2.0, 0.0}), 0.0, 1e-10);
  EXPECT_NEAR(dH_da(Params{-2.0, 0.0}), -8.0 / 3.0, 1e-6);
}

TEST(SplitFunction, AnalyticDerivativesMatchFiniteDifferences) {
  const SplitFunction f(Params{-2.0, 0.05});
  for (double t : {-0.1, 0.0, 0.07}) {
    const double h = 1e-5;
    const auto v = f.eval(t), vp = f.eval(t + h), vm = f.eval(t - h);
    EXPECT_NEAR((vp.theta - vm.theta) / (2 * h), v.d1, 1e-7);
    EXPECT_NEAR((vp.d1 - vm.d1) / (2 * h), v.d2, 1e-6);
  }
}

TEST(TangencyCurve, ZeroBIsExact) {
  const auto recs = solve_tangency_curve({0.0}, -2.0);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_TRUE(recs[0].converged);
  EXPECT_EQ(recs[0].params.a, -2.0);
}

TEST(UnfoldingSpeed, AtOrigin) {
  const auto rec = solve_tangency(0.0, -2.0);
  EXPECT_NEAR(unfolding_speed(rec, 1e-5), -8.0 / 3.0, 1e-3);
  const double s1 = unfolding_speed(rec, 1e-3), s2 = unfolding_speed(rec, 5e-4);
  EXPECT_LE(std::abs(s1 - s2) / std::abs(s2), 1e-2);
}

TEST(DetectTangency, ParabolaOnLine) {
  std::vector<PlanePoint> line, para, para_up;
  for (int i = -1000; i <= 1000; ++i) {
    const double x = i * 1e-3;
    line.push_back({x, 0.0});
    para.push_back({x, x * x});
    para_up.push_back({x, x * x + 0.1});
  }
  const Transversal tr{{0.0, 0.0}, Vec2(0.0, 1.0), 0.5};
  const auto c = detect_quadratic_tangency(make_curve_segment(line), make_curve_segment(para), tr);
  ASSERT_TRUE(c);
  EXPECT_TRUE(c->tangent);
  EXPECT_NEAR(c->relative_curvature, 1.0, 1e-6);
  EXPECT_NEAR(c->normal_gap, 0.0, 1e-6);
  EXPECT_NEAR(c->point.x, 0.0, 1e-6);
  const auto d = detect_quadratic_tangency(make_curve_segment(line), make_curve_segment(para_up), tr);
  ASSERT_TRUE(d);
  EXPECT_FALSE(d->tangent);
  EXPECT_NEAR(d->normal_gap, 0.1, 1e-6);
  // swapping the curves flips the gap and the curvature sign
  const auto e = detect_quadratic_tangency(make_curve_segment(para_up), make_curve_segment(line), tr);
  ASSERT_TRUE(e);
  EXPECT_NEAR(e->normal_gap, -0.1, 1e-3);
  EXPECT_NEAR(e->relative_curvature, -1.0, 1e-2);
}

TEST(DetectTangency, FoldInsideTubeRaises) {
  std::vector<PlanePoint> line, fold;
  for (int i = -100; i <= 100; ++i) line.push_back({i * 1e-2, 0.0});
  for (int i = -100; i <= 100; ++i) fold.push_back({0.3 * std::cos(i * 0.03), 0.5 + 0.3 * std::sin(i * 0.03)});
  const Transversal tr{{0.0, 0.0}, Vec2(0.0, 1.0), 0.5};
  try {
    detect_quadratic_tangency(make_curve_segment(line), make_curve_segment(fold), tr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotGraphLike);
  }
}

TEST(DetectTangency, StraightenedFoldAtSolvedTangency) {
  const auto rec = solve_tangency(0.02, -2.0);
  const auto fold = straightened_fold(rec.params, 0.01);
  std::vector<PlanePoint> axis;
  for (int i = -200; i <= 200; ++i) axis.push_back({rec.t_star + i * 1e-4, 0.0});
  const Transversal tr{{rec.t_star, 0.0}, Vec2(0.0, 1.0), 0.01};
  const auto c = detect_quadratic_tangency(make_curve_segment(axis), fold, tr);
  ASSERT_TRUE(c);
  EXPECT_TRUE(c->tangent);
  EXPECT_LE(std::abs(c->normal_gap), 1e-6);
  // A is half the second derivative of theta
  EXPECT_NEAR(2.0 * c->relative_curvature, -8.0, 0.5);
}

TEST(TangencyCurve, SmallB) {
  const std::vector<double> bs{0.01, -0.01, 0.02, -0.02, 0.05, -0.05};
  const auto recs = solve_tangency_curve(bs, -2.0);
  for (const auto& r : recs) {
    ASSERT_TRUE(r.converged) << r.failure;
    EXPECT_LE(r.residual, 1e-10);
    EXPECT_GE(r.second_deriv, -12.0);
    EXPECT_LE(r.second_deriv, -4.0);
    EXPECT_GE(std::abs(r.unfolding_speed), 1.0);
    std::printf("b=%+.2f h=%.15f h+2=%.3e ratio=%.3f d2=%.4f speed=%.4f fd=%.6f ift=%.6f it=%d\n", r.params.b,
                r.params.a, r.params.a + 2, (r.params.a + 2) / r.params.b, r.second_deriv, r.unfolding_speed,
                r.dh_db_fd, r.dh_db_ift, r.iterations);
  }
}

TEST(VelocityGap, LimitFamily) {
  const auto r = leaf_velocity_gap_limit({-2.0, -2.05});
  EXPECT_NEAR(r[0].slope_stable, -1.0 / 3.0, 1e-12);
  EXPECT_NEAR(r[0].slope_unstable, -3.0, 1e-12);
  EXPECT_NEAR(r[0].gap, 8.0 / 3.0, 1e-12);
  EXPECT_NEAR(r[1].slope_stable, -1.0 / std::sqrt(9.2), 1e-12);
  EXPECT_NEAR(r[1].slope_unstable, -3.1, 1e-12);
  EXPECT_GT(r[1].gap, 2.0);
}
