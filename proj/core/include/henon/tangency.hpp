#pragma once

// The split function theta_{a,b}, the height H(a,b) of the unstable fold above
// the straightened stable manifold, and its zero set h(b).
//
// l_{a,b} is the arc of the left unstable branch through its second crossing
// of x = 0, written as a graph y = zeta(t) over |x| <= delta. Its image
// l^1 = phi(l) folds over S_{a,b}; after (x, y) -> (x, y - eta(x)) the fold
// height is theta(t) = a - b t + zeta(t)^2 - eta(zeta(t)).

#include <optional>
#include <string>
#include <vector>

#include "henon/core.hpp"
#include "henon/curve.hpp"
#include "henon/manifold.hpp"

namespace henon {

struct ThetaValue {
  double theta = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double zeta = 0.0;
  double s = 0.0;  // unstable-branch parameter of (t, zeta(t))
};

/// Everything needed to evaluate theta at fixed (a, b).
class SplitFunction {
 public:
  explicit SplitFunction(const Params& p, int crossing = 2);

  const Params& params() const { return params_; }
  const UnstableCurve& unstable() const { return w_; }
  const StableGraph& stable() const { return eta_; }
  double crossing_parameter() const { return s0_; }

  /// theta and its t-derivatives; `s_guess` seeds the solve of W_x(s) = t.
  ThetaValue eval(double t, std::optional<double> s_guess = std::nullopt) const;

 private:
  Params params_;
  UnstableCurve w_;
  StableGraph eta_;
  double s0_ = 0.0;
};

struct ThetaProfile {
  Params params;
  double delta = 0.0;
  std::vector<double> ts;
  std::vector<double> values;
  double t_star = 0.0;
  double theta_star = 0.0;
  double second_deriv = 0.0;
  double s_star = 0.0;
  PlanePoint fold_point;  // q = phi(t_star, zeta(t_star)) on l^1
};

inline constexpr double kDefaultDelta = 0.2;

/// Dense samples of theta on [-delta, delta] plus a Newton-polished interior
/// maximum. Raises NoInteriorMax when the largest sample sits on the boundary.
ThetaProfile theta_profile(const Params& p, double delta = kDefaultDelta, int grid = 401);

/// H(a, b) = max theta.
double split_function_H(const Params& p, double delta = kDefaultDelta);

/// H(a, 0) = a^2 + a - (1 + sqrt(1 - 4a)) / 2.
double split_function_H_at_zero_b(double a);

/// Central difference of H in a.
double dH_da(const Params& p, double da = 1e-5);
double dH_db(const Params& p, double db = 1e-6);

enum class TangencyKind { homoclinic, heteroclinic };

struct TangencyRecord {
  Params params;
  PlanePoint point;
  double t_star = 0.0;
  double second_deriv = 0.0;
  double unfolding_speed = 0.0;  // dH/da
  TangencyKind kind = TangencyKind::homoclinic;
  double residual = 0.0;          // |H| at the solution
  int iterations = 0;
  double dh_db_fd = 0.0;          // finite difference of the solved curve
  double dh_db_ift = 0.0;         // -H_b / H_a
  bool converged = false;
  std::string failure;            // empty on success
};

struct TangencySolveOptions {
  double tol = 1e-12;
  int max_iter = 50;
  double delta = kDefaultDelta;
  bool check_slope = true;
  double a_min = -2.15;  // validated window for the a-search
  double a_max = -1.85;
};

/// Newton in a on H(a, b) = 0 for each b, seeded by continuation. A failure is
/// recorded in its record and the sweep goes on.
std::vector<TangencyRecord> solve_tangency_curve(const std::vector<double>& b_values, double a_seed,
                                                 const TangencySolveOptions& opt = {});

/// Single solve; raises NewtonDiverged on failure.
TangencyRecord solve_tangency(double b, double a_seed, const TangencySolveOptions& opt = {});

/// Central difference of the fold gap H in a at the record's parameters.
double unfolding_speed(const TangencyRecord& record, double da = 1e-5);

/// Oriented segment across both curves. The tube is every point whose
/// coordinate along the perpendicular of `direction` lies within
/// `half_width` of `origin`.
struct Transversal {
  PlanePoint origin;
  Vec2 direction = Vec2(0.0, 1.0);
  double half_width = 0.1;
};

struct QuadraticContact {
  PlanePoint point;
  double normal_gap = 0.0;           // signed gap of c2 above c1 at the extremum
  double relative_curvature = 0.0;   // A in g(u) = A u^2 + B u + C
  double u_extremum = 0.0;
  bool tangent = false;
};

/// Fits the local model of a generic unfolding, g(u) = v2(u) - v1(u), with
/// (u, v) the frame of c1 where it crosses the transversal. Returns nothing
/// when the curves do not both cross the tube. Raises NotGraphLike when a
/// curve folds inside the tube.
std::optional<QuadraticContact> detect_quadratic_tangency(const CurveSegment& c1, const CurveSegment& c2,
                                                          const Transversal& transversal, double tol = 1e-6,
                                                          double min_curvature = 1e-3);

/// The curve Psi(l^1) written over the fold parameter, (t, theta(t)) on
/// |t - t_star| <= half_window; its contact with y = 0 is the tangency.
CurveSegment straightened_fold(const Params& p, double half_window, int nodes = 201);

struct VelocityGapReport {
  double a_bar = 0.0;
  double slope_stable = 0.0;
  double slope_unstable = 0.0;
  double gap = 0.0;
};

/// Slopes of the limit family: -1/sqrt(1 - 4 a) and 2 a + 1.
std::vector<VelocityGapReport> leaf_velocity_gap_limit(const std::vector<double>& a_bar_values);

}  // namespace henon
