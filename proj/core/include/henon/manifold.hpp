#pragma once

// Stable and unstable manifolds of the plus saddle.
//
// Near the saddle a polynomial chart P solves phi(P(s)) = P(mu s). Globally
// the unstable branch is W(s) = phi^n(P(s / sigma^n)) and the stable one is
// Q(s) = phi^{-n}(P(lambda^n s)), with n the smallest count that brings the
// chart argument inside the radius where P is accurate to rounding.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "henon/core.hpp"
#include "henon/curve.hpp"

namespace henon {

enum class ManifoldKind { stable, unstable };

/// Fixed point y and multipliers of the plus saddle in precision Real.
template <class Real>
struct BasicSaddle {
  Real y{};
  Real lambda{};
  Real sigma{};
};

template <class Real>
BasicSaddle<Real> saddle_in(const BasicParams<Real>& p) {
  using std::sqrt;
  const Real disc = (1 + p.b) * (1 + p.b) - 4 * p.a;
  if (disc < 0) throw Error(ErrorCode::NoRealFixedPoints, "negative discriminant");
  BasicSaddle<Real> s;
  s.y = (1 + p.b + sqrt(disc)) / 2;
  const Real inner = s.y * s.y - p.b;
  if (inner < 0) throw Error(ErrorCode::Degenerate, "complex multipliers at the plus fixed point");
  s.sigma = s.y + sqrt(inner);
  s.lambda = p.b / s.sigma;
  return s;
}

template <class Real>
struct BasicLocalChart {
  BasicPoint<Real> center;
  std::vector<BasicPoint<Real>> coeffs;  // coeffs[0] = center, coeffs[1] = unit eigenvector
  ManifoldKind kind = ManifoldKind::unstable;
  Real multiplier{};
  Real domain_radius{};  // conjugacy residual <= 1e-9 here
  Real eval_radius{};    // residual at rounding level here

  BasicPoint<Real> eval(const Real& s) const {
    BasicPoint<Real> r = coeffs.back();
    for (auto k = coeffs.size() - 1; k-- > 0;) r = coeffs[k] + s * r;
    return r;
  }

  Jet2<Real> jet(const Real& s) const {
    Jet2<Real> j;
    const auto K = coeffs.size() - 1;
    j.p = coeffs[K];
    for (auto k = K; k-- > 0;) {
      j.d2 = Real(2) * j.d1 + s * j.d2;
      j.d1 = j.p + s * j.d1;
      j.p = coeffs[k] + s * j.p;
    }
    return j;
  }

  Real residual(const BasicParams<Real>& p, const Real& s) const {
    using std::abs;
    using std::max;
    const auto lhs = apply(p, eval(s));
    const auto rhs = eval(multiplier * s);
    return max(abs(lhs.x - rhs.x), abs(lhs.y - rhs.y));
  }

  /// Max residual over `samples` equally spaced points of [-r, r].
  Real max_residual(const BasicParams<Real>& p, const Real& r, int samples = 64) const {
    using std::max;
    Real worst = 0;
    for (int i = 0; i < samples; ++i) {
      const Real s = -r + Real(2) * r * Real(i) / Real(samples - 1);
      worst = max(worst, residual(p, s));
    }
    return worst;
  }
};

using LocalChart = BasicLocalChart<double>;

/// Order-by-order solution of the conjugacy equation through `degree`.
/// Raises Degenerate for the stable chart at b = 0 and SmallDivisor when a
/// homological coefficient is numerically zero.
template <class Real>
BasicLocalChart<Real> make_local_chart(const BasicParams<Real>& p, ManifoldKind kind, int degree,
                                       const Real& domain_tol = Real(1e-9)) {
  using std::abs;
  using std::pow;
  using std::sqrt;
  if (degree < 1) throw Error(ErrorCode::InvalidArgument, "chart degree must be at least 1");
  const auto sd = saddle_in(p);
  if (!(abs(sd.lambda) < 1 && sd.sigma > 1)) {
    throw Error(ErrorCode::InvalidArgument, "plus fixed point is not a saddle");
  }
  if (kind == ManifoldKind::stable && p.b == 0) {
    throw Error(ErrorCode::Degenerate, "stable multiplier vanishes at b = 0; the stable set is the line y = y_{a,0}");
  }
  BasicLocalChart<Real> c;
  c.kind = kind;
  c.center = {sd.y, sd.y};
  const Real mu = kind == ManifoldKind::unstable ? sd.sigma : sd.lambda;
  c.multiplier = mu;
  const Real norm = sqrt(1 + mu * mu);
  c.coeffs.push_back(c.center);
  c.coeffs.push_back({1 / norm, mu / norm});
  const Real eps = std::numeric_limits<Real>::epsilon();
  for (int k = 2; k <= degree; ++k) {
    Real rhs = 0;
    for (int j = 1; j < k; ++j) rhs += c.coeffs[j].y * c.coeffs[k - j].y;
    const Real muk = pow(mu, k);
    const Real div = muk + p.b / muk - 2 * sd.y;
    const Real scale = abs(muk) + abs(p.b / muk) + 2 * abs(sd.y);
    if (abs(div) <= 1e3 * eps * scale) {
      throw Error(ErrorCode::SmallDivisor, "resonant homological coefficient at order " + std::to_string(k));
    }
    const Real yk = rhs / div;
    c.coeffs.push_back({yk / muk, yk});
  }
  // Radii by halving from a generous start; the residual grows like r^{K+1}.
  const Real round_tol = 64 * eps * (1 + abs(sd.y));
  Real r = 4;
  bool found_domain = false;
  for (int it = 0; it < 200; ++it, r /= 2) {
    const Real res = c.max_residual(p, r);
    if (!found_domain && res <= domain_tol) {
      c.domain_radius = r;
      found_domain = true;
    }
    if (res <= round_tol) {
      c.eval_radius = r;
      break;
    }
  }
  if (c.eval_radius == 0) throw Error(ErrorCode::Degenerate, "chart residual never reaches rounding level");
  if (!found_domain) c.domain_radius = c.eval_radius;
  return c;
}

/// Chart at the plus saddle of double-precision parameters.
LocalChart local_manifold_chart(const Params& p, ManifoldKind kind, int degree = 12);

/// Global unstable branch W(s) of the plus saddle. W(0) = p and W'(0) is the
/// unit unstable eigenvector; s < 0 is the left branch.
template <class Real>
class BasicUnstableCurve {
 public:
  BasicUnstableCurve(const BasicParams<Real>& p, BasicLocalChart<Real> chart)
      : params_(p), chart_(std::move(chart)) {
    if (chart_.kind != ManifoldKind::unstable) throw Error(ErrorCode::InvalidArgument, "unstable chart required");
  }

  const BasicParams<Real>& params() const { return params_; }
  const BasicLocalChart<Real>& chart() const { return chart_; }
  Real sigma() const { return chart_.multiplier; }

  int iterations_for(const Real& s) const {
    using std::abs;
    int n = 0;
    Real u = abs(s);
    while (u > chart_.eval_radius) {
      u /= chart_.multiplier;
      ++n;
    }
    return n;
  }

  BasicPoint<Real> eval(const Real& s) const {
    const int n = iterations_for(s);
    Real u = s;
    for (int i = 0; i < n; ++i) u /= chart_.multiplier;
    return iterate(params_, chart_.eval(u), n);
  }

  /// Jet in s. `escape` > 0 turns any iterate leaving that radius into NaN.
  Jet2<Real> jet(const Real& s, const Real& escape = Real(0)) const {
    const int n = iterations_for(s);
    Real scale = 1;
    for (int i = 0; i < n; ++i) scale /= chart_.multiplier;
    Jet2<Real> j = chart_.jet(s * scale);
    j.d1 = scale * j.d1;
    j.d2 = (scale * scale) * j.d2;
    for (int i = 0; i < n; ++i) {
      j = apply(params_, j);
      if (escape > 0 && escaped(j.p, escape)) return nan_jet();
    }
    return j;
  }

 private:
  static bool escaped(const BasicPoint<Real>& z, const Real& r) {
    using std::abs;
    return !(abs(z.x) <= r && abs(z.y) <= r);
  }
  static Jet2<Real> nan_jet() {
    const Real q = std::numeric_limits<Real>::quiet_NaN();
    return {{q, q}, {q, q}, {q, q}};
  }

  BasicParams<Real> params_;
  BasicLocalChart<Real> chart_;
};

/// Global stable branch Q(s) of the plus saddle; needs b != 0.
template <class Real>
class BasicStableCurve {
 public:
  BasicStableCurve(const BasicParams<Real>& p, BasicLocalChart<Real> chart) : params_(p), chart_(std::move(chart)) {
    if (chart_.kind != ManifoldKind::stable) throw Error(ErrorCode::InvalidArgument, "stable chart required");
  }

  const BasicParams<Real>& params() const { return params_; }
  const BasicLocalChart<Real>& chart() const { return chart_; }
  Real lambda() const { return chart_.multiplier; }

  int iterations_for(const Real& s) const {
    using std::abs;
    int n = 0;
    Real u = abs(s);
    const Real l = abs(chart_.multiplier);
    while (u > chart_.eval_radius) {
      u *= l;
      ++n;
    }
    return n;
  }

  BasicPoint<Real> eval(const Real& s) const { return jet(s).p; }

  Jet2<Real> jet(const Real& s) const {
    const int n = iterations_for(s);
    Real scale = 1;
    for (int i = 0; i < n; ++i) scale *= chart_.multiplier;
    Jet2<Real> j = chart_.jet(s * scale);
    j.d1 = scale * j.d1;
    j.d2 = (scale * scale) * j.d2;
    for (int i = 0; i < n; ++i) j = apply_inverse(params_, j);
    return j;
  }

 private:
  BasicParams<Real> params_;
  BasicLocalChart<Real> chart_;
};

using UnstableCurve = BasicUnstableCurve<double>;
using StableCurve = BasicStableCurve<double>;

UnstableCurve unstable_curve(const Params& p, int degree = 12);
StableCurve stable_curve(const Params& p, int degree = 12);

/// Neighbourhood V(-2, 2) of the tangency used as the default trim box.
inline constexpr Rect kDefaultTrimBox{-2.3, -1.7, 1.7, 2.3};

enum class Branch { left, right, both };

enum class EscapePolicy {
  split,  // drop escaped stretches and keep the remaining pieces
  raise,  // BlowUp on the first escaped node
};

struct GrowOptions {
  double h_min = 1e-5;
  double h_max = 1e-3;
  double escape_radius = 10.0;
  EscapePolicy on_escape = EscapePolicy::split;
  Branch branch = Branch::left;
  double fundamental_radius = 0.0;  // 0 means the chart's domain radius
};

/// Forward images of the fundamental domain [r / sigma, r] of the chart under
/// up to `iterations` steps, resampled to spacing in [h_min, h_max] and
/// clipped to `trim`. Each maximal run inside the box is one segment, listed
/// in order of increasing |s|.
std::vector<CurveSegment> grow_unstable(const Params& p, const LocalChart& chart, int iterations,
                                        const Rect& trim = kDefaultTrimBox, const GrowOptions& opt = {});

/// Same, also reporting the chart parameter of every node.
struct GrownPiece {
  CurveSegment segment;
  std::vector<double> s;
};
std::vector<GrownPiece> grow_unstable_pieces(const Params& p, const LocalChart& chart, int iterations,
                                             const Rect& trim = kDefaultTrimBox, const GrowOptions& opt = {});

/// Parameters s along the unstable branch (same sign as `s_end`) where
/// W_x(s) = x_target, in increasing |s| up to |s_end|.
std::vector<double> unstable_crossings(const UnstableCurve& w, double x_target, double s_end,
                                       double max_chord = 1e-2);

/// Samples of the stable graph eta over x in [-5/2, 5/2].
struct GraphFunction {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> d1;
  std::vector<double> d2;

  double max_abs_d1() const;
  double max_abs_d2() const;
};

struct GraphValue {
  double y = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// The stable manifold of the plus saddle as a graph y = eta(x) over
/// [-x_half, x_half]; exact derivatives come from the jets of Q.
class StableGraph {
 public:
  StableGraph(const Params& p, int grid = 2001, double x_half = 2.5, int degree = 12);

  const Params& params() const { return params_; }
  double x_half() const { return x_half_; }
  bool is_flat() const { return !curve_.has_value(); }

  /// eta and its first two derivatives at x; OutOfRange outside the interval.
  GraphValue eval(double x) const;

  /// Chart parameter of the point above x (b != 0 only).
  double parameter_at(double x) const;

  const GraphFunction& samples() const { return samples_; }
  const std::optional<StableCurve>& curve() const { return curve_; }

 private:
  Params params_;
  double x_half_;
  double flat_y_ = 0.0;
  std::optional<StableCurve> curve_;
  std::vector<double> seed_x_;
  std::vector<double> seed_s_;
  GraphFunction samples_;
};

/// Validated neighbourhood of (-2, 0) for the stable graph.
inline constexpr double kGraphMaxAbsB = 0.15;
inline constexpr double kGraphMinA = -2.3;
inline constexpr double kGraphMaxA = -1.7;

/// Raises Degenerate outside the validated neighbourhood and NotAGraph when
/// the stable arc folds over [-5/2, 5/2].
GraphFunction extract_stable_graph(const Params& p, int grid = 2001);

}  // namespace henon
