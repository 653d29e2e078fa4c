#pragma once

// Renormalization near a homoclinic tangency. The return map phi^{N+n} on a
// small box, read in an affine frame and with an affine change of parameter,
// is compared against the limit family psi(x, y) = (y, y^2 + a_bar).
//
// Frames are affine surrogates fitted to the data. The seed comes from the
// return map's own fixed point: in a frame where R = Phi psi Phi^{-1},
// DR E1 = 0, DR E2 = E1 + 2y E2 and D^2R[E2, E2] = 2 E2, which pins E1, E2
// and the origin once the fixed point with multiplier 4 (a_bar = -2) is known.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "henon/core.hpp"
#include "henon/precision.hpp"
#include "henon/tangency.hpp"

namespace henon {

using HighPoint = BasicPoint<HighReal>;

/// psi_{a_bar}(x, y) = (y, y^2 + a_bar).
PlanePoint limit_family_eval(double a_bar, const PlanePoint& z_bar);

struct LimitFamilyData {
  double a_bar = 0.0;
  PlanePoint fixed_point;   // (y1, y1), y1 = (1 + sqrt(1 - 4 a_bar)) / 2
  PlanePoint endpoint;      // v2 = (a_bar, a_bar^2 + a_bar)
  double slope_fixed = 0.0;     // d y1 / d a_bar = -1 / sqrt(1 - 4 a_bar)
  double slope_endpoint = 0.0;  // d y2 / d a_bar = 2 a_bar + 1
};

/// Raises NoRealFixedPoints for a_bar > 1/4. At a_bar = 1/4 slope_fixed is
/// -infinity.
LimitFamilyData limit_family_data(double a_bar);

/// A one-parameter family of plane maps iterated `return_time` times.
class ReturnFamily {
 public:
  virtual ~ReturnFamily() = default;
  virtual int return_time() const = 0;
  virtual Jet2<HighReal> step(const HighReal& a, const Jet2<HighReal>& z) const = 0;

  /// All return_time steps; raises EscapedBox once an iterate leaves the
  /// square of half-width `escape`.
  Jet2<HighReal> ret(const HighReal& a, Jet2<HighReal> z, double escape = 10.0) const;
};

/// phi_{a,b}^{return_time} at fixed b.
class HenonFamily final : public ReturnFamily {
 public:
  HenonFamily(double b, int return_time);
  int return_time() const override { return r_; }
  Jet2<HighReal> step(const HighReal& a, const Jet2<HighReal>& z) const override;
  double b() const { return b_; }

 private:
  double b_;
  int r_;
};

/// psi itself, return time one.
class LimitFamily final : public ReturnFamily {
 public:
  int return_time() const override { return 1; }
  Jet2<HighReal> step(const HighReal& a, const Jet2<HighReal>& z) const override;
};

/// z = origin + x_bar e1 + y_bar e2.
struct AffinePlaneMap {
  HighPoint origin;
  HighPoint e1;
  HighPoint e2;

  HighPoint apply(const HighPoint& z_bar) const;
  HighPoint inverse(const HighPoint& z) const;  // raises IllConditioned when singular
};

/// a = offset + slope a_bar.
struct AffineLineMap {
  HighReal offset = 0;
  HighReal slope = 1;
  HighReal apply(const HighReal& a_bar) const { return offset + slope * a_bar; }
};

struct FitReport {
  int n = 0;
  double residual_c0 = 0.0;  // sup |renormalized map - psi| over the samples
  double residual_c1 = 0.0;  // sup of finite-difference Jacobian entries minus D psi
  int sample_count = 0;
  int iterations = 0;        // Levenberg-Marquardt iterations of the fit
};

struct RenormOptions {
  Rect box{-3.0, 3.0, -3.0, 3.0};  // renormalized units
  double a_bar_lo = -2.1;
  double a_bar_hi = -1.9;
  int fit_grid = 7;             // per axis, fit samples
  int fit_a_bars = 3;
  int report_samples = 768;     // quadratic_fit_residual after fitting
  int max_fit_iterations = 60;
  double escape = 10.0;
  bool fit = true;
};

struct RenormFrame {
  int n = 0;
  int return_time = 0;
  AffinePlaneMap affine_in;
  AffineLineMap affine_param;
  Rect box;
  std::optional<TangencyRecord> source_tangency;
  std::shared_ptr<const ReturnFamily> family;
  double a_bar_lo = -2.1;
  double a_bar_hi = -1.9;
  FitReport fit;
};

/// Frame from the family's fixed point near z_guess with multiplier 4,
/// found by continuation from a_guess. Raises ReturnNotFound when the fixed
/// point cannot be followed and IllConditioned when the frame degenerates.
RenormFrame seed_frame(std::shared_ptr<const ReturnFamily> family, double a_guess, const PlanePoint& z_guess,
                       const RenormOptions& opt = {});

/// Least-squares polish of the frame over the box and a_bar window; the
/// report is the sup-norm residual on a separate grid.
RenormFrame fit_frame(RenormFrame frame, const RenormOptions& opt = {});

/// Steps from the fold point q to within `radius` of the saddle, forward
/// along S plus backward along W^u. The return time of frame n is N + n.
int transit_time(const TangencyRecord& record, double radius = 0.05);

/// Frame for phi^{N+n} near the tangency in `record`.
RenormFrame build_frame(const TangencyRecord& record, int n, const Rect& box = {-3.0, 3.0, -3.0, 3.0},
                        const RenormOptions& opt = {});

/// Phi^{-1} phi^{N+n}_{Theta(a_bar)} Phi at z_bar. Raises EscapedBox when
/// z_bar lies outside twice the box or the orbit leaves the validity region.
PlanePoint renormalized_return_map(const RenormFrame& frame, double a_bar, const PlanePoint& z_bar);
HighPoint renormalized_return_map(const RenormFrame& frame, const HighReal& a_bar, const HighPoint& z_bar);

/// C0 and finite-difference C1 residuals over about `samples` points of the
/// box times three a_bar values. Raises InvalidArgument below 256 samples.
FitReport quadratic_fit_residual(const RenormFrame& frame, int samples = 768);

struct RenormFixedPoint {
  PlanePoint point;
  double multiplier_unstable = 0.0;
  double multiplier_stable = 0.0;
  bool saddle = false;
};

/// Newton from (2, 2) on the renormalized map.
RenormFixedPoint renormalized_fixed_point(const RenormFrame& frame, double a_bar);

struct LimitMode {};
using NProxy = std::variant<LimitMode, int>;

/// Stable-side and unstable-side slopes in a_bar. Limit mode uses the closed
/// forms. Finite n differentiates the y_bar of the renormalized fixed point
/// and of the second image of the fold of a frame built at b. Raises
/// FrameUnavailable when no frame can be built for n.
std::vector<VelocityGapReport> leaf_velocity_gap(double b, const NProxy& n_proxy,
                                                 const std::vector<double>& a_bar_values);

/// Finite-n slopes on an existing frame.
std::vector<VelocityGapReport> leaf_velocity_gap(const RenormFrame& frame, const std::vector<double>& a_bar_values);

}  // namespace henon
