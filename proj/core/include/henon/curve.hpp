#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "henon/core.hpp"

namespace henon {

/// Oriented polyline with per-node unit tangents, signed curvatures and
/// cumulative arclength.
struct CurveSegment {
  std::vector<PlanePoint> nodes;
  std::vector<Vec2> tangents;
  std::vector<double> curvatures;
  std::vector<double> arclength;

  std::size_t size() const { return nodes.size(); }
  bool empty() const { return nodes.empty(); }
  double length() const { return arclength.empty() ? 0.0 : arclength.back(); }
};

/// Sample of a parametrized curve: parameter, position, and (optionally exact)
/// first and second parameter derivatives.
struct CurveSample {
  double t = 0.0;
  Jet2<double> jet;
};

using CurveJetFunction = std::function<Jet2<double>(double)>;

/// Builds a segment from nodes alone; tangents and curvatures come from
/// windowed quadratic fits in arclength.
CurveSegment make_curve_segment(std::vector<PlanePoint> nodes);

/// Builds a segment from jet samples, taking tangents and curvatures from the
/// exact derivatives.
CurveSegment make_curve_segment(const std::vector<CurveSample>& samples);

/// Bisects the parameter interval [t0, t1] until consecutive points are at
/// most `max_chord` apart. Non-finite evaluations are kept so callers can
/// split the curve where it escapes; the boundary between a finite and a
/// non-finite sample is bisected down to `min_dt`.
std::vector<CurveSample> adaptive_samples(const CurveJetFunction& f, double t0, double t1,
                                          double max_chord, double min_dt = 1e-14,
                                          std::size_t max_nodes = 4'000'000);

/// Resamples a finely sampled parametrized curve so consecutive nodes are
/// `spacing` apart in arclength (up to chord error); new nodes are evaluated
/// on the curve itself at interpolated parameters.
std::vector<CurveSample> resample_by_arclength(const CurveJetFunction& f,
                                               const std::vector<CurveSample>& fine, double spacing);

/// Splits samples into maximal runs lying inside `box`.
std::vector<std::vector<CurveSample>> clip_to_box(const std::vector<CurveSample>& samples,
                                                  const Rect& box);

struct CurveDerivatives {
  Vec2 tangent = Vec2::Zero();
  double curvature = 0.0;
};

/// Tangent and signed curvature at a given arclength from a windowed
/// least-squares quadratic fit of x(s), y(s). Raises OutOfRange outside the
/// segment.
CurveDerivatives curve_derivatives(const CurveSegment& c, double at_arclength, int half_window = 6);

/// Columns: s, x, y, tx, ty, kappa.
void write_csv(std::ostream& os, const CurveSegment& c);

/// Two-sided Hausdorff distance between the node sets of two polylines.
double hausdorff_distance(const std::vector<PlanePoint>& a, const std::vector<PlanePoint>& b);

}  // namespace henon
