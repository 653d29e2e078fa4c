#pragma once

// The outer horseshoe: a thin tube R around the stable segment S, the pieces
// of R cut out by a return map phi^w, and the Cantor slice of the invariant
// set along S.
//
// Everything is phrased through BasicReturnSystem so the same certificate and
// slice code runs on the Henon return map and on a piecewise-affine model.
// R is described by columns: column(x, v) is the point of R above x at
// relative height v, |v| <= half_height.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "henon/cantor.hpp"
#include "henon/core.hpp"
#include "henon/curve.hpp"
#include "henon/error.hpp"
#include "henon/manifold.hpp"
#include "henon/precision.hpp"

namespace henon {

/// Point and first derivative along some curve parameter.
template <class Real>
struct Jet1 {
  BasicPoint<Real> p;
  BasicPoint<Real> d;
};

template <class Real>
class BasicReturnSystem {
 public:
  using Point = BasicPoint<Real>;
  using Jet = Jet1<Real>;

  virtual ~BasicReturnSystem() = default;

  /// One return; empty where the map is not defined.
  virtual std::optional<Jet> forward(const Jet& z) const = 0;
  virtual std::optional<Jet> backward(const Jet& z) const = 0;

  virtual Jet column(const Real& x, const Real& v) const = 0;  // d = d/dv
  virtual Real height(const Point& z) const = 0;               // NaN off the columns
  virtual Real half_height() const = 0;
  virtual Real x_lo() const = 0;
  virtual Real x_hi() const = 0;
  virtual Real fibre_x() const = 0;  // the column through the saddle

  /// Stable segment through the saddle, crossing R from side to side.
  virtual Jet carrier(const Real& s) const = 0;
  virtual BasicInterval<Real> carrier_range() const = 0;
  virtual Real carrier_length(const Real& s0, const Real& s1) const = 0;

  bool inside(const Point& z) const {
    using std::abs;
    if (!(z.x >= x_lo() && z.x <= x_hi())) return false;
    const Real h = height(z);
    return h == h && abs(h) <= half_height();
  }
};

template <class Real>
Jet1<Real> push_forward(const BasicParams<Real>& prm, Jet1<Real> j, int n) {
  for (int i = 0; i < n; ++i) {
    j = {apply(prm, j.p), {j.d.y, -prm.b * j.d.x + 2 * j.p.y * j.d.y}};
  }
  return j;
}

template <class Real>
Jet1<Real> pull_back(const BasicParams<Real>& prm, Jet1<Real> j, int n) {
  for (int i = 0; i < n; ++i) {
    j = {apply_inverse(prm, j.p), {(2 * j.p.x * j.d.x - j.d.y) / prm.b, j.d.x}};
  }
  return j;
}

/// R = {(x, eta(x) + v) : |x| <= 5/2, |v| <= d} with return map phi^w. The
/// stable graph is shared in double precision; the carrier Q and the map run
/// in Real.
template <class Real>
class HenonReturn final : public BasicReturnSystem<Real> {
 public:
  using typename BasicReturnSystem<Real>::Jet;
  using typename BasicReturnSystem<Real>::Point;

  HenonReturn(const Params& p, int w, double half_thickness, std::shared_ptr<const StableGraph> graph,
              int chart_degree = 12)
      : params_(p),
        prm_(params_cast<Real>(p)),
        w_(w),
        d_(half_thickness),
        graph_(std::move(graph)),
        q_(prm_, make_local_chart<Real>(prm_, ManifoldKind::stable, chart_degree)) {
    if (w < 1) throw Error(ErrorCode::InvalidArgument, "return time must be positive");
    if (!(half_thickness > 0)) throw Error(ErrorCode::InvalidArgument, "tube half-thickness must be positive");
    if (!graph_ || graph_->is_flat()) throw Error(ErrorCode::Degenerate, "the horseshoe needs b != 0");
    y_p_ = saddle_in(prm_).y;
    const Real half = static_cast<Real>(graph_->x_half());
    Real s0 = polish(static_cast<Real>(graph_->parameter_at(-graph_->x_half())), -half);
    Real s1 = polish(static_cast<Real>(graph_->parameter_at(graph_->x_half())), half);
    range_ = {std::min(s0, s1), std::max(s0, s1)};
  }

  int w() const { return w_; }
  const Params& params() const { return params_; }

  std::optional<Jet> forward(const Jet& z) const override { return push_forward(prm_, z, w_); }
  std::optional<Jet> backward(const Jet& z) const override { return pull_back(prm_, z, w_); }

  Jet column(const Real& x, const Real& v) const override { return {{x, eta(x) + v}, {Real(0), Real(1)}}; }

  Real height(const Point& z) const override {
    using std::abs;
    if (!(abs(z.x) <= static_cast<Real>(graph_->x_half()))) return std::numeric_limits<Real>::quiet_NaN();
    return z.y - eta(z.x);
  }

  Real half_height() const override { return Real(d_); }
  Real x_lo() const override { return -static_cast<Real>(graph_->x_half()); }
  Real x_hi() const override { return static_cast<Real>(graph_->x_half()); }
  Real fibre_x() const override { return y_p_; }

  Jet carrier(const Real& s) const override {
    const auto j = q_.jet(s);
    return {j.p, j.d1};
  }
  BasicInterval<Real> carrier_range() const override { return range_; }

  Real carrier_length(const Real& s0, const Real& s1) const override {
    using std::sqrt;
    const auto speed = [this](const Real& s) {
      const auto j = q_.jet(s);
      return sqrt(j.d1.x * j.d1.x + j.d1.y * j.d1.y);
    };
    // Panels keep the quadrature exact to working precision on long stretches.
    const Real span = range_.hi - range_.lo;
    const int panels = std::max(1, static_cast<int>(std::ceil(static_cast<double>((s1 - s0) / span) * 64)));
    Real total = 0;
    for (int i = 0; i < panels; ++i) {
      const Real a = s0 + (s1 - s0) * i / panels;
      const Real b = s0 + (s1 - s0) * (i + 1) / panels;
      total += boost::math::quadrature::gauss<Real, 30>::integrate(speed, a, b);
    }
    return total;
  }

 private:
  Real eta(const Real& x) const {
    if (x == y_p_) return y_p_;
    return static_cast<Real>(graph_->eval(static_cast<double>(x)).y);
  }

  Real polish(Real s, const Real& x_target) const {
    using std::abs;
    for (int it = 0; it < 100; ++it) {
      const auto j = q_.jet(s);
      const Real step = (j.p.x - x_target) / j.d1.x;
      s -= step;
      if (abs(step) <= 16 * std::numeric_limits<Real>::epsilon() * (1 + abs(s))) break;
    }
    return s;
  }

  Params params_;
  BasicParams<Real> prm_;
  int w_;
  double d_;
  std::shared_ptr<const StableGraph> graph_;
  BasicStableCurve<Real> q_;
  Real y_p_{};
  BasicInterval<Real> range_;
};

/// Two-branch piecewise-affine horseshoe on the unit square. The horizontal
/// strips [g, g + c] and [1 - g - c, 1 - g], with g = (1 - 2c) / 4, map onto
/// the vertical strips [0, c] and [1 - c, 1], contracting x by c and
/// stretching y by 1/c. The saddle sits on the left edge at height
/// g / (1 - c) and its stable segment is the horizontal line through it.
template <class Real>
class AffineHorseshoe final : public BasicReturnSystem<Real> {
 public:
  using typename BasicReturnSystem<Real>::Jet;
  using typename BasicReturnSystem<Real>::Point;

  explicit AffineHorseshoe(Real contraction = Real(1) / 3) : c_(contraction) {
    if (!(c_ > 0 && 2 * c_ < 1)) throw Error(ErrorCode::InvalidArgument, "contraction must lie in (0, 1/2)");
    g_ = (1 - 2 * c_) / 4;
    y_star_ = g_ / (1 - c_);
  }

  std::optional<Jet> forward(const Jet& z) const override {
    if (z.p.y >= g_ && z.p.y <= g_ + c_) return Jet{{c_ * z.p.x, (z.p.y - g_) / c_}, {c_ * z.d.x, z.d.y / c_}};
    const Real top = 1 - g_ - c_;
    if (z.p.y >= top && z.p.y <= top + c_) {
      return Jet{{c_ * z.p.x + 1 - c_, (z.p.y - top) / c_}, {c_ * z.d.x, z.d.y / c_}};
    }
    return std::nullopt;
  }

  std::optional<Jet> backward(const Jet& z) const override {
    if (!(z.p.y >= 0 && z.p.y <= 1)) return std::nullopt;
    if (z.p.x >= 0 && z.p.x <= c_) return Jet{{z.p.x / c_, c_ * z.p.y + g_}, {z.d.x / c_, c_ * z.d.y}};
    if (z.p.x >= 1 - c_ && z.p.x <= 1) {
      return Jet{{(z.p.x - (1 - c_)) / c_, c_ * z.p.y + 1 - g_ - c_}, {z.d.x / c_, c_ * z.d.y}};
    }
    return std::nullopt;
  }

  Jet column(const Real& x, const Real& v) const override { return {{x, Real(1) / 2 + v}, {Real(0), Real(1)}}; }
  Real height(const Point& z) const override { return z.y - Real(1) / 2; }
  Real half_height() const override { return Real(1) / 2; }
  Real x_lo() const override { return Real(0); }
  Real x_hi() const override { return Real(1); }
  Real fibre_x() const override { return Real(0); }

  Jet carrier(const Real& s) const override { return {{s, y_star_}, {Real(1), Real(0)}}; }
  BasicInterval<Real> carrier_range() const override { return {Real(0), Real(1)}; }
  Real carrier_length(const Real& s0, const Real& s1) const override { return s1 - s0; }

  Real saddle_height() const { return y_star_; }

 private:
  Real c_;
  Real g_{};
  Real y_star_{};
};

enum class Orientation { counterclockwise, clockwise };

struct CurvilinearRect {
  std::array<PlanePoint, 4> corners;
  std::array<CurveSegment, 4> edge_curves;  // corner k to corner k + 1
  Orientation orientation = Orientation::counterclockwise;
};

struct CoverCertificate {
  int w = 0;
  std::vector<CurvilinearRect> pieces;
  std::vector<std::vector<bool>> crossing_matrix;  // [i][j]: phi^w(piece i) crosses piece j
  double cone_margin = 0.0;

  // What the slice needs to rebuild the return system.
  std::optional<Params> params;
  double half_thickness = 0.0;
  std::vector<Interval> fibre_pieces;  // v-intervals of the pieces on the saddle column, sorted

  std::optional<PlanePoint> homoclinic_point;
  std::optional<PlanePoint> tangency_point;

  bool full_shift() const;
};

struct HorseshoeOptions {
  int columns = 400;          // columns of R checked for full-width strips
  int rows = 40;              // samples per strip in the cone check
  int fibre_samples = 4000;   // samples along one column
  double cone_slope = 0.5;
  int edge_nodes = 33;
};

/// Pieces, crossing matrix and cone margin of a return system with return
/// time w. Raises NoReturn when R's top or bottom edge returns into R or the
/// strips are not full width.
CoverCertificate certify_return_map(const BasicReturnSystem<double>& sys, int w, const HorseshoeOptions& opt = {});

/// Smallest even w <= w_max whose return pieces are exactly two, one through
/// the saddle and one through a transverse homoclinic point, neither holding
/// the fold point q. Raises NoReturn when no such w exists and TangencyInside
/// when q falls in a piece.
CoverCertificate build_return_boxes(const Params& p, double thickness_of_R = 0.02, int w_max = 40,
                                    const HorseshoeOptions& opt = {});

inline constexpr double kDefaultSliceHMin = 1e-90;

/// Level-k pullback along the carrier, in carrier parameter units. Level 0
/// holds the traces of the pieces, so level k has pieces^(k+1) intervals.
template <class Real>
BasicIntervalSet<Real> slice_parameters(const BasicReturnSystem<Real>& sys, const std::vector<Interval>& fibre_pieces,
                                        int level, const Real& h_min);

/// Converts carrier parameters to arclength measured from the start of the
/// carrier range. Gaps and bridges are integrated separately so short
/// lengths keep full relative precision.
template <class Real>
BasicIntervalSet<Real> to_arclength(const BasicReturnSystem<Real>& sys, const BasicIntervalSet<Real>& params);

struct CantorApproximation {
  int level = 0;
  BasicIntervalSet<HighReal> intervals;   // arclength along the carrier
  BasicIntervalSet<HighReal> parameters;  // the same intervals in the chart parameter of Q
  CurveSegment carrier;
  bool below_double_resolution = false;   // some width is invisible in double precision

  IntervalSet rounded() const;
};

/// Lambda^out cut with the stable segment, at `level`, in extended precision.
/// Raises ResolutionExhausted when a width drops below h_min.
CantorApproximation stable_cantor_slice(const CoverCertificate& cert, const Params& p, int level,
                                        double h_min = kDefaultSliceHMin);

// ---------------------------------------------------------------------------

namespace detail {

template <class Real>
Real newton_tol(const Real& scale) {
  using std::abs;
  if constexpr (std::numeric_limits<Real>::is_exact) {
    return Real(0);
  } else {
    return 64 * std::numeric_limits<Real>::epsilon() * (1 + abs(scale));
  }
}

template <class Real>
std::optional<Jet1<Real>> pulled(const BasicReturnSystem<Real>& sys, const Real& s, int m) {
  std::optional<Jet1<Real>> j = sys.carrier(s);
  for (int i = 0; i < m && j; ++i) j = sys.backward(*j);
  return j;
}

template <class Real>
Jet1<Real> pulled_or_throw(const BasicReturnSystem<Real>& sys, const Real& s, int m) {
  auto j = pulled(sys, s, m);
  if (!j) throw Error(ErrorCode::ResolutionExhausted, "pullback left the domain of the return map");
  return *j;
}

/// s in iv where x(u_m(s)) = x_target; x(u_m) is monotone on iv.
template <class Real>
Real solve_x_on_interval(const BasicReturnSystem<Real>& sys, const BasicInterval<Real>& iv, int m,
                         const Real& x_target) {
  using std::abs;
  Real lo = iv.lo, hi = iv.hi;
  const Real f_lo = pulled_or_throw(sys, lo, m).p.x - x_target;
  const bool lo_negative = f_lo < 0;
  Real s = (lo + hi) / 2;
  for (int it = 0; it < 400; ++it) {
    const auto j = pulled_or_throw(sys, s, m);
    const Real f = j.p.x - x_target;
    if (f == 0) return s;
    if ((f < 0) == lo_negative) {
      lo = s;
    } else {
      hi = s;
    }
    Real next = s - f / j.d.x;
    if (!(next > lo && next < hi)) next = (lo + hi) / 2;
    if (abs(next - s) <= newton_tol(s) || next == s) return next;
    s = next;
  }
  return s;
}

}  // namespace detail

template <class Real>
BasicIntervalSet<Real> slice_parameters(const BasicReturnSystem<Real>& sys, const std::vector<Interval>& fibre_pieces,
                                        int level, const Real& h_min) {
  using std::abs;
  if (level < 0) throw Error(ErrorCode::InvalidArgument, "level must be non-negative");
  if (fibre_pieces.empty()) throw Error(ErrorCode::InvalidArgument, "no return pieces");
  const Real fx = sys.fibre_x();
  const auto centre = [&](const Real& v) {
    auto j = sys.forward(sys.column(fx, v));
    if (!j) throw Error(ErrorCode::ResolutionExhausted, "piece centre curve left the return domain");
    return *j;
  };

  std::vector<BasicInterval<Real>> current{sys.carrier_range()};
  for (int depth = 0; depth <= level; ++depth) {
    std::vector<BasicInterval<Real>> next;
    next.reserve(current.size() * fibre_pieces.size());
    for (const auto& iv : current) {
      for (const auto& piece : fibre_pieces) {
        // Seed on the centre curve of the piece, then meet it exactly.
        Real v = Real((piece.lo + piece.hi) / 2);
        Real s = detail::solve_x_on_interval(sys, iv, depth, centre(v).p.x);
        for (int it = 0; it < 60; ++it) {
          const auto u = detail::pulled_or_throw(sys, s, depth);
          const auto c = centre(v);
          const Real gx = u.p.x - c.p.x, gy = u.p.y - c.p.y;
          const Real det = -u.d.x * c.d.y + c.d.x * u.d.y;
          if (det == 0) throw Error(ErrorCode::ResolutionExhausted, "pullback parallel to a piece");
          const Real ds = (-c.d.y * gx + c.d.x * gy) / det;
          const Real dv = (u.d.x * gy - u.d.y * gx) / det;
          s -= ds;
          v -= dv;
          if (abs(ds) <= detail::newton_tol(s) * (iv.hi - iv.lo) && abs(dv) <= detail::newton_tol(v)) break;
        }
        // The child ends where the next pullback reaches the sides of R.
        Real ends[2];
        const Real sides[2] = {sys.x_lo(), sys.x_hi()};
        for (int k = 0; k < 2; ++k) {
          Real t = s;
          for (int it = 0; it < 100; ++it) {
            const auto j = detail::pulled_or_throw(sys, t, depth + 1);
            const Real step = (j.p.x - sides[k]) / j.d.x;
            t -= step;
            if (abs(step) <= detail::newton_tol(t) * (iv.hi - iv.lo) || step == 0) break;
          }
          ends[k] = t;
        }
        BasicInterval<Real> child{std::min(ends[0], ends[1]), std::max(ends[0], ends[1])};
        if (!(child.lo >= iv.lo && child.hi <= iv.hi)) {
          throw Error(ErrorCode::ResolutionExhausted, "child interval escaped its parent");
        }
        if (!(child.hi - child.lo > h_min)) {
          throw Error(ErrorCode::ResolutionExhausted, "slice width reached h_min at level " + std::to_string(depth));
        }
        const auto mid = detail::pulled(sys, Real((child.lo + child.hi) / 2), depth + 1);
        if (!mid || !sys.inside(mid->p)) {
          throw Error(ErrorCode::ResolutionExhausted, "lost the child interval at level " + std::to_string(depth));
        }
        next.push_back(child);
      }
    }
    current = std::move(next);
  }
  return make_interval_set(std::move(current), level);
}

template <class Real>
BasicIntervalSet<Real> to_arclength(const BasicReturnSystem<Real>& sys, const BasicIntervalSet<Real>& params) {
  BasicIntervalSet<Real> out;
  out.level = params.level;
  Real pos = 0;
  Real prev = sys.carrier_range().lo;
  for (const auto& iv : params.intervals) {
    pos += sys.carrier_length(prev, iv.lo);
    const Real lo = pos;
    pos += sys.carrier_length(iv.lo, iv.hi);
    out.intervals.push_back({lo, pos});
    prev = iv.hi;
  }
  return out;
}

}  // namespace henon
