#include "henon/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace henon {

namespace {

bool finite(const PlanePoint& z) { return std::isfinite(z.x) && std::isfinite(z.y); }

// Runs of consecutive finite samples.
std::vector<std::vector<CurveSample>> finite_runs(const std::vector<CurveSample>& samples) {
  std::vector<std::vector<CurveSample>> runs;
  std::vector<CurveSample> cur;
  for (const auto& s : samples) {
    if (finite(s.jet.p)) {
      cur.push_back(s);
    } else if (!cur.empty()) {
      runs.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) runs.push_back(std::move(cur));
  return runs;
}

// Runs touching the box, padded by one sample on each side so the exact clip
// after resampling still sees the entry and exit.
std::vector<std::vector<CurveSample>> runs_near_box(const std::vector<CurveSample>& run, const Rect& box) {
  std::vector<std::vector<CurveSample>> out;
  std::size_t i = 0;
  const std::size_t n = run.size();
  while (i < n) {
    if (!box.contains(run[i].jet.p)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && box.contains(run[j + 1].jet.p)) ++j;
    const std::size_t lo = i > 0 ? i - 1 : 0;
    const std::size_t hi = std::min(n - 1, j + 1);
    out.emplace_back(run.begin() + static_cast<std::ptrdiff_t>(lo), run.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    i = j + 1;
  }
  return out;
}

void check_graph_window(const Params& p) {
  if (std::abs(p.b) > kGraphMaxAbsB || p.a < kGraphMinA || p.a > kGraphMaxA) {
    std::ostringstream os;
    os << "(a,b) = (" << p.a << ", " << p.b << ") outside the validated window |b| <= " << kGraphMaxAbsB
       << ", a in [" << kGraphMinA << ", " << kGraphMaxA << "]";
    throw Error(ErrorCode::Degenerate, os.str());
  }
}

}  // namespace

LocalChart local_manifold_chart(const Params& p, ManifoldKind kind, int degree) {
  return make_local_chart<double>(p, kind, degree);
}

UnstableCurve unstable_curve(const Params& p, int degree) {
  return UnstableCurve(p, local_manifold_chart(p, ManifoldKind::unstable, degree));
}

StableCurve stable_curve(const Params& p, int degree) {
  return StableCurve(p, local_manifold_chart(p, ManifoldKind::stable, degree));
}

std::vector<GrownPiece> grow_unstable_pieces(const Params& p, const LocalChart& chart, int iterations,
                                             const Rect& trim, const GrowOptions& opt) {
  if (chart.kind != ManifoldKind::unstable) throw Error(ErrorCode::InvalidArgument, "unstable chart required");
  if (iterations < 0) throw Error(ErrorCode::InvalidArgument, "iterations must be non-negative");
  if (!(opt.h_min > 0.0 && opt.h_max > opt.h_min)) throw Error(ErrorCode::InvalidArgument, "need 0 < h_min < h_max");
  const UnstableCurve w(p, chart);
  const double r = opt.fundamental_radius > 0.0 ? opt.fundamental_radius : chart.domain_radius;
  const double sigma = chart.multiplier;
  const double t0 = r / sigma;
  const double t1 = r * std::pow(sigma, iterations);

  std::vector<double> signs;
  if (opt.branch != Branch::right) signs.push_back(-1.0);
  if (opt.branch != Branch::left) signs.push_back(1.0);

  std::vector<GrownPiece> pieces;
  for (double sign : signs) {
    const CurveJetFunction f = [&](double t) { return w.jet(sign * t, opt.escape_radius); };
    const auto fine = adaptive_samples(f, t0, t1, opt.h_max, 1e-13 * t1);
    if (opt.on_escape == EscapePolicy::raise) {
      for (const auto& smp : fine) {
        if (!finite(smp.jet.p)) {
          std::ostringstream os;
          os << "unstable branch leaves radius " << opt.escape_radius << " at s = " << sign * smp.t;
          throw Error(ErrorCode::BlowUp, os.str());
        }
      }
    }
    for (const auto& run : finite_runs(fine)) {
      for (const auto& near : runs_near_box(run, trim)) {
        const auto even = resample_by_arclength(f, near, 0.95 * opt.h_max);
        for (auto& clipped : clip_to_box(even, trim)) {
          if (clipped.size() < 2) continue;
          GrownPiece gp;
          gp.s.reserve(clipped.size());
          for (const auto& smp : clipped) gp.s.push_back(sign * smp.t);
          gp.segment = make_curve_segment(clipped);
          pieces.push_back(std::move(gp));
        }
      }
    }
  }
  return pieces;
}

std::vector<CurveSegment> grow_unstable(const Params& p, const LocalChart& chart, int iterations, const Rect& trim,
                                        const GrowOptions& opt) {
  std::vector<CurveSegment> out;
  for (auto& gp : grow_unstable_pieces(p, chart, iterations, trim, opt)) out.push_back(std::move(gp.segment));
  return out;
}

std::vector<double> unstable_crossings(const UnstableCurve& w, double x_target, double s_end, double max_chord) {
  const double sign = s_end < 0.0 ? -1.0 : 1.0;
  const double t_end = std::abs(s_end);
  const CurveJetFunction f = [&](double t) { return w.jet(sign * t, 10.0); };
  const auto samples = adaptive_samples(f, 0.0, t_end, max_chord, 1e-13 * std::max(1.0, t_end));
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const auto& l = samples[i];
    const auto& r = samples[i + 1];
    if (!finite(l.jet.p) || !finite(r.jet.p)) continue;
    const double gl = l.jet.p.x - x_target;
    const double gr = r.jet.p.x - x_target;
    if (gl == 0.0) {
      out.push_back(sign * l.t);
      continue;
    }
    if (gl * gr > 0.0) continue;
    // Safeguarded Newton inside the bracket.
    double lo = l.t, hi = r.t, glo = gl;
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
      const auto j = f(t);
      const double g = j.p.x - x_target;
      if (g == 0.0) break;
      if ((g < 0.0) == (glo < 0.0)) {
        lo = t;
        glo = g;
      } else {
        hi = t;
      }
      const double dg = sign * j.d1.x;
      double next = dg != 0.0 ? t - g / dg : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 4e-16 * std::abs(t)) {
        t = next;
        break;
      }
      t = next;
    }
    out.push_back(sign * t);
  }
  return out;
}

double GraphFunction::max_abs_d1() const {
  double m = 0.0;
  for (double v : d1) m = std::max(m, std::abs(v));
  return m;
}

double GraphFunction::max_abs_d2() const {
  double m = 0.0;
  for (double v : d2) m = std::max(m, std::abs(v));
  return m;
}

StableGraph::StableGraph(const Params& p, int grid, double x_half, int degree) : params_(p), x_half_(x_half) {
  check_graph_window(p);
  if (grid < 2) throw Error(ErrorCode::InvalidArgument, "graph grid needs at least two points");
  if (p.b == 0.0) {
    flat_y_ = fixed_point_coordinate(p, Root::plus);
  } else {
    curve_.emplace(stable_curve(p, degree));
    const StableCurve& q = *curve_;
    // Walk outward on each side until the arc crosses x = -/+ x_half.
    auto reach = [&](double dir) {
      const double target = dir * x_half;
      auto past = [&](double s) {
        const auto z = q.eval(s);
        return !finite(z) || dir * (z.x - target) >= 0.0;
      };
      double lo = 0.0;
      double hi = q.chart().eval_radius;
      int guard = 0;
      while (!past(dir * hi)) {
        lo = hi;
        hi *= 1.25;
        if (++guard > 400) throw Error(ErrorCode::NotAGraph, "stable arc never reaches the end of the interval");
      }
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (past(dir * mid) ? hi : lo) = mid;
      }
      const auto z = q.eval(dir * hi);
      if (!finite(z)) throw Error(ErrorCode::NotAGraph, "stable arc escapes before spanning the interval");
      return dir * hi;
    };
    const double s_lo = reach(-1.0);
    const double s_hi = reach(1.0);
    const CurveJetFunction f = [&](double s) { return q.jet(s); };
    const auto samples = adaptive_samples(f, s_lo, s_hi, 1e-3);
    const double orient = samples.front().jet.d1.x;
    for (const auto& smp : samples) {
      if (!(smp.jet.d1.x * orient > 0.0)) {
        std::ostringstream os;
        os << "stable arc folds near (" << smp.jet.p.x << ", " << smp.jet.p.y << ")";
        throw Error(ErrorCode::NotAGraph, os.str());
      }
      seed_x_.push_back(smp.jet.p.x);
      seed_s_.push_back(smp.t);
    }
    if (orient < 0.0) {
      std::reverse(seed_x_.begin(), seed_x_.end());
      std::reverse(seed_s_.begin(), seed_s_.end());
    }
  }
  samples_.xs.resize(static_cast<std::size_t>(grid));
  samples_.ys.resize(samples_.xs.size());
  samples_.d1.resize(samples_.xs.size());
  samples_.d2.resize(samples_.xs.size());
  for (int i = 0; i < grid; ++i) {
    const double x = -x_half + 2.0 * x_half * i / (grid - 1);
    const auto v = eval(x);
    const auto k = static_cast<std::size_t>(i);
    samples_.xs[k] = x;
    samples_.ys[k] = v.y;
    samples_.d1[k] = v.d1;
    samples_.d2[k] = v.d2;
  }
}

double StableGraph::parameter_at(double x) const {
  if (!curve_) throw Error(ErrorCode::Degenerate, "flat graph has no stable parametrization");
  if (x < -x_half_ - 1e-12 || x > x_half_ + 1e-12) throw Error(ErrorCode::OutOfRange, "x outside the graph interval");
  const auto it = std::upper_bound(seed_x_.begin(), seed_x_.end(), x);
  std::size_t hi = static_cast<std::size_t>(std::distance(seed_x_.begin(), it));
  hi = std::clamp<std::size_t>(hi, 1, seed_x_.size() - 1);
  const std::size_t lo = hi - 1;
  double slo = seed_s_[lo], shi = seed_s_[hi];
  double xlo = seed_x_[lo], xhi = seed_x_[hi];
  double s = xhi != xlo ? slo + (x - xlo) / (xhi - xlo) * (shi - slo) : slo;
  if (slo > shi) {
    std::swap(slo, shi);
    std::swap(xlo, xhi);
  }
  for (int iter = 0; iter < 60; ++iter) {
    const auto j = curve_->jet(s);
    const double g = j.p.x - x;
    if (g == 0.0) break;
    // Keep a bracket so Newton can never wander off the monotone piece.
    if ((g < 0.0) == (xlo < x)) {
      slo = s;
    } else {
      shi = s;
    }
    double next = j.d1.x != 0.0 ? s - g / j.d1.x : 0.5 * (slo + shi);
    if (!(next >= slo && next <= shi)) next = 0.5 * (slo + shi);
    const bool done = std::abs(next - s) <= 2e-16 * std::max(1.0, std::abs(s));
    s = next;
    if (done) break;
  }
  return s;
}

GraphValue StableGraph::eval(double x) const {
  if (x < -x_half_ - 1e-12 || x > x_half_ + 1e-12) throw Error(ErrorCode::OutOfRange, "x outside the graph interval");
  if (!curve_) return {flat_y_, 0.0, 0.0};
  const auto j = curve_->jet(parameter_at(x));
  const double xp = j.d1.x;
  GraphValue v;
  v.y = j.p.y;
  v.d1 = j.d1.y / xp;
  v.d2 = (j.d2.y * xp - j.d1.y * j.d2.x) / (xp * xp * xp);
  return v;
}

GraphFunction extract_stable_graph(const Params& p, int grid) { return StableGraph(p, grid).samples(); }

}  // namespace henon
