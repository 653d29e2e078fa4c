#include "henon/curve.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <unordered_map>

#include <Eigen/QR>

namespace henon {

namespace {

double dist(const PlanePoint& p, const PlanePoint& q) { return std::hypot(p.x - q.x, p.y - q.y); }

bool finite(const PlanePoint& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

std::vector<double> cumulative_arclength(const std::vector<PlanePoint>& nodes) {
  std::vector<double> s(nodes.size(), 0.0);
  for (std::size_t i = 1; i < nodes.size(); ++i) s[i] = s[i - 1] + dist(nodes[i - 1], nodes[i]);
  return s;
}

// Quadratic least-squares fit of (x(s), y(s)) around s0 over nodes [lo, hi].
CurveDerivatives fit_derivatives(const std::vector<PlanePoint>& nodes, const std::vector<double>& s,
                                 std::size_t lo, std::size_t hi, double s0) {
  const auto n = static_cast<Eigen::Index>(hi - lo + 1);
  CurveDerivatives out;
  if (n < 2) return out;
  const int cols = n >= 3 ? 3 : 2;
  Eigen::MatrixXd A(n, cols);
  Eigen::MatrixXd rhs(n, 2);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double ds = s[lo + static_cast<std::size_t>(k)] - s0;
    A(k, 0) = 1.0;
    A(k, 1) = ds;
    if (cols == 3) A(k, 2) = ds * ds;
    rhs(k, 0) = nodes[lo + static_cast<std::size_t>(k)].x;
    rhs(k, 1) = nodes[lo + static_cast<std::size_t>(k)].y;
  }
  const Eigen::MatrixXd c = A.colPivHouseholderQr().solve(rhs);
  const Vec2 d1(c(1, 0), c(1, 1));
  const double speed = d1.norm();
  if (speed == 0.0) return out;
  out.tangent = d1 / speed;
  if (cols == 3) {
    const Vec2 d2(2.0 * c(2, 0), 2.0 * c(2, 1));
    out.curvature = (d1.x() * d2.y() - d1.y() * d2.x()) / (speed * speed * speed);
  }
  return out;
}

}  // namespace

CurveSegment make_curve_segment(std::vector<PlanePoint> nodes) {
  CurveSegment c;
  c.arclength = cumulative_arclength(nodes);
  c.nodes = std::move(nodes);
  const std::size_t n = c.nodes.size();
  c.tangents.assign(n, Vec2::Zero());
  c.curvatures.assign(n, 0.0);
  constexpr std::size_t hw = 3;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= hw ? i - hw : 0;
    const std::size_t hi = std::min(n - 1, i + hw);
    const auto d = fit_derivatives(c.nodes, c.arclength, lo, hi, c.arclength[i]);
    c.tangents[i] = d.tangent;
    c.curvatures[i] = d.curvature;
  }
  return c;
}

CurveSegment make_curve_segment(const std::vector<CurveSample>& samples) {
  CurveSegment c;
  c.nodes.reserve(samples.size());
  c.tangents.reserve(samples.size());
  c.curvatures.reserve(samples.size());
  for (const auto& smp : samples) {
    const Vec2 d1(smp.jet.d1.x, smp.jet.d1.y);
    const Vec2 d2(smp.jet.d2.x, smp.jet.d2.y);
    const double speed = d1.norm();
    c.nodes.push_back(smp.jet.p);
    c.tangents.push_back(speed > 0.0 ? Vec2(d1 / speed) : Vec2(Vec2::Zero()));
    c.curvatures.push_back(speed > 0.0 ? (d1.x() * d2.y() - d1.y() * d2.x()) / (speed * speed * speed) : 0.0);
  }
  c.arclength = cumulative_arclength(c.nodes);
  return c;
}

std::vector<CurveSample> adaptive_samples(const CurveJetFunction& f, double t0, double t1, double max_chord,
                                          double min_dt, std::size_t max_nodes) {
  constexpr int kSeedCells = 16;
  std::vector<CurveSample> out;
  out.push_back({t0, f(t0)});
  // Depth-first refinement; the stack holds right endpoints still to be reached.
  std::vector<CurveSample> stack;
  for (int i = kSeedCells; i >= 1; --i) {
    const double t = i == kSeedCells ? t1 : t0 + (t1 - t0) * i / kSeedCells;
    stack.push_back({t, f(t)});
  }
  while (!stack.empty()) {
    const CurveSample left = out.back();
    const CurveSample right = stack.back();
    const bool ok_left = finite(left.jet.p);
    const bool ok_right = finite(right.jet.p);
    const double tm = 0.5 * (left.t + right.t);
    const bool splittable = std::abs(right.t - left.t) > min_dt && tm != left.t && tm != right.t;
    if (!splittable || out.size() + stack.size() >= max_nodes || (!ok_left && !ok_right)) {
      // Two escaped samples are accepted as they are.
      out.push_back(right);
      stack.pop_back();
      continue;
    }
    const CurveSample mid{tm, f(tm)};
    const bool ok_mid = finite(mid.jet.p);
    // A finite/escaped pair is bisected down to min_dt so the escape boundary
    // is located sharply. The midpoint also catches short excursions whose
    // endpoints happen to lie close together.
    bool refine = true;
    if (ok_left && ok_right && ok_mid) {
      refine = dist(left.jet.p, mid.jet.p) > max_chord || dist(mid.jet.p, right.jet.p) > max_chord;
    }
    if (refine) {
      stack.push_back(mid);
      continue;
    }
    out.push_back(mid);
    out.push_back(right);
    stack.pop_back();
  }
  return out;
}

std::vector<CurveSample> resample_by_arclength(const CurveJetFunction& f, const std::vector<CurveSample>& fine,
                                               double spacing) {
  std::vector<CurveSample> out;
  if (fine.empty()) return out;
  std::vector<double> s(fine.size(), 0.0);
  for (std::size_t i = 1; i < fine.size(); ++i) s[i] = s[i - 1] + dist(fine[i - 1].jet.p, fine[i].jet.p);
  const double total = s.back();
  if (total == 0.0) return {fine.front()};
  const auto n = static_cast<std::size_t>(std::ceil(total / spacing));
  const double h = total / static_cast<double>(n);
  out.reserve(n + 1);
  out.push_back(fine.front());
  std::size_t k = 0;
  for (std::size_t j = 1; j < n; ++j) {
    const double target = h * static_cast<double>(j);
    while (k + 1 < s.size() && s[k + 1] < target) ++k;
    const double seg = s[k + 1] - s[k];
    const double w = seg > 0.0 ? (target - s[k]) / seg : 0.0;
    const double t = fine[k].t + w * (fine[k + 1].t - fine[k].t);
    out.push_back({t, f(t)});
  }
  out.push_back(fine.back());
  // Parameter interpolation can misplace a node where the fine polyline cuts
  // a corner; bisect any gap that still exceeds the target.
  std::vector<CurveSample> fixed;
  fixed.reserve(out.size());
  fixed.push_back(out.front());
  for (std::size_t i = 1; i < out.size(); ++i) {
    std::vector<CurveSample> pending{out[i]};
    while (!pending.empty()) {
      const CurveSample& l = fixed.back();
      const CurveSample r = pending.back();
      const double tm = 0.5 * (l.t + r.t);
      if (dist(l.jet.p, r.jet.p) > spacing * 1.05 && tm != l.t && tm != r.t) {
        pending.push_back({tm, f(tm)});
        continue;
      }
      fixed.push_back(r);
      pending.pop_back();
    }
  }
  return fixed;
}

std::vector<std::vector<CurveSample>> clip_to_box(const std::vector<CurveSample>& samples, const Rect& box) {
  std::vector<std::vector<CurveSample>> pieces;
  std::vector<CurveSample> current;
  for (const auto& smp : samples) {
    if (box.contains(smp.jet.p)) {
      current.push_back(smp);
    } else if (!current.empty()) {
      pieces.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) pieces.push_back(std::move(current));
  return pieces;
}

CurveDerivatives curve_derivatives(const CurveSegment& c, double at_arclength, int half_window) {
  if (c.size() < 3 || at_arclength < c.arclength.front() || at_arclength > c.arclength.back()) {
    throw Error(ErrorCode::OutOfRange, "arclength outside the segment");
  }
  const auto it = std::lower_bound(c.arclength.begin(), c.arclength.end(), at_arclength);
  auto i = static_cast<std::size_t>(std::distance(c.arclength.begin(), it));
  if (i > 0 && (i == c.size() || at_arclength - c.arclength[i - 1] < c.arclength[i] - at_arclength)) --i;
  const auto hw = static_cast<std::size_t>(std::max(1, half_window));
  const std::size_t lo = i >= hw ? i - hw : 0;
  const std::size_t hi = std::min(c.size() - 1, i + hw);
  return fit_derivatives(c.nodes, c.arclength, lo, hi, at_arclength);
}

void write_csv(std::ostream& os, const CurveSegment& c) {
  os << "s,x,y,tx,ty,kappa\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < c.size(); ++i) {
    os << c.arclength[i] << ',' << c.nodes[i].x << ',' << c.nodes[i].y << ',' << c.tangents[i].x() << ','
       << c.tangents[i].y() << ',' << c.curvatures[i] << '\n';
  }
}

namespace {

// One-sided max-min distance using a uniform bucket grid over `to`.
double directed_hausdorff(const std::vector<PlanePoint>& from, const std::vector<PlanePoint>& to) {
  if (from.empty() || to.empty()) return std::numeric_limits<double>::infinity();
  double xmin = to[0].x, xmax = to[0].x, ymin = to[0].y, ymax = to[0].y;
  for (const auto& p : to) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double cell = std::max({(xmax - xmin), (ymax - ymin), 1e-12}) / std::sqrt(static_cast<double>(to.size()));
  auto key = [&](long i, long j) { return (i << 32) ^ (j & 0xffffffffL); };
  std::unordered_map<long, std::vector<std::size_t>> grid;
  for (std::size_t k = 0; k < to.size(); ++k) {
    const auto i = static_cast<long>(std::floor((to[k].x - xmin) / cell));
    const auto j = static_cast<long>(std::floor((to[k].y - ymin) / cell));
    grid[key(i, j)].push_back(k);
  }
  double worst = 0.0;
  for (const auto& p : from) {
    const auto ci = static_cast<long>(std::floor((p.x - xmin) / cell));
    const auto cj = static_cast<long>(std::floor((p.y - ymin) / cell));
    double best = std::numeric_limits<double>::infinity();
    for (long r = 0; r < 1'000'000; ++r) {
      for (long i = ci - r; i <= ci + r; ++i) {
        for (long j = cj - r; j <= cj + r; ++j) {
          if (std::max(std::abs(i - ci), std::abs(j - cj)) != r) continue;
          const auto it = grid.find(key(i, j));
          if (it == grid.end()) continue;
          for (auto k : it->second) best = std::min(best, dist(p, to[k]));
        }
      }
      // Any point in ring r+1 or beyond is at least r * cell away.
      if (best <= static_cast<double>(r) * cell) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

double hausdorff_distance(const std::vector<PlanePoint>& a, const std::vector<PlanePoint>& b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

}  // namespace henon
