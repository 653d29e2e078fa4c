#include "henon/census.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <thread>

#include <Eigen/LU>

#include "henon/error.hpp"
#include "henon/manifold.hpp"
#include "henon/tangency.hpp"

namespace henon {

namespace {

constexpr double kHyperbolicMargin = 1e-8;
constexpr double kDedupTol = 1e-6;

bool escaped(const PlanePoint& z) { return !(std::abs(z.x) <= kEscapeRadius && std::abs(z.y) <= kEscapeRadius); }

double sup_dist(const PlanePoint& a, const PlanePoint& b) { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }

// Newton on phi^k(z) = z. Empty on divergence or escape.
std::optional<PlanePoint> newton_cycle(const Params& p, PlanePoint z, int k) {
  double last_step = 1.0;
  for (int it = 0; it < 50; ++it) {
    Mat2 m = Mat2::Identity();
    PlanePoint w = z;
    for (int j = 0; j < k; ++j) {
      m = jacobian(p, w) * m;
      w = apply(p, w);
      if (escaped(w)) return std::nullopt;
    }
    const Vec2 g{w.x - z.x, w.y - z.y};
    const double res = g.lpNorm<Eigen::Infinity>();
    // Long cycles pass near the saddle, which amplifies rounding; accept a
    // stalled step with a small residual.
    if (res < 1e-11 || (last_step < 1e-13 && res < 1e-7)) return z;
    const Mat2 a = m - Mat2::Identity();
    if (std::abs(a.determinant()) < 1e-300) return std::nullopt;
    const Vec2 d = a.partialPivLu().solve(-g);
    last_step = d.lpNorm<Eigen::Infinity>();
    if (!d.allFinite() || last_step > 5.0) return std::nullopt;
    z.x += d.x();
    z.y += d.y();
  }
  return std::nullopt;
}

int minimal_period(const Params& p, const PlanePoint& z, int k) {
  PlanePoint w = z;
  for (int d = 1; d <= k; ++d) {
    w = apply(p, w);
    if (k % d == 0 && sup_dist(w, z) < 1e-8) return d;
  }
  return k;
}

PeriodicOrbit make_orbit(const Params& p, const PlanePoint& start, int k) {
  PeriodicOrbit o;
  o.period = k;
  Mat2 m = Mat2::Identity();
  double det = 1.0;
  PlanePoint w = start;
  for (int j = 0; j < k; ++j) {
    o.points.push_back(w);
    const Mat2 jac = jacobian(p, w);
    m = jac * m;
    det *= jac.determinant();
    w = apply(p, w);
  }
  const auto smallest = std::min_element(o.points.begin(), o.points.end(), [](const auto& u, const auto& v) {
    return u.x < v.x || (u.x == v.x && u.y < v.y);
  });
  std::rotate(o.points.begin(), smallest, o.points.end());
  // Small multiplier from the determinant: the matrix entries are ~|big|, so
  // the small eigenvalue would otherwise carry absolute error eps |big|.
  const double tr = m.trace();
  const double disc = tr * tr - 4 * det;
  if (disc >= 0) {
    const double big = tr >= 0 ? 0.5 * (tr + std::sqrt(disc)) : 0.5 * (tr - std::sqrt(disc));
    o.multipliers = {std::complex<double>(big), std::complex<double>(big == 0 ? 0.0 : det / big)};
  } else {
    const double im = 0.5 * std::sqrt(-disc);
    o.multipliers = {std::complex<double>(0.5 * tr, im), std::complex<double>(0.5 * tr, -im)};
  }
  o.kind = classify_multipliers(o.multipliers);
  return o;
}

bool same_orbit(const PeriodicOrbit& o, const PlanePoint& z, int k) {
  if (o.period != k) return false;
  return std::any_of(o.points.begin(), o.points.end(), [&](const auto& q) { return sup_dist(q, z) < kDedupTol; });
}

void add_unique(std::vector<PeriodicOrbit>& out, const Params& p, const PlanePoint& z, int k) {
  for (const auto& o : out) {
    if (same_orbit(o, z, k)) return;
  }
  out.push_back(make_orbit(p, z, k));
}

std::vector<PlanePoint> seed_grid(const Rect& box, int n) {
  std::vector<PlanePoint> s;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      s.push_back({box.x_min + (box.x_max - box.x_min) * (i + 0.5) / n,
                   box.y_min + (box.y_max - box.y_min) * (j + 0.5) / n});
    }
  }
  return s;
}

bool polygon_contains(const std::vector<PlanePoint>& poly, const PlanePoint& q) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& u = poly[i];
    const auto& v = poly[j];
    if ((u.y > q.y) != (v.y > q.y) && q.x < (v.x - u.x) * (q.y - u.y) / (v.y - u.y) + u.x) in = !in;
  }
  return in;
}

}  // namespace

std::string to_string(OrbitKind k) {
  switch (k) {
    case OrbitKind::sink: return "sink";
    case OrbitKind::saddle: return "saddle";
    case OrbitKind::source: return "source";
    case OrbitKind::nonhyperbolic: return "nonhyperbolic";
  }
  return "unknown";
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::sinks: return "sinks";
    case Classification::chaotic_attractor: return "chaotic_attractor";
    case Classification::escape: return "escape";
    case Classification::undetermined: return "undetermined";
  }
  return "unknown";
}

OrbitKind classify_multipliers(const std::array<std::complex<double>, 2>& m) {
  const double r0 = std::abs(m[0]), r1 = std::abs(m[1]);
  const auto in = [](double r) { return r < 1 - kHyperbolicMargin; };
  const auto out = [](double r) { return r > 1 + kHyperbolicMargin; };
  if (in(r0) && in(r1)) return OrbitKind::sink;
  if (out(r0) && out(r1)) return OrbitKind::source;
  if ((in(r0) && out(r1)) || (out(r0) && in(r1))) return OrbitKind::saddle;
  return OrbitKind::nonhyperbolic;
}

std::vector<PeriodicOrbit> find_periodic_orbits(const Params& p, int max_period, const SeedingStrategy& seeds) {
  if (p.b == 0) throw Error(ErrorCode::InvalidArgument, "periodic orbit search needs b != 0");
  if (max_period < 1 || max_period > 64) throw Error(ErrorCode::InvalidArgument, "max_period must lie in [1, 64]");
  std::vector<PlanePoint> starts = seed_grid(seeds.box, seeds.grid);
  if (seeds.fixed_point_images) {
    try {
      for (const auto& fp : fixed_points(p)) {
        PlanePoint w = fp.point;
        // Slightly off the fixed point, so Newton can leave it for longer cycles.
        w.x += 1e-3;
        for (int j = 0; j < max_period && !escaped(w); ++j) {
          starts.push_back(w);
          w = apply(p, w);
        }
      }
    } catch (const Error&) {
    }
  }
  std::vector<PeriodicOrbit> out;
  for (int k = 1; k <= max_period; ++k) {
    for (const auto& s : starts) {
      const auto z = newton_cycle(p, s, k);
      if (!z || minimal_period(p, *z, k) != k) continue;
      add_unique(out, p, *z, k);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& u, const auto& v) {
    if (u.period != v.period) return u.period < v.period;
    return u.points[0].x < v.points[0].x || (u.points[0].x == v.points[0].x && u.points[0].y < v.points[0].y);
  });
  return out;
}

LyapunovReport lyapunov_exponent(const Params& p, const PlanePoint& seed, std::int64_t transient,
                                 std::int64_t iterations) {
  LyapunovReport r;
  r.params = p;
  r.transient = transient;
  r.iterations = iterations;
  r.seed_point = seed;
  PlanePoint z = seed;
  for (std::int64_t i = 0; i < transient; ++i) {
    z = apply(p, z);
    if (escaped(z)) {
      r.escaped = true;
      return r;
    }
  }
  double vx = 1.0, vy = 0.0, total = 0.0;
  for (std::int64_t i = 0; i < iterations; ++i) {
    const double nvx = vy;
    const double nvy = -p.b * vx + 2.0 * z.y * vy;
    z = apply(p, z);
    if (escaped(z)) {
      r.escaped = true;
      return r;
    }
    const double n = std::hypot(nvx, nvy);
    total += std::log(n);
    vx = nvx / n;
    vy = nvy / n;
  }
  r.exponent = iterations > 0 ? total / static_cast<double>(iterations) : 0.0;
  return r;
}

std::vector<PeriodicOrbit> attracting_cycles(const Params& p, const std::vector<PlanePoint>& seeds, int max_period,
                                             std::int64_t transient) {
  std::vector<PeriodicOrbit> out;
  for (const auto& s : seeds) {
    PlanePoint z = s;
    bool gone = false;
    for (std::int64_t i = 0; i < transient && !gone; ++i) {
      z = apply(p, z);
      gone = escaped(z);
    }
    if (gone) continue;
    PlanePoint w = z;
    for (int k = 1; k <= max_period; ++k) {
      w = apply(p, w);
      if (sup_dist(w, z) > 1e-6) continue;
      // A near return can also come from a saddle the orbit shadows; keep
      // looking at longer periods unless Newton lands on a sink.
      const auto c = newton_cycle(p, z, k);
      if (!c || minimal_period(p, *c, k) != k) continue;
      if (make_orbit(p, *c, k).kind != OrbitKind::sink) continue;
      add_unique(out, p, *c, k);
      break;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& u, const auto& v) { return u.period < v.period; });
  return out;
}

std::optional<AttractorCertificate> detect_strange_attractor(const Params& p) {
  if (p.a == 0 || p.b == 0) return std::nullopt;  // no conjugate classical region
  const std::vector<PlanePoint> seeds{{0.1, 0.1}, {0.0, 0.5}, {-0.3, 0.2}, {0.0, 0.0}, {1.0, -1.0}, {-1.0, 1.0}};
  for (const auto& s : seeds) {
    const auto rep = lyapunov_exponent(p, s, 10000, 100000);
    if (!rep.valid() || rep.exponent <= 0.05) continue;

    // No axis-aligned box is trapping here (the y-range condition diverges),
    // so the region is Henon's quadrilateral for the classical map moved
    // through the conjugacy, scaled about its centroid and checked on a dense
    // boundary sample.
    PlanePoint z = s;
    for (int i = 0; i < 10000; ++i) z = apply(p, z);
    std::vector<PlanePoint> orbit;
    orbit.reserve(20000);
    for (int i = 0; i < 20000; ++i) orbit.push_back(z = apply(p, z));

    static constexpr std::array<PlanePoint, 4> classical{
        PlanePoint{-1.33, 0.42}, PlanePoint{1.32, 0.133}, PlanePoint{1.245, -0.14}, PlanePoint{-1.06, -0.5}};
    std::array<PlanePoint, 4> base{};
    PlanePoint c{0, 0};
    for (std::size_t i = 0; i < 4; ++i) {
      base[i] = conjugacy_coordinates(-p.a, -p.b, classical[i]);
      c.x += base[i].x / 4;
      c.y += base[i].y / 4;
    }
    for (double scale : {1.0, 0.998, 1.002, 0.995, 1.005}) {
      std::vector<PlanePoint> poly(4);
      for (std::size_t i = 0; i < 4; ++i) poly[i] = {c.x + scale * (base[i].x - c.x), c.y + scale * (base[i].y - c.y)};
      if (!std::all_of(orbit.begin(), orbit.end(), [&](const PlanePoint& q) { return polygon_contains(poly, q); })) continue;
      bool trapped = true;
      for (std::size_t i = 0; i < 4 && trapped; ++i) {
        const PlanePoint& u = poly[i];
        const PlanePoint& v = poly[(i + 1) % 4];
        for (int k = 0; k < 2000 && trapped; ++k) {
          const double t = k / 2000.0;
          trapped = polygon_contains(poly, apply(p, PlanePoint{u.x + t * (v.x - u.x), u.y + t * (v.y - u.y)}));
        }
      }
      if (!trapped) continue;
      Rect box{poly[0].x, poly[0].x, poly[0].y, poly[0].y};
      for (const auto& q : poly) {
        box.x_min = std::min(box.x_min, q.x);
        box.x_max = std::max(box.x_max, q.x);
        box.y_min = std::min(box.y_min, q.y);
        box.y_max = std::max(box.y_max, q.y);
      }
      for (const auto& o : find_periodic_orbits(p, 1, SeedingStrategy{8, box, true})) {
        if (o.kind == OrbitKind::saddle && polygon_contains(poly, o.points[0])) {
          return AttractorCertificate{box, poly, o.points[0], rep};
        }
      }
      return std::nullopt;
    }
    return std::nullopt;
  }
  return std::nullopt;
}

std::vector<SweepRecord> sink_census_sweep(double b, const Interval& a_interval, int grid, int max_period,
                                           const SweepOptions& opt) {
  if (b == 0) throw Error(ErrorCode::InvalidArgument, "sweep needs b != 0");
  if (grid < 1) throw Error(ErrorCode::InvalidArgument, "grid must be positive");
  if (max_period < 1 || max_period > 64) throw Error(ErrorCode::InvalidArgument, "max_period must lie in [1, 64]");
  std::optional<double> h;
  try {
    const auto rec = solve_tangency(b, -2.0);
    if (rec.converged) h = rec.params.a;
  } catch (const Error&) {
  }
  const auto seeds = seed_grid({-2.0, 2.0, -2.0, 2.0}, opt.seeds_per_axis);

  std::vector<SweepRecord> out(static_cast<std::size_t>(grid));
  const auto work = [&](int i) {
    SweepRecord r;
    r.b = b;
    r.a = grid == 1 ? 0.5 * (a_interval.lo + a_interval.hi)
                    : a_interval.lo + (a_interval.hi - a_interval.lo) * i / (grid - 1);
    if (h) r.tangency_gap = r.a - *h;
    const Params p{r.a, b};
    // Grid seeds plus an arc of W^u(p): sinks born at the tangency have
    // basins that meet the unstable manifold.
    std::vector<PlanePoint> all = seeds;
    try {
      const auto w = unstable_curve(p);
      for (int j = 0; j < opt.manifold_seeds; ++j) {
        all.push_back(w.eval(-opt.manifold_span + 2 * opt.manifold_span * (j + 0.5) / opt.manifold_seeds));
      }
    } catch (const Error&) {
    }
    const auto sinks = attracting_cycles(p, all, max_period, opt.transient);
    for (const auto& o : sinks) r.sink_periods.push_back(o.period);
    std::sort(r.sink_periods.begin(), r.sink_periods.end());
    bool any_bounded = false;
    for (const auto& s : all) {
      const auto rep = lyapunov_exponent(p, s, opt.transient, opt.lyapunov_iterations);
      if (rep.escaped) continue;
      any_bounded = true;
      if (!r.lyapunov || rep.exponent > *r.lyapunov) r.lyapunov = rep.exponent;
      if (rep.exponent > opt.chaotic_threshold) break;
    }
    if (!r.sink_periods.empty()) {
      r.classification = Classification::sinks;
    } else if (!any_bounded) {
      r.classification = Classification::escape;
    } else if (r.lyapunov && *r.lyapunov > opt.chaotic_threshold) {
      r.classification = Classification::chaotic_attractor;
    } else {
      r.classification = Classification::undetermined;
    }
    out[static_cast<std::size_t>(i)] = std::move(r);
  };

  // Static block partition: record i is always computed by the same formula,
  // so the output does not depend on the thread count.
  const int threads = std::max(1, std::min(opt.threads, grid));
  if (threads == 1) {
    for (int i = 0; i < grid; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (int i = t; i < grid; i += threads) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

SweepSummary summarize(const std::vector<SweepRecord>& records) {
  SweepSummary s;
  s.records = static_cast<int>(records.size());
  if (records.empty()) return s;
  int sinks = 0, chaos = 0, esc = 0;
  for (const auto& r : records) {
    sinks += r.classification == Classification::sinks;
    chaos += r.classification == Classification::chaotic_attractor;
    esc += r.classification == Classification::escape;
    s.max_distinct_sinks = std::max(s.max_distinct_sinks, static_cast<int>(r.sink_periods.size()));
  }
  s.sink_fraction = static_cast<double>(sinks) / s.records;
  s.chaotic_fraction = static_cast<double>(chaos) / s.records;
  s.escape_fraction = static_cast<double>(esc) / s.records;
  return s;
}

}  // namespace henon
