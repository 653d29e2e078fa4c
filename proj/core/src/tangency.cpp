#include "henon/tangency.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/QR>

namespace henon {

namespace {

// Far enough along the left branch to contain its first few x = 0 crossings
// everywhere in the validated window.
constexpr double kCrossingSearch = -400.0;

double locate_crossing(const UnstableCurve& w, int crossing) {
  const auto cr = unstable_crossings(w, 0.0, kCrossingSearch, 0.05);
  if (static_cast<int>(cr.size()) < crossing) {
    std::ostringstream os;
    os << "left unstable branch crosses x = 0 only " << cr.size() << " times";
    throw Error(ErrorCode::NoInteriorMax, os.str());
  }
  return cr[static_cast<std::size_t>(crossing - 1)];
}

}  // namespace

SplitFunction::SplitFunction(const Params& p, int crossing)
    : params_(p), w_(unstable_curve(p)), eta_(p, 2) {
  s0_ = locate_crossing(w_, crossing);
}

ThetaValue SplitFunction::eval(double t, std::optional<double> s_guess) const {
  double s = s_guess.value_or(s0_);
  Jet2<double> j = w_.jet(s);
  for (int it = 0; it < 60; ++it) {
    const double g = j.p.x - t;
    if (j.d1.x == 0.0) throw Error(ErrorCode::NotGraphLike, "l is vertical-free only away from folds");
    const double step = g / j.d1.x;
    s -= step;
    j = w_.jet(s);
    if (std::abs(step) <= 4e-16 * std::abs(s)) break;
  }
  if (!(std::abs(j.p.x - t) <= 1e-10)) {
    std::ostringstream os;
    os << "could not solve W_x(s) = " << t << " near s = " << s0_;
    throw Error(ErrorCode::NewtonDiverged, os.str());
  }
  const double xp = j.d1.x;
  const double z = j.p.y;
  const double z1 = j.d1.y / xp;
  const double z2 = (j.d2.y * xp - j.d1.y * j.d2.x) / (xp * xp * xp);
  const auto e = eta_.eval(z);
  ThetaValue v;
  v.s = s;
  v.zeta = z;
  v.theta = params_.a - params_.b * t + z * z - e.y;
  v.d1 = -params_.b + 2.0 * z * z1 - e.d1 * z1;
  v.d2 = 2.0 * z1 * z1 + 2.0 * z * z2 - e.d2 * z1 * z1 - e.d1 * z2;
  return v;
}

ThetaProfile theta_profile(const Params& p, double delta, int grid) {
  if (!(delta > 0.0) || grid < 3) throw Error(ErrorCode::InvalidArgument, "need delta > 0 and grid >= 3");
  const SplitFunction split(p);
  ThetaProfile prof;
  prof.params = p;
  prof.delta = delta;
  prof.ts.resize(static_cast<std::size_t>(grid));
  prof.values.resize(prof.ts.size());
  std::vector<double> params(prof.ts.size());
  // Continuation outward from the crossing at t = 0.
  const int mid = grid / 2;
  for (int i = 0; i < grid; ++i) prof.ts[static_cast<std::size_t>(i)] = -delta + 2.0 * delta * i / (grid - 1);
  auto fill = [&](int i, std::optional<double> guess) {
    const auto v = split.eval(prof.ts[static_cast<std::size_t>(i)], guess);
    prof.values[static_cast<std::size_t>(i)] = v.theta;
    params[static_cast<std::size_t>(i)] = v.s;
    return v.s;
  };
  const double s_mid = fill(mid, std::nullopt);
  double guess = s_mid;
  for (int i = mid + 1; i < grid; ++i) guess = fill(i, guess);
  guess = s_mid;
  for (int i = mid - 1; i >= 0; --i) guess = fill(i, guess);

  const auto best = static_cast<int>(std::distance(prof.values.begin(),
                                                   std::max_element(prof.values.begin(), prof.values.end())));
  if (best == 0 || best == grid - 1) {
    std::ostringstream os;
    os << "theta is largest at the window edge t = " << prof.ts[static_cast<std::size_t>(best)] << " for (a,b) = ("
       << p.a << ", " << p.b << ")";
    throw Error(ErrorCode::NoInteriorMax, os.str());
  }
  double t = prof.ts[static_cast<std::size_t>(best)];
  double s = params[static_cast<std::size_t>(best)];
  ThetaValue v = split.eval(t, s);
  const double h = prof.ts[1] - prof.ts[0];
  for (int it = 0; it < 50; ++it) {
    if (!(v.d2 < 0.0)) break;
    double step = v.d1 / v.d2;
    step = std::clamp(step, -h, h);
    t -= step;
    v = split.eval(t, v.s);
    if (std::abs(step) <= 1e-15) break;
  }
  if (!(v.d2 < 0.0) || std::abs(t) >= delta) {
    throw Error(ErrorCode::NoInteriorMax, "theta has no quadratic interior maximum");
  }
  prof.t_star = t;
  prof.theta_star = v.theta;
  prof.second_deriv = v.d2;
  prof.s_star = v.s;
  prof.fold_point = {v.zeta, p.a - p.b * t + v.zeta * v.zeta};
  return prof;
}

double split_function_H(const Params& p, double delta) { return theta_profile(p, delta).theta_star; }

double split_function_H_at_zero_b(double a) { return a * a + a - 0.5 * (1.0 + std::sqrt(1.0 - 4.0 * a)); }

double dH_da(const Params& p, double da) {
  return (split_function_H({p.a + da, p.b}) - split_function_H({p.a - da, p.b})) / (2.0 * da);
}

double dH_db(const Params& p, double db) {
  return (split_function_H({p.a, p.b + db}) - split_function_H({p.a, p.b - db})) / (2.0 * db);
}

namespace {

struct RootResult {
  double a = 0.0;
  double H = 0.0;
  int iterations = 0;
  bool converged = false;
};

RootResult newton_in_a(double b, double a0, const TangencySolveOptions& opt) {
  RootResult r;
  double a = a0;
  double H = split_function_H({a, b}, opt.delta);
  // Bracket [lo, hi] with a sign change, filled in as iterates land on both sides.
  std::optional<double> neg, pos;
  auto note = [&](double x, double hx) {
    if (hx < 0.0) neg = x;
    if (hx > 0.0) pos = x;
  };
  note(a, H);
  for (int it = 1; it <= opt.max_iter; ++it) {
    r.iterations = it;
    if (std::abs(H) <= opt.tol) {
      r.converged = true;
      break;
    }
    const double slope = dH_da({a, b});
    double next = slope != 0.0 ? a - H / slope : a;
    const bool outside = !(next >= opt.a_min && next <= opt.a_max);
    if (outside && neg && pos) next = 0.5 * (*neg + *pos);
    if (!(next >= opt.a_min && next <= opt.a_max)) break;
    double Hn = split_function_H({next, b}, opt.delta);
    // Fall back to bisection when Newton fails to reduce |H| and a bracket exists.
    if (std::abs(Hn) > std::abs(H) && neg && pos) {
      next = 0.5 * (*neg + *pos);
      Hn = split_function_H({next, b}, opt.delta);
    }
    a = next;
    H = Hn;
    note(a, H);
  }
  if (std::abs(H) <= opt.tol) r.converged = true;
  r.a = a;
  r.H = H;
  return r;
}

}  // namespace

TangencyRecord solve_tangency(double b, double a_seed, const TangencySolveOptions& opt) {
  TangencyRecord rec;
  RootResult root;
  if (b == 0.0) {
    // H(a, 0) = 0 reduces to (u - 3)(u + 1)^2 = 0 with u = sqrt(1 - 4a): a = -2.
    root.a = -2.0;
    root.H = split_function_H({-2.0, 0.0}, opt.delta);
    root.converged = std::abs(root.H) <= opt.tol;
  } else {
    root = newton_in_a(b, a_seed, opt);
  }
  rec.params = {root.a, b};
  rec.iterations = root.iterations;
  rec.residual = std::abs(root.H);
  if (!root.converged) {
    std::ostringstream os;
    os << "Newton in a stalled at a = " << root.a << " with H = " << root.H << " for b = " << b;
    throw Error(ErrorCode::NewtonDiverged, os.str());
  }
  const auto prof = theta_profile(rec.params, opt.delta);
  rec.point = prof.fold_point;
  rec.t_star = prof.t_star;
  rec.second_deriv = prof.second_deriv;
  rec.unfolding_speed = dH_da(rec.params);
  rec.kind = TangencyKind::homoclinic;
  rec.converged = true;
  if (opt.check_slope && b != 0.0) {
    const double db = std::abs(b) / 10.0;
    TangencySolveOptions inner = opt;
    inner.check_slope = false;
    const double hp = newton_in_a(b + db, root.a, inner).a;
    const double hm = newton_in_a(b - db, root.a, inner).a;
    rec.dh_db_fd = (hp - hm) / (2.0 * db);
    rec.dh_db_ift = -dH_db(rec.params) / rec.unfolding_speed;
  } else if (opt.check_slope) {
    rec.dh_db_ift = -dH_db(rec.params) / rec.unfolding_speed;
    rec.dh_db_fd = std::nan("");
  }
  return rec;
}

std::vector<TangencyRecord> solve_tangency_curve(const std::vector<double>& b_values, double a_seed,
                                                 const TangencySolveOptions& opt) {
  if (!(opt.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  std::vector<TangencyRecord> out;
  double seed = a_seed;
  for (double b : b_values) {
    try {
      out.push_back(solve_tangency(b, seed, opt));
      seed = out.back().params.a;
    } catch (const Error& e) {
      TangencyRecord rec;
      rec.params = {seed, b};
      rec.converged = false;
      rec.failure = e.what();
      out.push_back(rec);
    }
  }
  return out;
}

double unfolding_speed(const TangencyRecord& record, double da) {
  const Params& p = record.params;
  return (split_function_H({p.a + da, p.b}) - split_function_H({p.a - da, p.b})) / (2.0 * da);
}

namespace {

struct GraphRun {
  std::vector<double> u;
  std::vector<double> v;
};

// Nodes of c inside the tube expressed in the (u, v) frame; a graph over u.
std::optional<GraphRun> tube_graph(const CurveSegment& c, const Vec2& o, const Vec2& eu, const Vec2& ev,
                                   const Vec2& ep, double half_width, const Vec2& tube_origin) {
  GraphRun run;
  bool inside = false, closed = false;
  for (const auto& z : c.nodes) {
    const Vec2 q = to_vec(z);
    const bool in = std::abs((q - tube_origin).dot(ep)) <= half_width;
    if (in) {
      if (closed) throw Error(ErrorCode::NotGraphLike, "curve enters the tube more than once");
      inside = true;
      run.u.push_back((q - o).dot(eu));
      run.v.push_back((q - o).dot(ev));
    } else if (inside) {
      closed = true;
    }
  }
  if (run.u.size() < 3) return std::nullopt;
  const bool up = run.u.back() > run.u.front();
  for (std::size_t i = 1; i < run.u.size(); ++i) {
    if ((run.u[i] > run.u[i - 1]) != up || run.u[i] == run.u[i - 1]) {
      throw Error(ErrorCode::NotGraphLike, "curve folds inside the tube");
    }
  }
  if (!up) {
    std::reverse(run.u.begin(), run.u.end());
    std::reverse(run.v.begin(), run.v.end());
  }
  return run;
}

double interp(const GraphRun& g, double u) {
  const auto it = std::upper_bound(g.u.begin(), g.u.end(), u);
  std::size_t hi = static_cast<std::size_t>(std::distance(g.u.begin(), it));
  hi = std::clamp<std::size_t>(hi, 1, g.u.size() - 1);
  const std::size_t lo = hi - 1;
  const double w = (u - g.u[lo]) / (g.u[hi] - g.u[lo]);
  return g.v[lo] + w * (g.v[hi] - g.v[lo]);
}

}  // namespace

std::optional<QuadraticContact> detect_quadratic_tangency(const CurveSegment& c1, const CurveSegment& c2,
                                                          const Transversal& tr, double tol, double min_curvature) {
  if (!(tr.half_width > 0.0) || tr.direction.norm() == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "transversal needs a direction and a positive half width");
  }
  const Vec2 et = tr.direction.normalized();
  const Vec2 ep(et.y(), -et.x());
  const Vec2 t0 = to_vec(tr.origin);
  // Where c1 crosses the transversal line.
  std::optional<std::size_t> k;
  for (std::size_t i = 0; i + 1 < c1.size(); ++i) {
    const double d0 = (to_vec(c1.nodes[i]) - t0).dot(ep);
    const double d1 = (to_vec(c1.nodes[i + 1]) - t0).dot(ep);
    if (d0 == 0.0 || d0 * d1 < 0.0) {
      k = i;
      break;
    }
  }
  if (!k) return std::nullopt;
  const Vec2 a0 = to_vec(c1.nodes[*k]);
  const Vec2 a1 = to_vec(c1.nodes[*k + 1]);
  const double d0 = (a0 - t0).dot(ep), d1 = (a1 - t0).dot(ep);
  const double w = d0 == d1 ? 0.0 : d0 / (d0 - d1);
  const Vec2 o = a0 + w * (a1 - a0);
  Vec2 eu = (a1 - a0).normalized();
  if (eu.dot(ep) < 0.0) eu = -eu;
  const Vec2 ev(-eu.y(), eu.x());

  const auto g1 = tube_graph(c1, o, eu, ev, ep, tr.half_width, t0);
  const auto g2 = tube_graph(c2, o, eu, ev, ep, tr.half_width, t0);
  if (!g1 || !g2) return std::nullopt;
  const double ulo = std::max(g1->u.front(), g2->u.front());
  const double uhi = std::min(g1->u.back(), g2->u.back());
  if (!(uhi > ulo)) return std::nullopt;

  constexpr int kGrid = 201;
  Eigen::MatrixXd A(kGrid, 3);
  Eigen::VectorXd rhs(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    const double u = ulo + (uhi - ulo) * i / (kGrid - 1);
    A(i, 0) = u * u;
    A(i, 1) = u;
    A(i, 2) = 1.0;
    rhs(i) = interp(*g2, u) - interp(*g1, u);
  }
  const Eigen::Vector3d c = A.colPivHouseholderQr().solve(rhs);
  QuadraticContact out;
  out.relative_curvature = c(0);
  const bool curved = std::abs(c(0)) >= min_curvature;
  double u_star = curved ? -c(1) / (2.0 * c(0)) : 0.0;
  const bool interior = curved && u_star >= ulo && u_star <= uhi;
  if (!interior) u_star = std::clamp(u_star, ulo, uhi);
  out.u_extremum = u_star;
  out.normal_gap = c(0) * u_star * u_star + c(1) * u_star + c(2);
  out.tangent = interior && std::abs(out.normal_gap) <= tol;
  out.point = to_point(o + u_star * eu + interp(*g1, u_star) * ev);
  return out;
}

CurveSegment straightened_fold(const Params& p, double half_window, int nodes) {
  const auto prof = theta_profile(p);
  const SplitFunction split(p);
  std::vector<CurveSample> samples;
  double s = prof.s_star;
  std::vector<CurveSample> right;
  for (int i = nodes / 2; i < nodes; ++i) {
    const double t = prof.t_star - half_window + 2.0 * half_window * i / (nodes - 1);
    const auto v = split.eval(t, s);
    s = v.s;
    right.push_back({t, {{t, v.theta}, {1.0, v.d1}, {0.0, v.d2}}});
  }
  s = prof.s_star;
  for (int i = nodes / 2 - 1; i >= 0; --i) {
    const double t = prof.t_star - half_window + 2.0 * half_window * i / (nodes - 1);
    const auto v = split.eval(t, s);
    s = v.s;
    samples.push_back({t, {{t, v.theta}, {1.0, v.d1}, {0.0, v.d2}}});
  }
  std::reverse(samples.begin(), samples.end());
  samples.insert(samples.end(), right.begin(), right.end());
  return make_curve_segment(samples);
}

std::vector<VelocityGapReport> leaf_velocity_gap_limit(const std::vector<double>& a_bar_values) {
  std::vector<VelocityGapReport> out;
  for (double a : a_bar_values) {
    if (a >= 0.25) throw Error(ErrorCode::NoRealFixedPoints, "limit family has no real fixed point for a_bar >= 1/4");
    VelocityGapReport r;
    r.a_bar = a;
    r.slope_stable = -1.0 / std::sqrt(1.0 - 4.0 * a);
    r.slope_unstable = 2.0 * a + 1.0;
    r.gap = r.slope_stable - r.slope_unstable;
    out.push_back(r);
  }
  return out;
}

}  // namespace henon
