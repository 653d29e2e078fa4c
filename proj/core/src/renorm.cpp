#include "henon/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/NumericalDiff>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "henon/manifold.hpp"

namespace henon {

namespace {

using std::abs;

struct HighMat {
  HighReal m00 = 0, m01 = 0, m10 = 0, m11 = 0;
  HighReal det() const { return m00 * m11 - m01 * m10; }
  HighReal trace() const { return m00 + m11; }
};

HighReal max_abs(const HighPoint& z) { return std::max(abs(z.x), abs(z.y)); }

// Point and Jacobian of the full return.
HighPoint return_with_jacobian(const ReturnFamily& f, const HighReal& a, const HighPoint& z, HighMat& jac,
                               double escape) {
  const HighPoint zero{0, 0};
  const auto jx = f.ret(a, {z, {1, 0}, zero}, escape);
  const auto jy = f.ret(a, {z, {0, 1}, zero}, escape);
  jac = {jx.d1.x, jy.d1.x, jx.d1.y, jy.d1.y};
  return jx.p;
}

struct Eigen2 {
  HighReal big;    // larger magnitude
  HighReal small;
};

Eigen2 eigenvalues(const HighMat& m) {
  using std::sqrt;
  const HighReal tr = m.trace();
  const HighReal disc = tr * tr - 4 * m.det();
  if (disc < 0) throw Error(ErrorCode::ReturnNotFound, "return fixed point has complex multipliers");
  const HighReal root = sqrt(disc);
  const HighReal big = tr >= 0 ? (tr + root) / 2 : (tr - root) / 2;
  return {big, big == 0 ? HighReal(0) : m.det() / big};
}

// Newton on R(z) = z.
bool polish_fixed_point(const ReturnFamily& f, const HighReal& a, HighPoint& z, double escape) {
  for (int it = 0; it < 60; ++it) {
    HighMat j;
    HighPoint r;
    try {
      r = return_with_jacobian(f, a, z, j, escape);
    } catch (const Error&) {
      return false;
    }
    const HighReal gx = r.x - z.x, gy = r.y - z.y;
    const HighReal a00 = j.m00 - 1, a11 = j.m11 - 1;
    const HighReal det = a00 * a11 - j.m01 * j.m10;
    if (det == 0) return false;
    const HighReal dx = (a11 * gx - j.m01 * gy) / det;
    const HighReal dy = (a00 * gy - j.m10 * gx) / det;
    z.x -= dx;
    z.y -= dy;
    const HighReal size = max_abs(HighPoint{dx, dy});
    if (size <= HighReal(1e-90) * (1 + max_abs(z))) return true;
    if (!(size < 10)) return false;
  }
  return false;
}

// a_bar read off the multiplier of the fixed point: psi's fixed points have
// multiplier 1 +- sqrt(1 - 4 a_bar).
HighReal a_bar_of_multiplier(const HighReal& m) { return (1 - (m - 1) * (m - 1)) / 4; }

HighReal a_bar_at(const ReturnFamily& f, const HighReal& a, HighPoint& z, double escape, HighReal* multiplier) {
  if (!polish_fixed_point(f, a, z, escape)) {
    throw Error(ErrorCode::ReturnNotFound, "lost the fixed point of the return map");
  }
  HighMat j;
  return_with_jacobian(f, a, z, j, escape);
  const auto ev = eigenvalues(j);
  if (multiplier) *multiplier = ev.big;
  return a_bar_of_multiplier(ev.big);
}

// Direction of the larger column of m.
HighPoint dominant_column(const HighMat& m) {
  const HighPoint c0{m.m00, m.m10}, c1{m.m01, m.m11};
  return max_abs(c0) >= max_abs(c1) ? c0 : c1;
}

struct Perturbation {
  // Phi_new(z) = Phi(c + G z), Theta_new(a) = Theta(t0 + (1 + t1) a)
  std::array<double, 8> d{};
};

RenormFrame perturbed(const RenormFrame& f, const Perturbation& p) {
  RenormFrame out = f;
  const auto& d = p.d;
  const auto& A = f.affine_in;
  out.affine_in.origin = A.apply({HighReal(d[0]), HighReal(d[1])});
  out.affine_in.e1 = HighReal(1 + d[2]) * A.e1 + HighReal(d[4]) * A.e2;
  out.affine_in.e2 = HighReal(d[3]) * A.e1 + HighReal(1 + d[5]) * A.e2;
  out.affine_param.offset = f.affine_param.apply(HighReal(d[6]));
  out.affine_param.slope = f.affine_param.slope * HighReal(1 + d[7]);
  return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1));
  return v;
}

struct FitFunctor : Eigen::DenseFunctor<double> {
  const RenormFrame* base;
  std::vector<std::array<double, 3>> samples;  // a_bar, x_bar, y_bar

  FitFunctor(const RenormFrame* f, std::vector<std::array<double, 3>> s)
      : Eigen::DenseFunctor<double>(8, static_cast<int>(2 * s.size())), base(f), samples(std::move(s)) {}

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
    Perturbation p;
    for (int i = 0; i < 8; ++i) p.d[static_cast<std::size_t>(i)] = x[i];
    const RenormFrame fr = perturbed(*base, p);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const auto& s = samples[k];
      try {
        const HighPoint out = renormalized_return_map(fr, HighReal(s[0]), HighPoint{HighReal(s[1]), HighReal(s[2])});
        fvec[static_cast<Eigen::Index>(2 * k)] = static_cast<double>(out.x) - s[2];
        fvec[static_cast<Eigen::Index>(2 * k + 1)] = static_cast<double>(out.y) - (s[2] * s[2] + s[0]);
      } catch (const Error&) {
        fvec[static_cast<Eigen::Index>(2 * k)] = 1e3;
        fvec[static_cast<Eigen::Index>(2 * k + 1)] = 1e3;
      }
    }
    return 0;
  }
};

// Orbit of the tangency in chart parameters.
struct TangencyOrbit {
  Params params;
  PlanePoint p;
  double s_stable = 0.0;    // Q(s_stable) = q
  double s_unstable = 0.0;  // W(s_unstable) = q
  int m_steps = 0;          // forward steps along S into the radius
  int k_steps = 0;          // backward steps along W^u into the radius
};

TangencyOrbit tangency_orbit(const TangencyRecord& record, double radius) {
  TangencyOrbit o;
  o.params = record.params;
  const auto& p = record.params;
  const auto sd = fixed_point(p);
  o.p = sd.point;
  const StableGraph eta(p);
  o.s_stable = eta.parameter_at(record.point.x);
  const auto w = unstable_curve(p);
  o.s_unstable = theta_profile(p).s_star * w.sigma();
  const auto q = *eta.curve();
  const auto dist = [&](const PlanePoint& z) { return std::hypot(z.x - o.p.x, z.y - o.p.y); };
  double s = o.s_stable;
  while (dist(q.eval(s)) > radius) {
    s *= q.lambda();
    if (++o.m_steps > 200) throw Error(ErrorCode::ReturnNotFound, "stable orbit of q does not approach p");
  }
  s = o.s_unstable;
  while (dist(w.eval(s)) > radius) {
    s /= w.sigma();
    if (++o.k_steps > 200) throw Error(ErrorCode::ReturnNotFound, "unstable orbit of q does not approach p");
  }
  return o;
}

// Multiple shooting for a period-R orbit of phi_{a,b} in double precision.
bool shoot(const Params& p, std::vector<PlanePoint>& z) {
  const int R = static_cast<int>(z.size());
  const int n = 2 * R;
  double last_step = 1.0;
  for (int it = 0; it < 40; ++it) {
    Eigen::VectorXd F(n);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    double worst = 0.0;
    for (int j = 0; j < R; ++j) {
      const int k = (j + 1) % R;
      const auto img = apply(p, z[static_cast<std::size_t>(j)]);
      F[2 * j] = img.x - z[static_cast<std::size_t>(k)].x;
      F[2 * j + 1] = img.y - z[static_cast<std::size_t>(k)].y;
      worst = std::max({worst, std::abs(F[2 * j]), std::abs(F[2 * j + 1])});
      const auto J = jacobian(p, z[static_cast<std::size_t>(j)]);
      M.block<2, 2>(2 * j, 2 * j) = J;
      M(2 * j, 2 * k) -= 1.0;
      M(2 * j + 1, 2 * k + 1) -= 1.0;
    }
    if (!std::isfinite(worst)) return false;
    if (worst < 1e-13) return true;
    if (worst < 1e-9 && last_step < 1e-12) return true;  // stagnated at rounding level
    const Eigen::VectorXd d = M.partialPivLu().solve(-F);
    if (!d.allFinite()) return false;
    for (int j = 0; j < R; ++j) {
      z[static_cast<std::size_t>(j)].x += d[2 * j];
      z[static_cast<std::size_t>(j)].y += d[2 * j + 1];
    }
    last_step = d.lpNorm<Eigen::Infinity>();
    if (last_step > 10) return false;
  }
  return false;
}

double orbit_a_bar(const Params& p, const std::vector<PlanePoint>& z) {
  Mat2 m = Mat2::Identity();
  for (const auto& zj : z) m = jacobian(p, zj) * m;
  const double tr = m.trace(), det = m.determinant();
  const double disc = tr * tr - 4 * det;
  if (disc < 0) return std::numeric_limits<double>::quiet_NaN();
  const double big = tr >= 0 ? 0.5 * (tr + std::sqrt(disc)) : 0.5 * (tr - std::sqrt(disc));
  return 0.25 * (1 - (big - 1) * (big - 1));
}

}  // namespace

PlanePoint limit_family_eval(double a_bar, const PlanePoint& z) { return {z.y, z.y * z.y + a_bar}; }

LimitFamilyData limit_family_data(double a_bar) {
  if (a_bar > 0.25) throw Error(ErrorCode::NoRealFixedPoints, "psi has no real fixed point for a_bar > 1/4");
  LimitFamilyData d;
  d.a_bar = a_bar;
  const double root = std::sqrt(1 - 4 * a_bar);
  const double y1 = 0.5 * (1 + root);
  d.fixed_point = {y1, y1};
  d.endpoint = {a_bar, a_bar * a_bar + a_bar};
  d.slope_fixed = root == 0 ? -std::numeric_limits<double>::infinity() : -1 / root;
  d.slope_endpoint = 2 * a_bar + 1;
  return d;
}

Jet2<HighReal> ReturnFamily::ret(const HighReal& a, Jet2<HighReal> z, double escape) const {
  const int r = return_time();
  for (int i = 0; i < r; ++i) {
    z = step(a, z);
    if (!(max_abs(z.p) <= escape)) throw Error(ErrorCode::EscapedBox, "return orbit left the validity region");
  }
  return z;
}

HenonFamily::HenonFamily(double b, int return_time) : b_(b), r_(return_time) {
  if (return_time < 1) throw Error(ErrorCode::InvalidArgument, "return time must be positive");
}

Jet2<HighReal> HenonFamily::step(const HighReal& a, const Jet2<HighReal>& z) const {
  return apply(BasicParams<HighReal>{a, HighReal(b_)}, z);
}

Jet2<HighReal> LimitFamily::step(const HighReal& a, const Jet2<HighReal>& z) const {
  return apply(BasicParams<HighReal>{a, HighReal(0)}, z);
}

HighPoint AffinePlaneMap::apply(const HighPoint& zb) const { return origin + zb.x * e1 + zb.y * e2; }

HighPoint AffinePlaneMap::inverse(const HighPoint& z) const {
  const HighReal det = e1.x * e2.y - e2.x * e1.y;
  if (det == 0) throw Error(ErrorCode::IllConditioned, "singular affine frame");
  const HighReal dx = z.x - origin.x, dy = z.y - origin.y;
  return {(e2.y * dx - e2.x * dy) / det, (e1.x * dy - e1.y * dx) / det};
}

HighPoint renormalized_return_map(const RenormFrame& frame, const HighReal& a_bar, const HighPoint& zb) {
  if (!frame.family) throw Error(ErrorCode::FrameUnavailable, "frame has no return family");
  const double wx = frame.box.x_max - frame.box.x_min, wy = frame.box.y_max - frame.box.y_min;
  const double cx = 0.5 * (frame.box.x_max + frame.box.x_min), cy = 0.5 * (frame.box.y_max + frame.box.y_min);
  if (!(abs(zb.x - cx) <= wx) || !(abs(zb.y - cy) <= wy)) {
    throw Error(ErrorCode::EscapedBox, "point lies far outside the frame box");
  }
  const HighPoint z = frame.affine_in.apply(zb);
  const HighPoint zero{0, 0};
  const auto out = frame.family->ret(frame.affine_param.apply(a_bar), {z, zero, zero});
  return frame.affine_in.inverse(out.p);
}

PlanePoint renormalized_return_map(const RenormFrame& frame, double a_bar, const PlanePoint& zb) {
  return point_cast<double>(renormalized_return_map(frame, HighReal(a_bar), point_cast<HighReal>(zb)));
}

namespace {

// Frame seeded at a fixed point z of the family at parameter a, where a_bar
// moves at rate `slope` per unit a.
RenormFrame frame_at_fixed_point(std::shared_ptr<const ReturnFamily> family, const HighReal& a, const HighPoint& z,
                                 const HighReal& slope, const RenormOptions& opt) {
  const ReturnFamily& f = *family;
  HighMat j;
  return_with_jacobian(f, a, z, j, opt.escape);
  const auto ev = eigenvalues(j);
  const HighReal m = ev.big;
  const HighPoint k = dominant_column({j.m00 - m, j.m01, j.m10, j.m11 - m});
  const HighPoint v = dominant_column({j.m00 - ev.small, j.m01, j.m10, j.m11 - ev.small});
  const HighPoint zero{0, 0};
  const HighPoint d2 = f.ret(a, {z, v, zero}, opt.escape).d2;
  // d2 = A_v v + A_k k
  const HighReal det = v.x * k.y - k.x * v.y;
  if (det == 0) throw Error(ErrorCode::IllConditioned, "fixed point directions are parallel");
  const HighReal A_v = (d2.x * k.y - k.x * d2.y) / det;
  const HighReal A_k = (v.x * d2.y - d2.x * v.y) / det;
  if (A_v == 0) throw Error(ErrorCode::IllConditioned, "return map has no fold along the unstable direction");
  const HighReal c = 2 / A_v;
  const HighReal beta = c * c * A_k / 2;

  RenormFrame fr;
  fr.family = family;
  fr.return_time = f.return_time();
  fr.affine_in.e2 = c * v + beta * k;
  fr.affine_in.e1 = (-m * beta) * k;
  const HighReal y_fix = m / 2;
  fr.affine_in.origin = z - y_fix * fr.affine_in.e1 - y_fix * fr.affine_in.e2;
  fr.affine_param.slope = 1 / slope;
  fr.affine_param.offset = a + 2 / slope;
  fr.box = opt.box;
  fr.a_bar_lo = opt.a_bar_lo;
  fr.a_bar_hi = opt.a_bar_hi;
  const HighReal cond = max_abs(fr.affine_in.e1) / max_abs(fr.affine_in.e2);
  if (fr.affine_in.e1.x * fr.affine_in.e2.y - fr.affine_in.e2.x * fr.affine_in.e1.y == 0 || cond == 0) {
    throw Error(ErrorCode::IllConditioned, "degenerate affine frame");
  }
  return fr;
}

}  // namespace

RenormFrame seed_frame(std::shared_ptr<const ReturnFamily> family, double a_guess, const PlanePoint& z_guess,
                       const RenormOptions& opt) {
  if (!family) throw Error(ErrorCode::InvalidArgument, "null return family");
  const ReturnFamily& f = *family;
  HighReal a = a_guess;
  HighPoint z = point_cast<HighReal>(z_guess);
  HighReal g = a_bar_at(f, a, z, opt.escape, nullptr);

  // Newton in a on a_bar(a) = -2, following the fixed point.
  HighReal slope = 0;
  for (int it = 0; it < 80; ++it) {
    const HighReal da = HighReal(1e-40) * (1 + abs(a));
    HighPoint z2 = z;
    slope = (a_bar_at(f, a + da, z2, opt.escape, nullptr) - g) / da;
    if (slope == 0) throw Error(ErrorCode::IllConditioned, "a_bar does not depend on a");
    if (abs(g + 2) < HighReal(1e-60)) break;
    HighReal step = (-2 - g) / slope;
    bool moved = false;
    for (int half = 0; half < 40 && !moved; ++half, step /= 2) {
      HighPoint trial = z;
      try {
        const HighReal g_new = a_bar_at(f, a + step, trial, opt.escape, nullptr);
        if (abs(g_new + 2) < abs(g + 2) || half > 30) {
          a += step;
          z = trial;
          g = g_new;
          moved = true;
        }
      } catch (const Error&) {
      }
    }
    if (!moved) throw Error(ErrorCode::ReturnNotFound, "cannot follow the fixed point to a_bar = -2");
  }
  if (!(abs(g + 2) < HighReal(1e-40))) throw Error(ErrorCode::ReturnNotFound, "a_bar = -2 not reached");

  return frame_at_fixed_point(family, a, z, slope, opt);
}

FitReport quadratic_fit_residual(const RenormFrame& frame, int samples) {
  if (samples < 256) throw Error(ErrorCode::InvalidArgument, "residuals need at least 256 samples");
  const int g = static_cast<int>(std::ceil(std::sqrt(samples / 3.0)));
  FitReport rep;
  rep.n = frame.n;
  rep.iterations = frame.fit.iterations;
  const HighReal h("1e-30");
  for (double ab : linspace(frame.a_bar_lo, frame.a_bar_hi, 3)) {
    for (double x : linspace(frame.box.x_min, frame.box.x_max, g)) {
      for (double y : linspace(frame.box.y_min, frame.box.y_max, g)) {
        ++rep.sample_count;
        const HighReal A(ab);
        const HighPoint zb{HighReal(x), HighReal(y)};
        try {
          const HighPoint out = renormalized_return_map(frame, A, zb);
          const double e0 = std::max(std::abs(static_cast<double>(out.x) - y),
                                     std::abs(static_cast<double>(out.y) - (y * y + ab)));
          rep.residual_c0 = std::max(rep.residual_c0, e0);
          const auto fd = [&](const HighPoint& dir) {
            const HighPoint plus = renormalized_return_map(frame, A, zb + h * dir);
            const HighPoint minus = renormalized_return_map(frame, A, zb - h * dir);
            return HighPoint{(plus.x - minus.x) / (2 * h), (plus.y - minus.y) / (2 * h)};
          };
          const HighPoint cx = fd({1, 0}), cy = fd({0, 1});
          const double e1 = std::max({std::abs(static_cast<double>(cx.x)), std::abs(static_cast<double>(cx.y)),
                                      std::abs(static_cast<double>(cy.x) - 1),
                                      std::abs(static_cast<double>(cy.y) - 2 * y)});
          rep.residual_c1 = std::max(rep.residual_c1, e1);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::EscapedBox) throw;
          rep.residual_c0 = std::numeric_limits<double>::infinity();
          rep.residual_c1 = std::numeric_limits<double>::infinity();
        }
      }
    }
  }
  return rep;
}

RenormFrame fit_frame(RenormFrame frame, const RenormOptions& opt) {
  std::vector<std::array<double, 3>> samples;
  for (double ab : linspace(opt.a_bar_lo, opt.a_bar_hi, opt.fit_a_bars)) {
    for (double x : linspace(opt.box.x_min, opt.box.x_max, opt.fit_grid)) {
      for (double y : linspace(opt.box.y_min, opt.box.y_max, opt.fit_grid)) samples.push_back({ab, x, y});
    }
  }
  frame.box = opt.box;
  frame.a_bar_lo = opt.a_bar_lo;
  frame.a_bar_hi = opt.a_bar_hi;
  int iterations = 0;
  if (opt.fit) {
    FitFunctor functor(&frame, samples);
    Eigen::NumericalDiff<FitFunctor> numdiff(functor);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<FitFunctor>> lm(numdiff);
    lm.setMaxfev(opt.max_fit_iterations * 9);
    lm.setXtol(1e-14);
    lm.setFtol(1e-14);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(8);
    Eigen::VectorXd before(functor.values());
    functor(x, before);
    lm.minimize(x);
    Eigen::VectorXd after(functor.values());
    functor(x, after);
    iterations = static_cast<int>(lm.iterations());
    if (after.squaredNorm() < before.squaredNorm()) {
      Perturbation p;
      for (int i = 0; i < 8; ++i) p.d[static_cast<std::size_t>(i)] = x[i];
      frame = perturbed(frame, p);
    }
  }
  frame.fit.iterations = iterations;
  frame.fit = quadratic_fit_residual(frame, opt.report_samples);
  frame.fit.iterations = iterations;
  return frame;
}

int transit_time(const TangencyRecord& record, double radius) {
  const auto o = tangency_orbit(record, radius);
  return o.m_steps + o.k_steps;
}

RenormFrame build_frame(const TangencyRecord& record, int n, const Rect& box, const RenormOptions& opt_in) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "n must be non-negative");
  if (!record.converged) throw Error(ErrorCode::InvalidArgument, "tangency record did not converge");
  RenormOptions opt = opt_in;
  opt.box = box;
  const auto orbit = tangency_orbit(record, 0.05);
  const int N = orbit.m_steps + orbit.k_steps;
  const int R = N + n;
  const int K = orbit.k_steps;
  Params p = record.params;
  const auto q = stable_curve(p);
  const auto w = unstable_curve(p);

  // The tangency orbit: forward along S from q, backward along W^u.
  std::vector<PlanePoint> z(static_cast<std::size_t>(R));
  double s = orbit.s_stable;
  for (int j = 0; j < R - K; ++j, s *= q.lambda()) z[static_cast<std::size_t>(j)] = q.eval(s);
  s = orbit.s_unstable;
  for (int j = 1; j <= K; ++j) {
    s /= w.sigma();
    z[static_cast<std::size_t>(R - j)] = w.eval(s);
  }
  if (!shoot(p, z)) {
    std::ostringstream os;
    os << "no period-" << R << " orbit shadows the tangency orbit at b = " << p.b;
    throw Error(ErrorCode::ReturnNotFound, os.str());
  }

  // Continuation in a toward a_bar = -2, quartering a_bar while it is large.
  double g = orbit_a_bar(p, z);
  double slope = 0.0;
  for (int it = 0; it < 200 && std::abs(g + 2) > 1e-3; ++it) {
    if (!std::isfinite(g)) throw Error(ErrorCode::ReturnNotFound, "return orbit lost its real multipliers");
    const double target = g < -8 ? g / 4 : -2.0;
    // a_bar moves by ~sigma^(2n) per unit a; keep the difference step small in a_bar.
    double da = slope == 0.0 ? 1e-10 : 1e-4 * std::max(1.0, std::abs(g)) / std::abs(slope);
    // Below ~1e3 ulp of a, a_bar is noise in double; the high-precision seed takes over.
    if (slope != 0.0 && da < 1e3 * std::numeric_limits<double>::epsilon() * std::abs(p.a)) break;
    double new_slope = 0.0;
    for (int tries = 0; tries < 8 && new_slope == 0.0; ++tries, da *= 0.1) {
      auto z2 = z;
      Params p2{p.a + da, p.b};
      if (!shoot(p2, z2)) continue;
      const double d = (orbit_a_bar(p2, z2) - g) / da;
      if (std::isfinite(d)) new_slope = d;
    }
    if (new_slope == 0.0) {
      if (slope != 0.0) break;
      throw Error(ErrorCode::ReturnNotFound, "return orbit not continuable in a");
    }
    slope = new_slope;
    double step = (target - g) / slope;
    bool moved = false;
    for (int half = 0; half < 30 && !moved; ++half, step *= 0.5) {
      auto trial = z;
      Params pt{p.a + step, p.b};
      if (shoot(pt, trial) && std::isfinite(orbit_a_bar(pt, trial))) {
        p = pt;
        z = trial;
        g = orbit_a_bar(p, z);
        moved = true;
      }
    }
    if (!moved) throw Error(ErrorCode::ReturnNotFound, "continuation toward a_bar = -2 stalled");
  }

  auto family = std::make_shared<const HenonFamily>(p.b, R);
  const RenormFrame first = seed_frame(family, p.a, z[static_cast<std::size_t>(R - K)], opt);

  // The affine error depends on where along the orbit the frame sits: W^u
  // curvature dominates near the exit from p, W^s curvature near the entry.
  // Score every phase on a coarse grid and keep the best.
  const HighReal a0 = first.affine_param.apply(HighReal(-2));
  const HighReal slope_a = 1 / first.affine_param.slope;
  HighPoint zf = point_cast<HighReal>(z[static_cast<std::size_t>(R - K)]);
  if (!polish_fixed_point(*family, a0, zf, opt.escape)) throw Error(ErrorCode::ReturnNotFound, "lost the fixed point");
  const auto score = [&](const RenormFrame& cand) {
    double worst = 0.0;
    for (double ab : {opt.a_bar_lo, -2.0, opt.a_bar_hi}) {
      for (double x : linspace(box.x_min, box.x_max, 5)) {
        for (double y : linspace(box.y_min, box.y_max, 5)) {
          const HighPoint out = renormalized_return_map(cand, HighReal(ab), HighPoint{HighReal(x), HighReal(y)});
          worst = std::max({worst, std::abs(static_cast<double>(out.x) - y),
                            std::abs(static_cast<double>(out.y) - (y * y + ab))});
        }
      }
    }
    return worst;
  };
  RenormFrame fr = first;
  double best = std::numeric_limits<double>::infinity();
  const HighPoint zero{0, 0};
  for (int j = 0; j < R; ++j) {
    try {
      RenormFrame cand = frame_at_fixed_point(family, a0, zf, slope_a, opt);
      const double sc = score(cand);
      if (sc < best) {
        best = sc;
        fr = std::move(cand);
      }
    } catch (const Error&) {
    }
    zf = family->step(a0, {zf, zero, zero}).p;
  }
  fr.n = n;
  fr.source_tangency = record;
  fr = fit_frame(std::move(fr), opt);
  fr.n = n;
  fr.fit.n = n;
  return fr;
}

RenormFixedPoint renormalized_fixed_point(const RenormFrame& frame, double a_bar) {
  HighPoint z{2, 2};
  const HighReal A(a_bar);
  const HighReal h("1e-40");
  for (int it = 0; it < 60; ++it) {
    const HighPoint r = renormalized_return_map(frame, A, z);
    const HighPoint rx = renormalized_return_map(frame, A, z + h * HighPoint{1, 0});
    const HighPoint ry = renormalized_return_map(frame, A, z + h * HighPoint{0, 1});
    const HighMat j{(rx.x - r.x) / h, (ry.x - r.x) / h, (rx.y - r.y) / h, (ry.y - r.y) / h};
    const HighReal gx = r.x - z.x, gy = r.y - z.y;
    const HighReal a00 = j.m00 - 1, a11 = j.m11 - 1;
    const HighReal det = a00 * a11 - j.m01 * j.m10;
    if (det == 0) throw Error(ErrorCode::IllConditioned, "singular Newton step");
    const HighReal dx = (a11 * gx - j.m01 * gy) / det, dy = (a00 * gy - j.m10 * gx) / det;
    z.x -= dx;
    z.y -= dy;
    if (max_abs(HighPoint{dx, dy}) < HighReal(1e-30)) {
      const auto ev = eigenvalues(j);
      RenormFixedPoint out;
      out.point = point_cast<double>(z);
      out.multiplier_unstable = static_cast<double>(ev.big);
      out.multiplier_stable = static_cast<double>(ev.small);
      out.saddle = abs(ev.big) > 1 && abs(ev.small) < 1;
      return out;
    }
  }
  throw Error(ErrorCode::NewtonDiverged, "renormalized fixed point did not converge");
}

std::vector<VelocityGapReport> leaf_velocity_gap(const RenormFrame& frame, const std::vector<double>& a_bars) {
  // y_bar of the fixed point, and of the second image of the fold point
  // (where d y_bar' / d y_bar vanishes on x_bar = 0).
  const auto fold_value = [&](double ab) {
    const HighReal A(ab);
    const HighReal h("1e-40");
    HighReal y = 0;
    for (int it = 0; it < 60; ++it) {
      const auto dy = [&](const HighReal& yy) {
        return (renormalized_return_map(frame, A, HighPoint{0, yy + h}).y -
                renormalized_return_map(frame, A, HighPoint{0, yy - h}).y) /
               (2 * h);
      };
      const HighReal d0 = dy(y);
      const HighReal dd = (dy(y + HighReal("1e-20")) - d0) / HighReal("1e-20");
      if (dd == 0) break;
      const HighReal step = d0 / dd;
      y -= step;
      if (abs(step) < HighReal(1e-25)) break;
    }
    const HighPoint v1 = renormalized_return_map(frame, A, HighPoint{0, y});
    return static_cast<double>(renormalized_return_map(frame, A, v1).y);
  };
  std::vector<VelocityGapReport> out;
  const double da = 1e-6;
  for (double ab : a_bars) {
    VelocityGapReport r;
    r.a_bar = ab;
    r.slope_stable =
        (renormalized_fixed_point(frame, ab + da).point.y - renormalized_fixed_point(frame, ab - da).point.y) / (2 * da);
    r.slope_unstable = (fold_value(ab + da) - fold_value(ab - da)) / (2 * da);
    r.gap = r.slope_stable - r.slope_unstable;
    out.push_back(r);
  }
  return out;
}

std::vector<VelocityGapReport> leaf_velocity_gap(double b, const NProxy& n_proxy, const std::vector<double>& a_bars) {
  if (std::holds_alternative<LimitMode>(n_proxy)) return leaf_velocity_gap_limit(a_bars);
  const int n = std::get<int>(n_proxy);
  RenormFrame frame;
  try {
    const auto rec = solve_tangency(b, -2.0);
    frame = build_frame(rec, n);
  } catch (const Error& e) {
    throw Error(ErrorCode::FrameUnavailable, std::string("no renormalization frame: ") + e.what());
  }
  return leaf_velocity_gap(frame, a_bars);
}

}  // namespace henon
