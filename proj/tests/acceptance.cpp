// Acceptance run: one line per criterion, each timed against its limit.
// With arguments, only the listed criteria run. Exit status is nonzero when
// any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "henon/cantor.hpp"
#include "henon/census.hpp"
#include "henon/core.hpp"
#include "henon/horseshoe.hpp"
#include "henon/manifold.hpp"
#include "henon/renorm.hpp"
#include "henon/tangency.hpp"

using namespace henon;

namespace {

// Reference exponent at (-1.4, -0.3) from tests/oracles/lyapunov_oracle.py.
constexpr double kLyapunovOracle = 0.4192933818793848;

struct Check {
  std::vector<std::string> failures;
  std::ostringstream notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  bool passed() const { return failures.empty(); }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------

void closed_forms(Check& c) {
  double worst_prod = 0, worst_sum = 0;
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 50; ++j) {
      const Params p{-2.1 + 0.2 * i / 49.0, -0.1 + 0.2 * j / 49.0};
      const auto s = fixed_point(p);
      worst_prod = std::max(worst_prod, std::abs(s.lambda * s.sigma - p.b));
      worst_sum = std::max(worst_sum, std::abs(s.lambda + s.sigma - 2 * s.point.y));
    }
  }
  c.expect(worst_prod <= 1e-12, "lambda*sigma = b off by " + fmt(worst_prod));
  c.expect(worst_sum <= 1e-12, "lambda+sigma = 2y off by " + fmt(worst_sum));
  const auto s = fixed_point({-2.0, 0.0});
  c.expect(s.point.x == 2.0 && s.point.y == 2.0, "p+ at (-2,0) is not exactly (2,2)");
  c.expect(s.lambda == 0.0 && s.sigma == 4.0, "eigenvalues at (-2,0) are not (0,4)");
  c.notes << "max |lambda sigma - b| " << fmt(worst_prod) << ", max |lambda + sigma - 2y| " << fmt(worst_sum);
}

void split_function(Check& c) {
  const double h0 = split_function_H({-2.0, 0.0});
  const double slope = dH_da({-2.0, 0.0});
  c.expect(std::abs(h0) <= 1e-10, "H(-2,0) = " + fmt(h0));
  c.expect(std::abs(slope + 8.0 / 3.0) <= 1e-6, "dH/da(-2,0) = " + fmt(slope));
  for (double a : {-2.1, -2.0, -1.9}) {
    const double d2 = theta_profile({a, 0.0}).second_deriv;
    c.expect(std::abs(d2 - 4 * a) <= 1e-8, "theta''(t*) at a=" + fmt(a) + " is " + fmt(d2));
  }
  c.notes << "H(-2,0) " << fmt(h0) << ", dH/da " << fmt(slope) << ", theta'' at a=-2 "
          << fmt(theta_profile({-2.0, 0.0}).second_deriv);
}

void tangency_curve(Check& c) {
  const std::vector<double> bs{0.01, -0.01, 0.02, -0.02, 0.05, -0.05};
  const auto recs = solve_tangency_curve(bs, -2.0);
  double prev_dev[2] = {-1, -1};
  for (const auto& r : recs) {
    const std::string tag = "b=" + fmt(r.params.b) + ": ";
    c.expect(r.converged, tag + "not converged: " + r.failure);
    if (!r.converged) continue;
    const double dev = std::abs(r.params.a + 2);
    c.expect(r.residual <= 1e-10, tag + "residual " + fmt(r.residual));
    c.expect(dev <= 0.5 * std::abs(r.params.b), tag + "|h+2| = " + fmt(dev) + " > 0.5|b|");
    double& prev = prev_dev[r.params.b > 0];
    c.expect(dev > prev, tag + "|h+2| not increasing with |b|");
    prev = dev;
    const double rel = std::abs(r.dh_db_fd - r.dh_db_ift) / std::abs(r.dh_db_ift);
    c.expect(rel <= 1e-3, tag + "dh/db relative error " + fmt(rel));
    c.expect(r.second_deriv >= -12 && r.second_deriv <= -4, tag + "second_deriv " + fmt(r.second_deriv));
    c.expect(std::abs(r.unfolding_speed) >= 1, tag + "unfolding speed " + fmt(r.unfolding_speed));
    c.notes << "b=" << fmt(r.params.b) << " |h+2|/|b|=" << fmt(dev / std::abs(r.params.b)) << "; ";
  }
}

void manifolds(Check& c) {
  const Params p{-2.0, 0.0};
  const auto pieces = grow_unstable(p, local_manifold_chart(p, ManifoldKind::unstable, 12), 12, kDefaultTrimBox);
  double worst = 0;
  std::size_t nodes = 0;
  for (const auto& seg : pieces) {
    for (const auto& z : seg.nodes) {
      worst = std::max(worst, std::abs(z.y - (z.x * z.x + p.a)));
      ++nodes;
    }
  }
  c.expect(nodes > 0, "no unstable arc inside the trim box");
  c.expect(worst <= 1e-6, "unstable arc off the parabola by " + fmt(worst));
  double prev = std::numeric_limits<double>::infinity();
  for (double b : {0.08, 0.04, 0.02, 0.01}) {
    const double m = extract_stable_graph({-2.0, b}).max_abs_d1();
    c.expect(m < prev, "max|eta'| not decreasing at b=" + fmt(b));
    c.notes << "b=" << fmt(b) << " max|eta'|=" << fmt(m) << "; ";
    prev = m;
  }
  c.notes << "parabola error " << fmt(worst) << " over " << nodes << " nodes";
}

void limit_velocity(Check& c) {
  const auto d = limit_family_data(-2.0);
  c.expect(std::abs(d.slope_fixed + 1.0 / 3.0) <= 1e-12, "fixed-leaf slope " + fmt(d.slope_fixed));
  c.expect(std::abs(d.slope_endpoint + 3.0) <= 1e-12, "endpoint slope " + fmt(d.slope_endpoint));
  const auto g = leaf_velocity_gap_limit({-2.0});
  c.expect(std::abs(g[0].gap - 8.0 / 3.0) <= 1e-12 && g[0].gap > 2, "limit gap " + fmt(g[0].gap));
  const auto fr = build_frame(solve_tangency(0.05, -2.0), 4);
  if (fr.fit.residual_c0 <= 0.05) {
    for (const auto& r : leaf_velocity_gap(fr, {-2.02, -2.0, -1.98})) {
      c.expect(r.gap > 2, "finite-n gap " + fmt(r.gap) + " at a_bar " + fmt(r.a_bar));
      c.notes << "n=4 gap " << fmt(r.gap) << "; ";
    }
  }
  c.notes << "n=4 residual_c0 " << fmt(fr.fit.residual_c0);
}

double brute_force_tau(const IntervalSet& k) {
  const auto& iv = k.intervals;
  double tau = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < iv.size(); ++i) {
    const double g = iv[i + 1].lo - iv[i].hi;
    std::size_t l = i;
    while (l > 0 && iv[l].lo - iv[l - 1].hi < g) --l;
    std::size_t r = i + 1;
    while (r + 1 < iv.size() && iv[r + 1].lo - iv[r].hi < g) ++r;
    tau = std::min({tau, (iv[i].hi - iv[l].lo) / g, (iv[r].hi - iv[i + 1].lo) / g});
  }
  return tau;
}

bool brute_force_intersect(const IntervalSet& a, const IntervalSet& b) {
  for (const auto& x : a.intervals) {
    for (const auto& y : b.intervals) {
      if (std::max(x.lo, y.lo) <= std::min(x.hi, y.hi)) return true;
    }
  }
  return false;
}

void thickness_suite(Check& c) {
  for (int k = 1; k <= 10; ++k) {
    c.expect(thickness(middle_third(k)).tau == 1.0, "middle third level " + std::to_string(k));
    c.expect(thickness(middle_fifth(k)).tau == 2.0, "middle fifth level " + std::to_string(k));
  }
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> pts(40);
    for (auto& q : pts) q = u(rng);
    std::sort(pts.begin(), pts.end());
    std::vector<Interval> ivs;
    for (std::size_t j = 0; j < pts.size(); j += 2) ivs.push_back({pts[j], pts[j + 1]});
    const auto s = make_interval_set(std::move(ivs));
    mismatches += thickness(s).tau != brute_force_tau(s);
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " random sets disagree with brute force");
  std::uniform_real_distribution<double> ur(0.36, 0.45), us(0.5, 2.0), ut(-1.0, 1.0);
  int tested = 0, counterexamples = 0;
  while (tested < 100) {
    const auto k1 = self_similar(ur(rng), ur(rng), 10);
    const auto k2 = affine_image(self_similar(ur(rng), ur(rng), 10), us(rng), ut(rng));
    const auto r = gap_lemma_predicate(k1, k2);
    if (!r.linked || r.product_class != ProductClass::ProductExceedsOne) continue;
    ++tested;
    if (r.counterexample || r.geometry != GeometricClass::NonemptyIntersection || !brute_force_intersect(k1, k2)) {
      ++counterexamples;
    }
  }
  c.expect(counterexamples == 0, std::to_string(counterexamples) + " gap-lemma counterexamples");
  c.notes << "1000 random sets, " << tested << " thick linked pairs";
}

void horseshoe_suite(Check& c) {
  const double b = 0.05;
  const Params p{solve_tangency(b, -2.0).params.a + 0.01, b};
  const auto cert = build_return_boxes(p, 0.15, 40);
  c.expect(cert.w % 2 == 0 && cert.w <= 40, "w = " + std::to_string(cert.w));
  c.expect(cert.pieces.size() == 2 && cert.full_shift(), "crossing matrix not all-true 2x2");
  double t5 = 0, t6 = 0;
  for (int k = 0; k <= 6; ++k) {
    const auto s = stable_cantor_slice(cert, p, k);
    // Level 0 already holds the two piece traces.
    c.expect(s.intervals.size() == (std::size_t{2} << k), "level " + std::to_string(k) + " has " +
                                                              std::to_string(s.intervals.size()) + " intervals");
    if (k == 5) t5 = static_cast<double>(thickness(s.intervals).tau);
    if (k == 6) t6 = static_cast<double>(thickness(s.intervals).tau);
  }
  const double drift = std::abs(t6 - t5) / t5;
  c.expect(drift <= 0.05, "thickness drift " + fmt(drift));
  c.notes << "w=" << cert.w << ", tau5=" << fmt(t5) << ", tau6=" << fmt(t6) << ", drift " << fmt(drift);
}

void renorm_suite(Check& c) {
  const auto rec = solve_tangency(0.05, -2.0);
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {0, 1, 2}) {
    const auto fr = build_frame(rec, n);
    c.expect(fr.fit.residual_c0 < prev, "residual_c0 not decreasing at n=" + std::to_string(n));
    c.notes << "n=" << n << " r0=" << fmt(fr.fit.residual_c0) << "; ";
    prev = fr.fit.residual_c0;
    if (n == 0) {
      const auto fp = renormalized_fixed_point(fr, -2.0);
      const double dist = std::hypot(fp.point.x - 2, fp.point.y - 2);
      c.expect(fp.saddle && dist <= 0.05, "renormalized saddle " + fmt(fp.point.x) + "," + fmt(fp.point.y));
      c.notes << "saddle at distance " << fmt(dist) << "; ";
    }
  }
  const auto self = fit_frame(seed_frame(std::make_shared<const LimitFamily>(), -1.95, {2.1, 2.05}));
  c.expect(self.fit.residual_c0 <= 1e-10, "limit self-test residual " + fmt(self.fit.residual_c0));
  c.notes << "self-test " << fmt(self.fit.residual_c0);
}

bool product_identity(const PeriodicOrbit& o, double b) {
  const auto prod = o.multipliers[0] * o.multipliers[1];
  const double want = std::pow(b, o.period);
  return std::abs(prod - want) <= 1e-9 * std::max(1.0, std::abs(prod));
}

void census_suite(Check& c) {
  const double b = 0.05;
  const double h = solve_tangency(b, -2.0).params.a;
  const auto recs = sink_census_sweep(b, {h - 0.05, h + 0.05}, 200, 32);
  const auto s = summarize(recs);
  const long sinks = std::count_if(recs.begin(), recs.end(), [](const SweepRecord& r) { return r.classification == Classification::sinks; });
  const long chaotic = std::count_if(recs.begin(), recs.end(), [](const SweepRecord& r) {
    return r.classification == Classification::chaotic_attractor;
  });
  c.expect(sinks >= 1, "no sinks-classified record");
  c.expect(chaotic >= 1, "no chaotic_attractor-classified record");
  c.notes << "sweep: " << sinks << " sinks, " << chaotic << " chaotic, escape fraction " << fmt(s.escape_fraction) << "; ";

  const auto rep = lyapunov_exponent({-1.4, -0.3}, {0.1, 0.1});
  c.expect(rep.valid() && rep.exponent > 0, "exponent at (-1.4,-0.3) not positive");
  c.expect(std::abs(rep.exponent - kLyapunovOracle) <= 0.05, "exponent " + fmt(rep.exponent) + " vs oracle");
  c.notes << "exponent " << fmt(rep.exponent) << "; ";

  int orbits = 0, bad = 0;
  for (const auto& o : find_periodic_orbits({-1.4, -0.3}, 8)) {
    ++orbits;
    bad += !product_identity(o, -0.3);
  }
  for (const auto& r : recs) {
    if (r.sink_periods.empty()) continue;
    // Re-find the reported sinks to check their multipliers.
    for (const auto& o : find_periodic_orbits({r.a, b}, *std::max_element(r.sink_periods.begin(), r.sink_periods.end()))) {
      ++orbits;
      bad += !product_identity(o, b);
    }
  }
  c.expect(bad == 0, std::to_string(bad) + " orbits break the multiplier-product identity");
  c.notes << orbits << " orbits checked";
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<void(Check&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "closed forms", 1, closed_forms},          {2, "split function", 10, split_function},
      {3, "tangency curve", 60, tangency_curve},     {4, "manifolds", 30, manifolds},
      {5, "limit family / velocity", 1, limit_velocity}, {6, "thickness", 5, thickness_suite},
      {7, "horseshoe", 120, horseshoe_suite},        {8, "renormalization", 300, renorm_suite},
      {9, "census", 600, census_suite},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& cr : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), cr.id) == wanted.end()) continue;
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.run(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs < cr.limit_s, "took " + fmt(secs) + " s, limit " + fmt(cr.limit_s) + " s");
    const bool ok = c.passed();
    failed += !ok;
    std::printf("criterion %d (%s): %s in %.2f s [limit %.0f s]\n", cr.id, cr.name, ok ? "PASS" : "FAIL", secs, cr.limit_s);
    std::printf("  %s\n", c.notes.str().c_str());
    for (const auto& f : c.failures) std::printf("  failed: %s\n", f.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
