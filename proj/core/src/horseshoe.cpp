#include "henon/horseshoe.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "henon/tangency.hpp"

namespace henon {

namespace {

struct ScanResult {
  std::vector<Interval> runs;
  bool touches_ends = false;
};

// Maximal runs of `in` over [lo, hi]; each boundary is bisected until the
// bracket stops shrinking, keeping the inside end.
ScanResult scan_runs(const std::function<bool(double)>& in, double lo, double hi, int samples) {
  ScanResult r;
  const auto at = [&](int i) { return lo + (hi - lo) * static_cast<double>(i) / samples; };
  const auto refine = [&](double inside, double outside) {
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (inside + outside);
      if (mid == inside || mid == outside) break;
      (in(mid) ? inside : outside) = mid;
    }
    return inside;
  };
  bool prev = in(lo);
  r.touches_ends = prev;
  double start = lo;
  for (int i = 1; i <= samples; ++i) {
    const double v = at(i);
    const bool cur = in(v);
    if (cur && !prev) start = refine(v, at(i - 1));
    if (!cur && prev) r.runs.push_back({start, refine(at(i - 1), v)});
    prev = cur;
  }
  if (prev) {
    r.runs.push_back({start, hi});
    r.touches_ends = true;
  }
  return r;
}

using Jet = Jet1<double>;

std::optional<Jet> forward_n(const BasicReturnSystem<double>& sys, Jet z, int n) {
  for (int i = 0; i < n; ++i) {
    auto f = sys.forward(z);
    if (!f) return std::nullopt;
    z = *f;
  }
  return z;
}

// v-runs on the column above x whose image under n returns lies in R.
ScanResult column_runs(const BasicReturnSystem<double>& sys, double x, double v_lo, double v_hi, int n, int samples) {
  const auto in = [&](double v) {
    const auto f = forward_n(sys, sys.column(x, v), n);
    return f.has_value() && sys.inside(f->p);
  };
  return scan_runs(in, v_lo, v_hi, samples);
}

CurveSegment sampled_edge(const std::function<PlanePoint(double)>& f, int nodes) {
  std::vector<PlanePoint> pts;
  pts.reserve(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) pts.push_back(f(static_cast<double>(i) / (nodes - 1)));
  return make_curve_segment(std::move(pts));
}

CurvilinearRect make_rect(const BasicReturnSystem<double>& sys, const Interval& left, const Interval& right,
                          int nodes) {
  const double xl = sys.x_lo(), xr = sys.x_hi();
  const auto image = [&](double x, double v) {
    const auto f = sys.forward(sys.column(x, v));
    if (!f) throw Error(ErrorCode::NoReturn, "piece boundary left the return domain");
    return f->p;
  };
  CurvilinearRect r;
  r.corners = {image(xl, left.lo), image(xl, left.hi), image(xr, right.hi), image(xr, right.lo)};
  const auto boundary = [&](const PlanePoint& from, const PlanePoint& to) {
    const double h = sys.height(from) >= 0 ? sys.half_height() : -sys.half_height();
    return sampled_edge(
        [&](double u) {
          const double x = from.x + u * (to.x - from.x);
          return sys.column(x, h).p;
        },
        std::max(5, nodes / 4));
  };
  r.edge_curves[0] = sampled_edge([&](double u) { return image(xl, left.lo + u * (left.hi - left.lo)); }, nodes);
  r.edge_curves[1] = boundary(r.corners[1], r.corners[2]);
  r.edge_curves[2] = sampled_edge([&](double u) { return image(xr, right.hi + u * (right.lo - right.hi)); }, nodes);
  r.edge_curves[3] = boundary(r.corners[3], r.corners[0]);
  double area2 = 0.0;
  for (const auto& e : r.edge_curves) {
    for (std::size_t i = 0; i + 1 < e.nodes.size(); ++i) {
      area2 += e.nodes[i].x * e.nodes[i + 1].y - e.nodes[i + 1].x * e.nodes[i].y;
    }
  }
  r.orientation = area2 >= 0 ? Orientation::counterclockwise : Orientation::clockwise;
  return r;
}

std::size_t strip_index(const std::vector<Interval>& strips, double v) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < strips.size(); ++k) {
    const double d = v < strips[k].lo ? strips[k].lo - v : (v > strips[k].hi ? v - strips[k].hi : 0.0);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

}  // namespace

bool CoverCertificate::full_shift() const {
  if (crossing_matrix.empty()) return false;
  for (const auto& row : crossing_matrix) {
    if (row.size() != crossing_matrix.size()) return false;
    for (bool b : row) {
      if (!b) return false;
    }
  }
  return true;
}

CoverCertificate certify_return_map(const BasicReturnSystem<double>& sys, int w, const HorseshoeOptions& opt) {
  if (opt.columns < 2 || opt.rows < 1 || opt.fibre_samples < 8 || opt.edge_nodes < 3) {
    throw Error(ErrorCode::InvalidArgument, "horseshoe sampling too coarse");
  }
  const double d = sys.half_height();
  const double fx = sys.fibre_x();
  const auto fib = column_runs(sys, fx, -d, d, 1, opt.fibre_samples);
  if (fib.touches_ends) throw Error(ErrorCode::NoReturn, "an edge of R returns into R");
  if (fib.runs.empty()) throw Error(ErrorCode::NoReturn, "R does not return to itself");
  const std::size_t n = fib.runs.size();

  CoverCertificate cert;
  cert.w = w;
  cert.fibre_pieces = fib.runs;
  cert.half_thickness = d;

  // Every column must show the same strips; the cone check samples them.
  const double slope = opt.cone_slope;
  double margin = std::numeric_limits<double>::infinity();
  std::vector<Interval> left_runs, right_runs;
  for (int c = 0; c < opt.columns; ++c) {
    const double x = sys.x_lo() + (sys.x_hi() - sys.x_lo()) * c / (opt.columns - 1);
    const auto col = column_runs(sys, x, -d, d, 1, opt.fibre_samples);
    if (col.touches_ends || col.runs.size() != n) {
      std::ostringstream os;
      os << "strips are not full width: column x = " << x << " shows " << col.runs.size() << " runs of " << n
         << (col.touches_ends ? ", and an edge of R returns into R" : "");
      throw Error(ErrorCode::NoReturn, os.str());
    }
    if (c == 0) left_runs = col.runs;
    if (c == opt.columns - 1) right_runs = col.runs;
    for (const auto& run : col.runs) {
      for (int r = 0; r < opt.rows; ++r) {
        const double v = run.lo + (run.hi - run.lo) * (r + 0.5) / opt.rows;
        const auto z = sys.column(x, v).p;
        for (double sgn : {-1.0, 1.0}) {
          const auto up = sys.forward({z, {sgn * slope, 1.0}});
          if (up) margin = std::min(margin, slope - std::abs(up->d.x / up->d.y));
          const auto img = sys.forward({z, {0.0, 0.0}});
          if (!img) continue;
          const auto down = sys.backward({img->p, {1.0, sgn * slope}});
          if (down) margin = std::min(margin, slope - std::abs(down->d.y / down->d.x));
        }
      }
    }
  }
  cert.cone_margin = margin;

  for (std::size_t i = 0; i < n; ++i) cert.pieces.push_back(make_rect(sys, left_runs[i], right_runs[i], opt.edge_nodes));

  // Level-two strips inside each piece on the saddle column.
  cert.crossing_matrix.assign(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& J = fib.runs[i];
    const auto sub = column_runs(sys, fx, J.lo, J.hi, 2, opt.fibre_samples);
    if (sub.touches_ends) continue;
    for (const auto& K : sub.runs) {
      const auto e0 = forward_n(sys, sys.column(fx, K.lo), 2);
      const auto e1 = forward_n(sys, sys.column(fx, K.hi), 2);
      if (!e0 || !e1) continue;
      const double h0 = sys.height(e0->p), h1 = sys.height(e1->p);
      const bool spans = std::abs(h0) >= d * (1 - 1e-4) && std::abs(h1) >= d * (1 - 1e-4) && h0 * h1 < 0;
      if (!spans) continue;
      const auto z1 = sys.forward(sys.column(fx, 0.5 * (K.lo + K.hi)));
      if (!z1) continue;
      const auto here = column_runs(sys, z1->p.x, -d, d, 1, opt.fibre_samples);
      if (here.runs.size() != n) continue;
      cert.crossing_matrix[i][strip_index(here.runs, sys.height(z1->p))] = true;
    }
  }
  return cert;
}

CoverCertificate build_return_boxes(const Params& p, double thickness_of_R, int w_max, const HorseshoeOptions& opt) {
  if (p.b == 0) throw Error(ErrorCode::InvalidArgument, "the outer horseshoe needs b != 0");
  if (w_max < 2 || w_max % 2 != 0) throw Error(ErrorCode::InvalidArgument, "w_max must be an even integer >= 2");
  auto graph = std::make_shared<const StableGraph>(p);
  const PlanePoint q = theta_profile(p).fold_point;

  std::string last = "no even return time gives exactly two pieces";
  for (int w = 2; w <= w_max; w += 2) {
    const HenonReturn<double> sys(p, w, thickness_of_R, graph);
    const double d = sys.half_height();
    const auto fib = column_runs(sys, sys.fibre_x(), -d, d, 1, opt.fibre_samples);
    if (fib.touches_ends || fib.runs.size() != 2) continue;
    const bool first_has_p = fib.runs[0].lo <= 0.0 && 0.0 <= fib.runs[0].hi;
    const bool second_has_p = fib.runs[1].lo <= 0.0 && 0.0 <= fib.runs[1].hi;
    if (first_has_p == second_has_p) continue;

    if (sys.inside(q)) {
      const auto back = sys.backward({q, {0.0, 0.0}});
      if (back && sys.inside(back->p)) {
        std::ostringstream os;
        os << "fold point (" << q.x << ", " << q.y << ") lies in a return piece at w = " << w;
        throw Error(ErrorCode::TangencyInside, os.str());
      }
    }

    // Where the other piece's centre curve crosses S.
    const Interval& J = first_has_p ? fib.runs[1] : fib.runs[0];
    const auto h_at = [&](double v) { return sys.height(sys.forward(sys.column(sys.fibre_x(), v))->p); };
    double lo = J.lo, hi = J.hi;
    if (h_at(lo) * h_at(hi) > 0) continue;
    for (int it = 0; it < 200 && hi - lo > 0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (h_at(mid) * h_at(lo) > 0 ? lo : hi) = mid;
    }
    const PlanePoint homoclinic = sys.forward(sys.column(sys.fibre_x(), lo))->p;

    try {
      CoverCertificate cert = certify_return_map(sys, w, opt);
      cert.params = p;
      cert.half_thickness = thickness_of_R;
      cert.homoclinic_point = homoclinic;
      cert.tangency_point = q;
      return cert;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoReturn) throw;
      last = e.what();
    }
  }
  std::ostringstream os;
  os << "no admissible even w <= " << w_max << " for half-thickness " << thickness_of_R << ": " << last;
  throw Error(ErrorCode::NoReturn, os.str());
}

IntervalSet CantorApproximation::rounded() const {
  IntervalSet out;
  out.level = level;
  for (const auto& iv : intervals.intervals) {
    out.intervals.push_back({static_cast<double>(iv.lo), static_cast<double>(iv.hi)});
  }
  return out;
}

CantorApproximation stable_cantor_slice(const CoverCertificate& cert, const Params& p, int level, double h_min) {
  if (!cert.params) throw Error(ErrorCode::InvalidArgument, "certificate was not built for Henon parameters");
  if (cert.params->a != p.a || cert.params->b != p.b) {
    throw Error(ErrorCode::InvalidArgument, "certificate belongs to other parameters");
  }
  if (cert.fibre_pieces.size() < 2) throw Error(ErrorCode::InvalidArgument, "certificate has fewer than two pieces");
  auto graph = std::make_shared<const StableGraph>(p);
  const HenonReturn<HighReal> sys(p, cert.w, cert.half_thickness, graph);

  CantorApproximation out;
  out.level = level;
  out.parameters = slice_parameters<HighReal>(sys, cert.fibre_pieces, level, HighReal(h_min));
  out.intervals = to_arclength(sys, out.parameters);

  const auto range = sys.carrier_range();
  std::vector<PlanePoint> nodes;
  for (int i = 0; i <= 200; ++i) {
    const HighReal s = range.lo + (range.hi - range.lo) * i / 200;
    nodes.push_back(point_cast<double>(sys.carrier(s).p));
  }
  out.carrier = make_curve_segment(std::move(nodes));

  const HighReal span = out.intervals.hull().length();
  for (const auto& iv : out.intervals.intervals) {
    if (iv.length() < 1e-15 * span) out.below_double_resolution = true;
  }
  return out;
}

}  // namespace henon
