#include "henon/serialize.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"

namespace henon {

namespace {

using nlohmann::ordered_json;

// JSON numbers use the shortest form that round-trips; non-finite values are null.
ordered_json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json point(const PlanePoint& z) { return ordered_json::array({num(z.x), num(z.y)}); }

ordered_json high_point(const HighPoint& z) { return ordered_json::array({format_high(z.x), format_high(z.y)}); }

ordered_json fit_json(const FitReport& f) {
  return {{"n", f.n},
          {"residual_c0", num(f.residual_c0)},
          {"residual_c1", num(f.residual_c1)},
          {"sample_count", f.sample_count},
          {"iterations", f.iterations}};
}

ordered_json sweep_json(const SweepRecord& r) {
  return {{"a", num(r.a)},
          {"b", num(r.b)},
          {"classification", to_string(r.classification)},
          {"sink_periods", r.sink_periods},
          {"lyapunov", r.lyapunov ? num(*r.lyapunov) : ordered_json(nullptr)},
          {"tangency_gap", r.tangency_gap ? num(*r.tangency_gap) : ordered_json(nullptr)}};
}

void emit(std::ostream& os, const ordered_json& j) { os << j.dump(2) << '\n'; }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_high(const HighReal& v) { return v.str(40, std::ios_base::scientific); }

void write_fixed_points_json(std::ostream& os, const Params& p, const std::array<SaddleData, 2>& fps) {
  ordered_json arr = ordered_json::array();
  for (const auto& s : fps) {
    ordered_json e{{"root", s.sign == Root::plus ? "plus" : "minus"},
                   {"point", point(s.point)},
                   {"real_eigenvalues", s.real_eigenvalues},
                   {"lambda", num(s.lambda)},
                   {"sigma", num(s.sigma)},
                   {"v_s", ordered_json::array({num(s.v_s.x()), num(s.v_s.y())})},
                   {"v_u", ordered_json::array({num(s.v_u.x()), num(s.v_u.y())})},
                   {"dissipative_saddle", is_dissipative_saddle(s)}};
    arr.push_back(std::move(e));
  }
  emit(os, {{"a", num(p.a)}, {"b", num(p.b)}, {"fixed_points", arr}});
}

void write_tangency_json(std::ostream& os, const std::vector<TangencyRecord>& records) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : records) {
    arr.push_back({{"a", num(r.params.a)},
                   {"b", num(r.params.b)},
                   {"x", num(r.point.x)},
                   {"y", num(r.point.y)},
                   {"t_star", num(r.t_star)},
                   {"second_deriv", num(r.second_deriv)},
                   {"unfolding_speed", num(r.unfolding_speed)},
                   {"kind", r.kind == TangencyKind::homoclinic ? "homoclinic" : "heteroclinic"},
                   {"residual", num(r.residual)},
                   {"converged", r.converged},
                   {"failure", r.failure}});
  }
  emit(os, arr);
}

void write_cantor_json(std::ostream& os, const CantorApproximation& k) {
  ordered_json ivs = ordered_json::array();
  for (const auto& iv : k.intervals.intervals) ivs.push_back({format_high(iv.lo), format_high(iv.hi)});
  emit(os, {{"level", k.level},
            {"count", k.intervals.size()},
            {"below_double_resolution", k.below_double_resolution},
            {"intervals", ivs}});
}

void write_fit_json(std::ostream& os, const FitReport& fit) { emit(os, fit_json(fit)); }

void write_frames_manifest(std::ostream& os, const std::vector<RenormFrame>& frames) {
  ordered_json arr = ordered_json::array();
  for (const auto& f : frames) {
    ordered_json e{{"n", f.n},
                   {"return_time", f.return_time},
                   {"origin", high_point(f.affine_in.origin)},
                   {"e1", high_point(f.affine_in.e1)},
                   {"e2", high_point(f.affine_in.e2)},
                   {"param_offset", format_high(f.affine_param.offset)},
                   {"param_slope", format_high(f.affine_param.slope)},
                   {"box", {num(f.box.x_min), num(f.box.x_max), num(f.box.y_min), num(f.box.y_max)}},
                   {"a_bar_window", {num(f.a_bar_lo), num(f.a_bar_hi)}},
                   {"fit", fit_json(f.fit)}};
    if (f.source_tangency) {
      e["tangency"] = {{"a", num(f.source_tangency->params.a)}, {"b", num(f.source_tangency->params.b)}};
    }
    arr.push_back(std::move(e));
  }
  emit(os, {{"frames", arr}});
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  os << "a,b,classification,sink_periods,lyapunov,tangency_gap\n";
  for (const auto& r : records) {
    std::string periods;
    for (std::size_t i = 0; i < r.sink_periods.size(); ++i) {
      if (i) periods += ';';
      periods += std::to_string(r.sink_periods[i]);
    }
    os << format_double(r.a) << ',' << format_double(r.b) << ',' << to_string(r.classification) << ',' << periods
       << ',' << (r.lyapunov ? format_double(*r.lyapunov) : "") << ','
       << (r.tangency_gap ? format_double(*r.tangency_gap) : "") << '\n';
  }
}

void write_sweep_json(std::ostream& os, const std::vector<SweepRecord>& records) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : records) arr.push_back(sweep_json(r));
  emit(os, arr);
}

void write_orbits_json(std::ostream& os, const Params& p, const std::vector<PeriodicOrbit>& orbits) {
  ordered_json arr = ordered_json::array();
  for (const auto& o : orbits) {
    ordered_json pts = ordered_json::array();
    for (const auto& z : o.points) pts.push_back(point(z));
    ordered_json mult = ordered_json::array();
    for (const auto& m : o.multipliers) mult.push_back({num(m.real()), num(m.imag())});
    arr.push_back({{"period", o.period}, {"kind", to_string(o.kind)}, {"multipliers", mult}, {"points", pts}});
  }
  emit(os, {{"a", num(p.a)}, {"b", num(p.b)}, {"orbits", arr}});
}

void write_manifest_json(std::ostream& os, const RunManifest& m) {
  ordered_json summary = ordered_json::object();
  for (const auto& [k, v] : m.summary) summary[k] = v;
  emit(os, {{"command", m.command},
            {"config_hash", m.config_hash},
            {"tool_version", m.tool_version},
            {"seed", m.seed},
            {"started", m.started},
            {"finished", m.finished},
            {"summary", summary},
            {"outputs", m.outputs}});
}

}  // namespace henon
