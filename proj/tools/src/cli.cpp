#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "CLI11.hpp"
#include "henon/cantor.hpp"
#include "henon/census.hpp"
#include "henon/horseshoe.hpp"
#include "henon/manifold.hpp"
#include "henon/renorm.hpp"
#include "henon/serialize.hpp"
#include "henon/tangency.hpp"

namespace henon::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double parse_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("key '" + key + "': not a number: '" + text + "'");
  return v;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

bool is_domain(ErrorCode c) { return c != ErrorCode::InvalidArgument; }

struct Context {
  RunConfig cfg;
  fs::path out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  std::ostream& out;
  RunManifest manifest;

  std::ofstream open(const std::string& name) {
    std::ofstream f(out_dir / name);
    if (!f) throw ConfigError("cannot write " + (out_dir / name).string());
    manifest.outputs.push_back(name);
    return f;
  }
};

// Tolerance keys must be positive.
void check_positive(const RunConfig& cfg, const std::vector<std::string>& keys) {
  for (const auto& k : keys) {
    if (cfg.has(k) && !(cfg.get_double(k) > 0)) throw ConfigError("key '" + k + "' must be positive");
  }
}

int cmd_fixed_points(Context& c) {
  c.cfg.require_known({"a", "b"});
  const Params p{c.cfg.get_double("a"), c.cfg.get_double("b")};
  const auto fps = fixed_points(p);
  std::ostringstream body;
  write_fixed_points_json(body, p, fps);
  c.open("fixed_points.json") << body.str();
  c.out << body.str();
  c.manifest.summary["saddle_plus"] = is_dissipative_saddle(fps[0]) ? "dissipative" : "not dissipative";
  return kExitOk;
}

int cmd_tangency_curve(Context& c) {
  c.cfg.require_known({"b_values", "a_seed", "tol", "max_iter"});
  check_positive(c.cfg, {"tol"});
  const auto bs = c.cfg.get_list("b_values");
  if (bs.empty()) throw ConfigError("key 'b_values' is empty");
  TangencySolveOptions opt;
  opt.tol = c.cfg.get_double("tol", opt.tol);
  opt.max_iter = c.cfg.get_int("max_iter", opt.max_iter);
  const auto recs = solve_tangency_curve(bs, c.cfg.get_double("a_seed", -2.0), opt);
  {
    auto os = c.open("tangency.json");
    write_tangency_json(os, recs);
  }
  auto csv = c.open("tangency_curve.csv");
  csv << "b,h,deviation,dH_da,dh_db_fd,dh_db_ift,converged\n";
  int ok = 0;
  for (const auto& r : recs) {
    ok += r.converged;
    csv << format_double(r.params.b) << ',' << format_double(r.params.a) << ',' << format_double(std::abs(r.params.a + 2))
        << ',' << format_double(r.unfolding_speed) << ',' << format_double(r.dh_db_fd) << ','
        << format_double(r.dh_db_ift) << ',' << (r.converged ? 1 : 0) << '\n';
  }
  c.manifest.summary["solved"] = std::to_string(ok) + "/" + std::to_string(recs.size());
  c.out << "solved " << ok << " of " << recs.size() << '\n';
  return ok > 0 ? kExitOk : kExitAllFailed;
}

int cmd_sweep(Context& c) {
  c.cfg.require_known({"b", "a_lo", "a_hi", "a_halfwidth", "grid", "max_period", "seeds_per_axis", "manifold_seeds",
                       "manifold_span", "transient", "lyapunov_iterations", "chaotic_threshold"});
  check_positive(c.cfg, {"a_halfwidth", "manifold_span", "chaotic_threshold"});
  const double b = c.cfg.get_double("b");
  Interval iv{};
  if (c.cfg.has("a_lo") || c.cfg.has("a_hi")) {
    iv = {c.cfg.get_double("a_lo"), c.cfg.get_double("a_hi")};
  } else {
    const double h = solve_tangency(b, -2.0).params.a;
    const double w = c.cfg.get_double("a_halfwidth", 0.05);
    iv = {h - w, h + w};
  }
  if (!(iv.lo <= iv.hi)) throw ConfigError("a_lo must not exceed a_hi");
  SweepOptions opt;
  opt.seeds_per_axis = c.cfg.get_int("seeds_per_axis", opt.seeds_per_axis);
  opt.manifold_seeds = c.cfg.get_int("manifold_seeds", opt.manifold_seeds);
  opt.manifold_span = c.cfg.get_double("manifold_span", opt.manifold_span);
  opt.transient = c.cfg.get_int("transient", static_cast<int>(opt.transient));
  opt.lyapunov_iterations = c.cfg.get_int("lyapunov_iterations", static_cast<int>(opt.lyapunov_iterations));
  opt.chaotic_threshold = c.cfg.get_double("chaotic_threshold", opt.chaotic_threshold);
  opt.threads = c.threads;
  const auto recs = sink_census_sweep(b, iv, c.cfg.get_int("grid", 200), c.cfg.get_int("max_period", 32), opt);
  {
    auto os = c.open("sweep.csv");
    write_sweep_csv(os, recs);
  }
  {
    auto os = c.open("sweep.json");
    write_sweep_json(os, recs);
  }
  const auto s = summarize(recs);
  c.manifest.summary["records"] = std::to_string(s.records);
  c.manifest.summary["sink_fraction"] = format_double(s.sink_fraction);
  c.manifest.summary["chaotic_fraction"] = format_double(s.chaotic_fraction);
  c.manifest.summary["escape_fraction"] = format_double(s.escape_fraction);
  c.out << "records " << s.records << " sinks " << s.sink_fraction << " chaotic " << s.chaotic_fraction << " escape "
        << s.escape_fraction << '\n';
  return kExitOk;
}

using Rational = boost::multiprecision::cpp_rational;

std::string text(const HighReal& v) { return format_high(v); }
std::string text(const Rational& v) { return v.str(); }

template <class Real>
void thickness_rows(std::ostream& csv, const BasicIntervalSet<Real>& k, int level, std::ostream& intervals) {
  const auto t = thickness(k);
  csv << level << ',' << k.size() << ',' << (t.infinite ? std::string("inf") : text(t.tau)) << '\n';
  for (const auto& iv : k.intervals) intervals << level << ',' << text(iv.lo) << ',' << text(iv.hi) << '\n';
}

// Exact rational for short decimal contractions such as 1/3 given as 0.3333...
Rational contraction_rational(double c) {
  for (int den = 1; den <= 1000; ++den) {
    const double num = std::round(c * den);
    if (std::abs(num / den - c) <= 1e-12) return Rational(static_cast<long long>(num), den);
  }
  throw ConfigError("key 'contraction' must be a ratio with denominator at most 1000");
}

int cmd_thickness(Context& c) {
  c.cfg.require_known({"model", "contraction", "level", "b", "a_offset", "half_thickness", "w_max"});
  check_positive(c.cfg, {"contraction", "half_thickness"});
  const std::string model = c.cfg.get_string("model", "affine");
  const int level = c.cfg.get_int("level", 6);
  if (level < 0 || level > 20) throw ConfigError("key 'level' must lie in [0, 20]");
  auto csv = c.open("thickness.csv");
  auto ivs = c.open("intervals.csv");
  csv << "level,count,tau\n";
  ivs << "level,lo,hi\n";
  if (model == "affine") {
    const double cc = c.cfg.get_double("contraction", 1.0 / 3.0);
    const auto cert = certify_return_map(AffineHorseshoe<double>(cc), 1);
    // The affine model runs in exact rationals, so its bridges and gaps come out exact.
    const AffineHorseshoe<Rational> sys(contraction_rational(cc));
    for (int k = 0; k <= level; ++k) {
      thickness_rows(csv, to_arclength(sys, slice_parameters<Rational>(sys, cert.fibre_pieces, k, Rational(0))), k, ivs);
    }
  } else if (model == "henon") {
    const double b = c.cfg.get_double("b", 0.05);
    const Params p{solve_tangency(b, -2.0).params.a + c.cfg.get_double("a_offset", 0.01), b};
    const auto cert = build_return_boxes(p, c.cfg.get_double("half_thickness", 0.15), c.cfg.get_int("w_max", 40));
    for (int k = 0; k <= level; ++k) thickness_rows(csv, stable_cantor_slice(cert, p, k).intervals, k, ivs);
    c.manifest.summary["w"] = std::to_string(cert.w);
  } else {
    throw ConfigError("key 'model' must be 'affine' or 'henon'");
  }
  c.out << "wrote " << level + 1 << " levels\n";
  return kExitOk;
}

int cmd_renorm(Context& c) {
  c.cfg.require_known({"b", "a_seed", "n_min", "n_max"});
  const double b = c.cfg.get_double("b", 0.05);
  const int n0 = c.cfg.get_int("n_min", 0), n1 = c.cfg.get_int("n_max", 3);
  if (n1 < n0) throw ConfigError("n_max must not be below n_min");
  const auto rec = solve_tangency(b, c.cfg.get_double("a_seed", -2.0));
  std::vector<RenormFrame> frames;
  auto csv = c.open("renorm.csv");
  csv << "n,return_time,residual_c0,residual_c1,sample_count,saddle_x,saddle_y\n";
  for (int n = n0; n <= n1; ++n) {
    try {
      auto fr = build_frame(rec, n);
      std::string sx, sy;
      try {
        const auto fp = renormalized_fixed_point(fr, -2.0);
        sx = format_double(fp.point.x);
        sy = format_double(fp.point.y);
      } catch (const Error&) {
      }
      csv << n << ',' << fr.return_time << ',' << format_double(fr.fit.residual_c0) << ','
          << format_double(fr.fit.residual_c1) << ',' << fr.fit.sample_count << ',' << sx << ',' << sy << '\n';
      frames.push_back(std::move(fr));
    } catch (const Error& e) {
      c.manifest.summary["n=" + std::to_string(n)] = e.what();
    }
  }
  {
    auto os = c.open("frames.json");
    write_frames_manifest(os, frames);
  }
  c.manifest.summary["frames"] = std::to_string(frames.size());
  c.out << "built " << frames.size() << " of " << (n1 - n0 + 1) << " frames\n";
  return frames.empty() ? kExitAllFailed : kExitOk;
}

int cmd_census(Context& c) {
  c.cfg.require_known({"a", "b", "max_period", "seed_x", "seed_y", "transient", "iterations"});
  const Params p{c.cfg.get_double("a"), c.cfg.get_double("b")};
  if (p.b == 0) throw Error(ErrorCode::InvalidArgument, "census needs b != 0");
  const auto orbits = find_periodic_orbits(p, c.cfg.get_int("max_period", 8));
  {
    auto os = c.open("orbits.json");
    write_orbits_json(os, p, orbits);
  }
  const auto rep = lyapunov_exponent(p, {c.cfg.get_double("seed_x", 0.1), c.cfg.get_double("seed_y", 0.1)},
                                     c.cfg.get_int("transient", 10000), c.cfg.get_int("iterations", 1000000));
  const auto cert = detect_strange_attractor(p);
  auto f = c.open("census.csv");
  f << "a,b,orbits,lyapunov,escaped,certificate,box_x_min,box_x_max,box_y_min,box_y_max\n";
  f << format_double(p.a) << ',' << format_double(p.b) << ',' << orbits.size() << ',' << format_double(rep.exponent) << ','
    << (rep.escaped ? 1 : 0) << ',' << (cert ? 1 : 0);
  if (cert) {
    const auto& r = cert->trapping_box;
    f << ',' << format_double(r.x_min) << ',' << format_double(r.x_max) << ',' << format_double(r.y_min) << ','
      << format_double(r.y_max);
  } else {
    f << ",,,,";
  }
  f << '\n';
  if (cert) {
    auto poly = c.open("trapping_region.csv");
    poly << "x,y\n";
    for (const auto& z : cert->trapping_region) poly << format_double(z.x) << ',' << format_double(z.y) << '\n';
  }
  c.manifest.summary["orbits"] = std::to_string(orbits.size());
  c.manifest.summary["certificate"] = cert ? "yes" : "no";
  c.out << "orbits " << orbits.size() << " lyapunov " << format_double(rep.exponent) << " certificate "
        << (cert ? "yes" : "no") << '\n';
  return kExitOk;
}

int cmd_manifold_dump(Context& c) {
  c.cfg.require_known({"a", "b", "iterations", "degree", "x_min", "x_max", "y_min", "y_max", "h_min", "h_max"});
  check_positive(c.cfg, {"h_min", "h_max"});
  const Params p{c.cfg.get_double("a"), c.cfg.get_double("b")};
  const Rect trim{c.cfg.get_double("x_min", kDefaultTrimBox.x_min), c.cfg.get_double("x_max", kDefaultTrimBox.x_max),
                  c.cfg.get_double("y_min", kDefaultTrimBox.y_min), c.cfg.get_double("y_max", kDefaultTrimBox.y_max)};
  GrowOptions opt;
  opt.h_min = c.cfg.get_double("h_min", opt.h_min);
  opt.h_max = c.cfg.get_double("h_max", opt.h_max);
  const auto chart = local_manifold_chart(p, ManifoldKind::unstable, c.cfg.get_int("degree", 12));
  const auto segs = grow_unstable(p, chart, c.cfg.get_int("iterations", 12), trim, opt);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    auto f = c.open("unstable_" + std::to_string(i) + ".csv");
    write_csv(f, segs[i]);
  }
  c.manifest.summary["segments"] = std::to_string(segs.size());
  c.out << "segments " << segs.size() << '\n';
  return segs.empty() ? kExitAllFailed : kExitOk;
}

const std::map<std::string, std::function<int(Context&)>>& commands() {
  static const std::map<std::string, std::function<int(Context&)>> table{
      {"fixed-points", cmd_fixed_points}, {"tangency-curve", cmd_tangency_curve}, {"sweep", cmd_sweep},
      {"thickness", cmd_thickness},       {"renorm", cmd_renorm},                 {"census", cmd_census},
      {"manifold-dump", cmd_manifold_dump}};
  return table;
}

}  // namespace

RunConfig RunConfig::parse(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
    if (cfg.has(key)) throw ConfigError("key '" + key + "' given twice");
    cfg.values_[key] = trim(t.substr(eq + 1));
  }
  return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config " + path);
  return parse(f);
}

void RunConfig::require_known(const std::set<std::string>& allowed) const {
  for (const auto& [k, v] : values_) {
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "'");
  }
}

double RunConfig::get_double(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
  return parse_number(key, it->second);
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const double v = get_double(key);
  if (v != std::floor(v) || std::abs(v) > 2e9) throw ConfigError("key '" + key + "': not an integer");
  return static_cast<int>(v);
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::vector<double> RunConfig::get_list(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number(key, item));
  }
  return out;
}

std::string RunConfig::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& [k, v] : values_) {  // std::map iterates sorted
    for (char ch : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ull;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"henonlab: experiments on the Henon family near a homoclinic tangency"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;
  for (const auto& [name, fn] : commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "flat key=value file");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "random seed, recorded in the manifest");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  RunManifest manifest;
  manifest.command = name;
  manifest.tool_version = kToolVersion;
  manifest.seed = seed;
  manifest.started = utc_now();
  int code = kExitOk;
  fs::path dir = out_dir;
  try {
    fs::create_directories(dir);
    Context c{config_path.empty() ? RunConfig{} : RunConfig::parse_file(config_path), dir, seed, threads, out, manifest};
    c.manifest.config_hash = c.cfg.hash();
    try {
      code = commands().at(name)(c);
    } catch (...) {
      manifest = c.manifest;
      throw;
    }
    manifest = c.manifest;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    manifest.summary["error"] = e.what();
    code = kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    manifest.summary["error"] = e.what();
    code = is_domain(e.code()) ? kExitDomain : kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    manifest.summary["error"] = e.what();
    code = kExitConfig;
  }
  manifest.finished = utc_now();
  manifest.summary["exit_code"] = std::to_string(code);
  std::error_code ec;
  if (fs::is_directory(dir, ec)) {
    std::ofstream m(dir / "manifest.json");
    write_manifest_json(m, manifest);
  }
  return code;
}

}  // namespace henon::cli
