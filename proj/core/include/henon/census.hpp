#pragma once

// Sink and strange-attractor searches over parameter sweeps at fixed b.

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "henon/cantor.hpp"
#include "henon/core.hpp"

namespace henon {

enum class OrbitKind { sink, saddle, source, nonhyperbolic };

std::string to_string(OrbitKind k);

struct PeriodicOrbit {
  int period = 0;
  std::vector<PlanePoint> points;  // starts at the lexicographically smallest point
  std::array<std::complex<double>, 2> multipliers{};
  OrbitKind kind = OrbitKind::nonhyperbolic;
};

/// Newton seeds for find_periodic_orbits.
struct SeedingStrategy {
  int grid = 32;
  Rect box{-3.0, 3.0, -3.0, 3.0};
  bool fixed_point_images = true;  // also seed from the fixed points' first max_period images
};

/// Newton on phi^k - id for k = 1..max_period from every seed, keeping orbits
/// of minimal period k. Rotations and duplicates within 1e-6 are merged.
/// Raises InvalidArgument for b = 0 or max_period outside [1, 64].
std::vector<PeriodicOrbit> find_periodic_orbits(const Params& p, int max_period, const SeedingStrategy& seeds = {});

/// Classification of an orbit from its multipliers; the band 1 +- 1e-8 is
/// nonhyperbolic.
OrbitKind classify_multipliers(const std::array<std::complex<double>, 2>& m);

struct LyapunovReport {
  Params params;
  double exponent = 0.0;
  std::int64_t transient = 0;
  std::int64_t iterations = 0;
  PlanePoint seed_point;
  bool escaped = false;

  bool valid() const { return !escaped && iterations >= 100000; }
};

inline constexpr double kEscapeRadius = 10.0;

/// Largest exponent by renormalizing a tangent vector every step.
LyapunovReport lyapunov_exponent(const Params& p, const PlanePoint& seed, std::int64_t transient = 10000,
                                 std::int64_t iterations = 1000000);

struct AttractorCertificate {
  Rect trapping_box;                      // bounding box of trapping_region
  std::vector<PlanePoint> trapping_region;  // polygon; phi maps a boundary sample inside it
  PlanePoint saddle;   // a saddle fixed point inside the box
  LyapunovReport report;
};

/// Proxy certificate for a strange attractor: trapping polygon, saddle inside
/// it, positive exponent. Density of the orbit is not checked.
std::optional<AttractorCertificate> detect_strange_attractor(const Params& p);

enum class Classification { sinks, chaotic_attractor, escape, undetermined };

std::string to_string(Classification c);

struct SweepRecord {
  double a = 0.0;
  double b = 0.0;
  std::vector<int> sink_periods;  // one entry per distinct sink, sorted
  std::optional<double> lyapunov;
  std::optional<double> tangency_gap;  // a - h(b)
  Classification classification = Classification::undetermined;
};

struct SweepOptions {
  int seeds_per_axis = 4;            // forward-orbit seeds on a square grid in [-2, 2]^2
  int manifold_seeds = 64;           // seeds on W^u(p), parameters in [-span, span]
  double manifold_span = 400.0;
  std::int64_t transient = 20000;
  std::int64_t lyapunov_iterations = 100000;
  double chaotic_threshold = 0.05;
  int threads = 1;
};

/// `grid` evenly spaced a values over the closed interval. Every grid point is
/// independent; output order is the grid order for any thread count.
std::vector<SweepRecord> sink_census_sweep(double b, const Interval& a_interval, int grid, int max_period,
                                           const SweepOptions& opt = {});

struct SweepSummary {
  int records = 0;
  double sink_fraction = 0.0;
  double chaotic_fraction = 0.0;
  double escape_fraction = 0.0;
  int max_distinct_sinks = 0;
};

SweepSummary summarize(const std::vector<SweepRecord>& records);

/// Attracting cycles reached by forward iteration from `seeds` (periods up to
/// max_period), each refined by Newton and deduplicated.
std::vector<PeriodicOrbit> attracting_cycles(const Params& p, const std::vector<PlanePoint>& seeds, int max_period,
                                             std::int64_t transient);

}  // namespace henon
