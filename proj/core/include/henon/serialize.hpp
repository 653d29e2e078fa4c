#pragma once

// JSON and CSV writers for the module records. CSV doubles carry 17
// significant digits, JSON doubles the shortest round-trip form, and
// extended-precision values are decimal strings.

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "henon/census.hpp"
#include "henon/core.hpp"
#include "henon/horseshoe.hpp"
#include "henon/renorm.hpp"
#include "henon/tangency.hpp"

namespace henon {

std::string format_double(double v);
std::string format_high(const HighReal& v);

void write_fixed_points_json(std::ostream& os, const Params& p, const std::array<SaddleData, 2>& fps);
void write_tangency_json(std::ostream& os, const std::vector<TangencyRecord>& records);
void write_cantor_json(std::ostream& os, const CantorApproximation& k);
void write_fit_json(std::ostream& os, const FitReport& fit);
/// Frames with origin, axes and the parameter map spelled out.
void write_frames_manifest(std::ostream& os, const std::vector<RenormFrame>& frames);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records);
void write_sweep_json(std::ostream& os, const std::vector<SweepRecord>& records);
void write_orbits_json(std::ostream& os, const Params& p, const std::vector<PeriodicOrbit>& orbits);

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string tool_version;
  std::uint64_t seed = 0;
  std::string started;   // ISO 8601, UTC
  std::string finished;
  std::map<std::string, std::string> summary;
  std::vector<std::string> outputs;
};

void write_manifest_json(std::ostream& os, const RunManifest& m);

}  // namespace henon
