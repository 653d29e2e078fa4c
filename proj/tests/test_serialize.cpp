#include <gtest/gtest.h>

#include <sstream>

#include "json.hpp"
#include "henon/serialize.hpp"

using namespace henon;

TEST(Formatting, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, -2.1026916430721312, 1e-300, 4.0, 1.0 / 3.0}) {
    const auto s = format_double(v);
    EXPECT_EQ(std::stod(s), v) << s;
  }
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(Formatting, HighPrecisionKeepsDigitsBeyondDouble) {
  const HighReal third = HighReal(1) / 3;
  const auto s = format_high(third);
  EXPECT_EQ(s.rfind("3.33333333333333333333333333333", 0), 0u) << s;
}

TEST(SweepCsv, ColumnsAndEmptyOptionals) {
  SweepRecord a;
  a.a = -1.0;
  a.b = -0.3;
  a.sink_periods = {4, 8};
  a.lyapunov = -0.25;
  a.classification = Classification::sinks;
  SweepRecord e;
  e.a = -2.5;
  e.b = 0.05;
  e.tangency_gap = 0.5;
  e.classification = Classification::escape;
  std::ostringstream os;
  write_sweep_csv(os, {a, e});
  EXPECT_EQ(os.str(),
            "a,b,classification,sink_periods,lyapunov,tangency_gap\n"
            "-1,-0.29999999999999999,sinks,4;8,-0.25,\n"
            "-2.5,0.050000000000000003,escape,,,0.5\n");
}

TEST(TangencyJson, CarriesEveryField) {
  TangencyRecord r;
  r.params = {-2.0, 0.0};
  r.point = {-2.0, 2.0};
  r.second_deriv = -8.0;
  r.unfolding_speed = -8.0 / 3.0;
  r.converged = true;
  std::ostringstream os;
  write_tangency_json(os, {r});
  const auto j = nlohmann::json::parse(os.str());
  ASSERT_EQ(j.size(), 1u);
  for (const char* k : {"a", "b", "x", "y", "t_star", "second_deriv", "unfolding_speed", "kind", "residual"}) {
    EXPECT_TRUE(j[0].contains(k)) << k;
  }
  EXPECT_EQ(j[0]["kind"], "homoclinic");
  EXPECT_EQ(j[0]["unfolding_speed"].get<double>(), -8.0 / 3.0);
}

TEST(CantorJson, EndpointsAsStrings) {
  CantorApproximation k;
  k.level = 1;
  k.intervals = make_interval_set<HighReal>({{HighReal(0), HighReal(1) / 3}, {HighReal(2) / 3, HighReal(1)}}, 1);
  std::ostringstream os;
  write_cantor_json(os, k);
  const auto j = nlohmann::json::parse(os.str());
  EXPECT_EQ(j["level"], 1);
  ASSERT_EQ(j["intervals"].size(), 2u);
  EXPECT_TRUE(j["intervals"][0][1].is_string());
  const HighReal lo(j["intervals"][1][0].get<std::string>());
  EXPECT_LT(static_cast<double>(abs(lo - HighReal(2) / 3)), 1e-38);
}

TEST(ManifestJson, RecordsHashSeedAndOutputs) {
  RunManifest m;
  m.command = "sweep";
  m.config_hash = "00ff";
  m.tool_version = "0.1.0";
  m.seed = 42;
  m.outputs = {"sweep.csv"};
  std::ostringstream os;
  write_manifest_json(os, m);
  const auto j = nlohmann::json::parse(os.str());
  EXPECT_EQ(j["config_hash"], "00ff");
  EXPECT_EQ(j["seed"], 42);
  EXPECT_EQ(j["outputs"][0], "sweep.csv");
}
