#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;
using namespace henon::cli;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("henonlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string config(const std::string& name, const std::string& body) {
    const auto p = dir_ / name;
    std::ofstream(p) << body;
    return p.string();
  }

  CliRun run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "henonlab");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    CliRun r;
    r.code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
  }

  std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

}  // namespace

TEST(RunConfigParse, HashIgnoresKeyOrder) {
  std::istringstream one("a = -2\nb=0\n# comment\n\n");
  std::istringstream two("b=0\na=-2\n");
  EXPECT_EQ(RunConfig::parse(one).hash(), RunConfig::parse(two).hash());
  std::istringstream three("b=0\na=-2.0\n");
  EXPECT_NE(RunConfig::parse(three).hash(), RunConfig::parse(two = std::istringstream("b=0\na=-2\n")).hash());
}

TEST(RunConfigParse, RejectsMalformedLines) {
  std::istringstream no_eq("a -2\n");
  EXPECT_THROW(RunConfig::parse(no_eq), ConfigError);
  std::istringstream twice("a=1\na=2\n");
  EXPECT_THROW(RunConfig::parse(twice), ConfigError);
  std::istringstream junk("a=1x\n");
  const auto cfg = RunConfig::parse(junk);
  EXPECT_THROW(cfg.get_double("a"), ConfigError);
  EXPECT_THROW(cfg.get_double("missing"), ConfigError);
}

TEST_F(CliTest, FixedPointsAtMinusTwo) {
  const auto r = run_cli({"fixed-points", "--config", config("c", "a=-2\nb=0\n"), "--out", (dir_ / "o").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("\"sigma\": 4.0"), std::string::npos);
  EXPECT_NE(r.out.find("\"lambda\": 0.0"), std::string::npos);
  EXPECT_NE(r.out.find("2.0,\n        2.0"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "o" / "manifest.json"));
}

TEST_F(CliTest, NoRealFixedPointsExitsTwo) {
  const auto r = run_cli({"fixed-points", "--config", config("c", "a=1\nb=0\n"), "--out", (dir_ / "o").string()});
  EXPECT_EQ(r.code, kExitDomain);
}

TEST_F(CliTest, UnknownKeyExitsOneNamingKey) {
  const auto r = run_cli({"fixed-points", "--config", config("c", "a=1\nbeta=0\n"), "--out", (dir_ / "o").string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("beta"), std::string::npos);
  EXPECT_NE(slurp(dir_ / "o" / "manifest.json").find("\"exit_code\": \"1\""), std::string::npos);
}

TEST_F(CliTest, BadFlagsExitOne) {
  EXPECT_EQ(run_cli({"no-such-command"}).code, kExitConfig);
  EXPECT_EQ(run_cli({"fixed-points", "--threads", "0", "--out", dir_.string()}).code, kExitConfig);
  EXPECT_EQ(run_cli({"fixed-points", "--config", (dir_ / "absent.cfg").string(), "--out", dir_.string()}).code,
            kExitConfig);
}

TEST_F(CliTest, TangencyCurveRowsAndEmptyList) {
  const auto out = dir_ / "t";
  const auto r = run_cli({"tangency-curve", "--config", config("c", "b_values=0,0.01\n"), "--out", out.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto csv = slurp(out / "tangency_curve.csv");
  EXPECT_NE(csv.find("\n0,-2,0,"), std::string::npos);
  EXPECT_EQ(run_cli({"tangency-curve", "--config", config("e", "b_values=\n"), "--out", out.string()}).code, kExitConfig);
  EXPECT_EQ(run_cli({"tangency-curve", "--config", config("n", "b_values=0\ntol=-1\n"), "--out", out.string()}).code,
            kExitConfig);
}

TEST_F(CliTest, AffineThicknessIsOne) {
  const auto out = dir_ / "th";
  ASSERT_EQ(run_cli({"thickness", "--config", config("c", "model=affine\nlevel=5\n"), "--out", out.string()}).code, kExitOk);
  EXPECT_EQ(slurp(out / "thickness.csv"), "level,count,tau\n0,2,1\n1,4,1\n2,8,1\n3,16,1\n4,32,1\n5,64,1\n");
}

TEST_F(CliTest, OutputsAreByteIdenticalAcrossRuns) {
  const auto cfg = config("c", "a=-1.4\nb=-0.3\nmax_period=4\niterations=100000\n");
  ASSERT_EQ(run_cli({"census", "--config", cfg, "--out", (dir_ / "r1").string()}).code, kExitOk);
  ASSERT_EQ(run_cli({"census", "--config", cfg, "--out", (dir_ / "r2").string(), "--threads", "2"}).code, kExitOk);
  for (const char* f : {"orbits.json", "census.csv", "trapping_region.csv"}) {
    EXPECT_EQ(slurp(dir_ / "r1" / f), slurp(dir_ / "r2" / f)) << f;
  }
  EXPECT_NE(slurp(dir_ / "r1" / "census.csv").find(",1,"), std::string::npos);
}

TEST_F(CliTest, SweepCsvColumns) {
  const auto out = dir_ / "s";
  const auto r = run_cli({"sweep", "--config", config("c", "b=-0.3\na_lo=-1.25\na_hi=-1.0\ngrid=2\nmax_period=8\n"), "--out",
                          out.string(), "--threads", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto csv = slurp(out / "sweep.csv");
  EXPECT_EQ(csv.rfind("a,b,classification,sink_periods,lyapunov,tangency_gap\n", 0), 0u);
  EXPECT_NE(csv.find("-1.25,-0.29999999999999999,sinks,7,"), std::string::npos);
  EXPECT_NE(csv.find("\n-1,-0.29999999999999999,sinks,4,"), std::string::npos);
}

TEST_F(CliTest, RenormResidualColumnDecreases) {
  const auto out = dir_ / "rn";
  ASSERT_EQ(run_cli({"renorm", "--config", config("c", "b=0.05\nn_min=0\nn_max=3\n"), "--out", out.string()}).code, kExitOk);
  std::istringstream csv(slurp(out / "renorm.csv"));
  std::string line;
  std::getline(csv, line);
  std::vector<double> res;
  while (std::getline(csv, line)) {
    std::stringstream ls(line);
    std::string cell;
    for (int i = 0; i < 3; ++i) std::getline(ls, cell, ',');
    res.push_back(std::stod(cell));
  }
  ASSERT_EQ(res.size(), 4u);
  for (std::size_t i = 1; i < res.size(); ++i) EXPECT_LT(res[i], res[i - 1]);
  EXPECT_TRUE(fs::exists(out / "frames.json"));
}

TEST_F(CliTest, ManifoldDumpWritesCurves) {
  const auto out = dir_ / "m";
  ASSERT_EQ(run_cli({"manifold-dump", "--config", config("c", "a=-2\nb=0.05\niterations=8\n"), "--out", out.string()}).code,
            kExitOk);
  EXPECT_EQ(slurp(out / "unstable_0.csv").rfind("s,x,y,tx,ty,kappa", 0), 0u);
}
