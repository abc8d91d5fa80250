#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "herding/cli.hpp"
#include "herding/scenario_io.hpp"

using herding::cli::main;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "herding");
  std::ostringstream out, err;
  const int code = main(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("herding_cli_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("gas-check examples") {
  auto r = invoke({"gas-check", "--kf", "0.25", "--kh", "50", "--m", "5"});
  CHECK(r.code == 0);
  CHECK(r.out.find("negative_definite: true") != std::string::npos);

  r = invoke({"gas-check", "--kf", "0.1", "--kh", "0.1", "--m", "1"});
  CHECK(r.code == 1);
  CHECK(r.out.find("negative_definite: false") != std::string::npos);

  r = invoke({"gas-check", "--kf", "1", "--kh", "1", "--m", "1"});
  CHECK(r.code == 0);
  const auto at = r.out.find("max_eigenvalue: ");
  REQUIRE(at != std::string::npos);
  CHECK(std::stod(r.out.substr(at + 16)) == doctest::Approx(-0.5));
}

TEST_CASE("gas-check reads a matrix file") {
  const auto dir = scratch("gas");
  std::ofstream(dir / "kh.json") << "[[2, 0], [0, 3]]";
  auto r = invoke({"gas-check", "--kf", "1", "--kh", (dir / "kh.json").string(), "--m", "1"});
  CHECK(r.code == 0);
  std::ofstream(dir / "skew.json") << "[[2, 1], [0, 3]]";
  r = invoke({"gas-check", "--kf", "1", "--kh", (dir / "skew.json").string(), "--m", "1"});
  CHECK(r.code == 1);
  CHECK(r.err.find("symmetric") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("bench-t argument errors exit 1") {
  const std::string scenario = HERDING_SCENARIO_DIR "/table1.json";
  CHECK(invoke({"bench-t", "--scenario", scenario, "--t-values", "", "--out", "/tmp/x"}).code == 1);
  CHECK(invoke({"bench-t", "--scenario", scenario, "--t-values", "0.1,abc", "--out", "/tmp/x"}).code == 1);
  CHECK(invoke({"bench-t", "--scenario", scenario, "--t-values", "-0.1", "--out", "/tmp/x"}).code == 1);
  CHECK_THROWS_AS(herding::cli::parse_t_values(""), herding::SchemaError);
  CHECK(herding::cli::parse_t_values("0.01,0.1,0.5").size() == 3);
}

TEST_CASE("run on a zero-duration scenario") {
  const auto dir = scratch("run0");
  auto s = herding::load_scenario(HERDING_SCENARIO_DIR "/table1.json");
  s.sim.duration = 0;
  std::ofstream(dir / "zero.json") << herding::serialize_scenario(s);
  const auto r = invoke({"run", "--scenario", (dir / "zero.json").string(), "--out", (dir / "out").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("rows: 1") != std::string::npos);
  const auto table = herding::read_trajectory(dir / "out" / "trajectory.csv");
  CHECK(table.rows.size() == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("bench-t writes one row per sample time") {
  const auto dir = scratch("bench");
  auto s = herding::load_scenario(HERDING_SCENARIO_DIR "/table1.json");
  s.sim.duration = 0.5;
  std::ofstream(dir / "short.json") << herding::serialize_scenario(s);
  const auto r = invoke({"bench-t", "--scenario", (dir / "short.json").string(), "--t-values", "0.1,0.05",
                         "--out", (dir / "out").string()});
  CHECK(r.code == 0);
  std::ifstream in(dir / "out" / "bench.csv");
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  CHECK(header == "model,T,tau_mean,k_mean,k_std,eta_mean,eta_std,status");
  CHECK(first.rfind("inverse,0.050000000000000003,", 0) == 0);
  CHECK(second.rfind("inverse,0.10000000000000001,", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("bad scenario and bad arguments") {
  const auto dir = scratch("bad");
  std::ofstream(dir / "bad.json") << "{}";
  CHECK(invoke({"run", "--scenario", (dir / "bad.json").string(), "--out", (dir / "o").string()}).code == 1);
  CHECK(invoke({"run", "--scenario", "/nonexistent.json", "--out", "/tmp/o"}).code == 1);
  CHECK(invoke({"frobnicate"}).code == 1);
  CHECK(invoke({"--help"}).code == 0);
  std::filesystem::remove_all(dir);
}
