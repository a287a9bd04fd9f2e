#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "prsbc/cli.hpp"

namespace fs = std::filesystem;

namespace {

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "prsbc");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return prsbc::cli::main(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("prsbc_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string kDir = PRSBC_SCENARIO_DIR;

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("invalid input exits 2") {
    CHECK(invoke({"run", "--scenario", "/nonexistent.json"}) == 2);
    CHECK(invoke({"run"}) == 2);
    CHECK(invoke({"frobnicate"}) == 2);
    CHECK(invoke({"run", "--scenario", kDir + "/head_on2.json", "--controller",
                  "mpc"}) == 2);

    const fs::path dir = scratch("overlap");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.json") << R"({"robots": [
      {"radius": 0.2, "ctrl_limit": 0.1, "start": [0, 0], "goal": [1, 0],
       "meas_noise": [0.1, 0.1]},
      {"radius": 0.2, "ctrl_limit": 0.1, "start": [0.5, 0], "goal": [0, 0],
       "meas_noise": [0.1, 0.1]}]})";
    CHECK(invoke({"run", "--scenario", (dir / "bad.json").string(), "--out",
                  dir.string()}) == 2);
  }

  TEST_CASE("run writes reproducible outputs and echoes its configuration") {
    const fs::path a = scratch("run_a");
    const fs::path b = scratch("run_b");
    for (const auto& dir : {a, b})
      CHECK(invoke({"run", "--scenario", kDir + "/head_on2.json", "--out",
                    dir.string(), "--seed", "5", "--mc-samples", "500"}) == 0);
    const std::string csv = slurp(a / "trajectory.csv");
    CHECK(!csv.empty());
    CHECK(csv == slurp(b / "trajectory.csv"));

    const auto m = nlohmann::json::parse(slurp(a / "metrics.json"));
    CHECK(m["config"]["seed"] == 5);
    CHECK(m["config"]["controller"] == "prsbc");
    CHECK(m["config"]["convention"] == "paper");
    CHECK(m["config"]["mc_samples"] == 500);
    CHECK(m["collision_step_count"] == 0);
  }

  TEST_CASE("a collision exits 3") {
    const fs::path dir = scratch("sbc");
    CHECK(invoke({"run", "--scenario", kDir + "/swap6.json", "--out",
                  dir.string(), "--controller", "sbc", "--seed", "1",
                  "--mc-samples", "100"}) == 3);
    const auto m = nlohmann::json::parse(slurp(dir / "metrics.json"));
    CHECK(m["collision_step_count"].get<int>() > 0);
  }

  TEST_CASE("selfcheck exit codes") {
    CHECK(invoke({"selfcheck", "--mc-samples", "20000"}) == 0);
    CHECK(invoke({"selfcheck", "--mc-samples", "20000",
                  "--inject-b-sign-error"}) == 1);
  }
}
