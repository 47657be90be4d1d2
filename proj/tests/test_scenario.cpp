#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "srlt/errors.hpp"
#include "srlt/scenario.hpp"

using namespace srlt;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json small_t1() {
  return json::parse(R"({
    "id": "small-t1", "theorem": "T1", "condition_b": "yes",
    "group": {"kind": "integer_lattice", "dimension": 1},
    "law": [{"at": -1, "w": 0.2}, {"at": 0, "w": 0.2}, {"at": 1, "w": 0.6}],
    "f": [{"at": 0, "w": 1}], "g": [{"at": 0, "w": 1}],
    "x": 1, "y": 0, "n_max": 80, "m": [1, 2], "judge_from": 40, "tolerance": 0.05
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("srlt-test-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_json(const fs::path& dir, const std::string& name, const json& j) {
  const auto p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(SRLT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config validation") {
  auto j = small_t1();
  j["law"][2]["w"] = 0.5;
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = small_t1();
  j.erase("group");
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = small_t1();
  j["theorem"] = "T9";
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = small_t1();
  j["n_max"] = 5;
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  const auto cfg = parse_scenario(small_t1());
  CHECK(cfg.id == "small-t1");
  CHECK(cfg.theorem == Theorem::t1);
  CHECK(cfg.m.size() == 2);
  CHECK_THROWS_AS(load_scenario("/nonexistent/path.json"), ConfigError);
}

TEST_CASE("shipped scenarios parse") {
  for (const auto& e : fs::directory_iterator(SRLT_SCENARIO_DIR)) {
    if (e.path().extension() != ".json") continue;
    CAPTURE(e.path().string());
    CHECK_NOTHROW(load_scenario(e.path()));
  }
}

TEST_CASE("runs are deterministic byte for byte") {
  const auto cfg = parse_scenario(small_t1());
  const auto a = scratch("det-a"), b = scratch("det-b");
  write_report(run_scenario(cfg), a);
  write_report(run_scenario(cfg), b);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a / "small-t1")) {
    ++files;
    REQUIRE(slurp(e.path()) == slurp(b / "small-t1" / e.path().filename()));
  }
  CHECK(files >= 4);
  CHECK(fs::exists(a / "small-t1" / "summary.json"));
  CHECK(fs::exists(a / "small-t1" / "pointwise.csv"));
}

TEST_CASE("report contents") {
  const auto rep = run_scenario(parse_scenario(small_t1()));
  CHECK(rep.series.size() == 3);
  for (const auto& [k, v] : rep.summary.items())
    if (v.is_object() && v.contains("value")) CHECK(v.contains("note"));
  const auto& pw = rep.series.front();
  CHECK(pw.id == "pointwise");
  const auto csv = series_csv(pw);
  CHECK(csv.rfind("n,ratio,target,abs_err,rel_err,exceptional_flag,density_to_n\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == pw.values.size() + 1);

  const auto dir = scratch("csv");
  write_report(rep, dir);
  const auto d = density_from_csv(dir / "small-t1" / "pointwise.csv", 80, pw.epsilon, pw.mode);
  CHECK(d.density == doctest::Approx(pw.final_density()).epsilon(1e-15));
  // limits past the last row clamp to it
  CHECK(density_from_csv(dir / "small-t1" / "pointwise.csv", 500, 1e-2, EpsilonMode::relative).limit == 80);
  CHECK_THROWS_AS(density_from_csv(dir / "small-t1" / "summary.json", 80, 1e-2, EpsilonMode::relative), ConfigError);
}

TEST_CASE("cli exit codes") {
  const auto dir = scratch("cli");
  auto passing = small_t1();
  passing["tolerance"] = 0.5;
  passing["m"] = json::array({1});
  CHECK(cli("verify " + write_json(dir, "pass.json", passing).string()) == 0);
  auto failing = small_t1();
  failing["tolerance"] = 1e-6;
  CHECK(cli("verify " + write_json(dir, "fail.json", failing).string()) == 1);
  auto bad = small_t1();
  bad["law"][2]["w"] = 0.5;
  CHECK(cli("verify " + write_json(dir, "bad.json", bad).string()) == 2);
  CHECK(cli("run " + write_json(dir, "pass2.json", passing).string() + " --out " + (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "small-t1" / "summary.json"));
  CHECK(cli("density " + (dir / "out" / "small-t1" / "pointwise.csv").string() + " --limit 80 --eps 0.01") == 0);
  CHECK(cli("groups list") == 0);
  CHECK(cli("estimate-r " + std::string(SRLT_SCENARIO_DIR) + "/f2-lazy.json") == 0);
  CHECK(cli("verify /nonexistent.json") != 0);

  auto t3 = json::parse(slurp(fs::path(SRLT_SCENARIO_DIR) / "affine-t3.json"));
  t3["truncation_bound"] = 1e-12;
  t3["n_max"] = 20;
  t3["judge_from"] = 20;
  CHECK(cli("verify " + write_json(dir, "trunc.json", t3).string()) == 2);
}
