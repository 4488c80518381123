#include "qflow/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"

using namespace qflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("qflow_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// A small but complete two-slit run for artifact-level tests.
ScenarioConfig small_two_slit(const std::string& tag) {
  ScenarioConfig cfg = preset_config("two_slit");
  cfg.grid = {-18.0, 18.0, 61, 0.0, 4.0, 17};
  cfg.ensemble = {24, Sampling::UniformSupport, -8.0, 8.0, 99};
  cfg.output_dir = (temp_dir(tag) / "out").string();
  return cfg;
}

}  // namespace

TEST_CASE("a minimal config parses with documented defaults") {
  const auto cfg = parse_config(R"({"scenario": "two_slit"})");
  CHECK(cfg.scenario == ScenarioKind::TwoSlit);
  CHECK(cfg.constants.hbar == 1.0);
  CHECK(cfg.constants.mass == 1.0);
  CHECK(cfg.integrator.rtol == 1e-8);
  CHECK(cfg.integrator.atol == 1e-10);
  CHECK(cfg.integrator.density_floor == 1e-10);
  CHECK(cfg.two_slit.d == 10.0);
  CHECK(cfg.two_slit.sigma0 == 1.0);
}

TEST_CASE("negative sigma0 is rejected by name") {
  try {
    parse_config(R"({"scenario": "two_slit", "two_slit": {"sigma0": -1}})");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("sigma0") != std::string::npos);
  }
}

TEST_CASE("unknown keys are rejected with a suggestion") {
  try {
    parse_config(
        R"({"scenario": "two_slit", "two_slit": {"sigma_zero": 1.0}})");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("sigma_zero") != std::string::npos);
    CHECK(msg.find("sigma0") != std::string::npos);  // nearest-key suggestion
  }
}

TEST_CASE("syntax errors raise ParseError") {
  CHECK_THROWS_AS(parse_config("{scenario:"), ParseError);
  CHECK_THROWS_AS(parse_config("[1,2,3]"), ParseError);
}

TEST_CASE("unknown scenario names get a suggestion") {
  try {
    parse_config(R"({"scenario": "two_slits"})");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("two_slit") != std::string::npos);
  }
}

TEST_CASE("configs round-trip through print and parse") {
  for (const auto& name : preset_names()) {
    const ScenarioConfig cfg = preset_config(name);
    const std::string once = print_config(cfg);
    const std::string twice = print_config(parse_config(once));
    CHECK(once == twice);
  }
}

TEST_CASE("every scenario has a preset") {
  const auto names = preset_names();
  CHECK(names.size() == 8);
  for (const auto& name : names) {
    const auto cfg = preset_config(name);
    CHECK(to_string(cfg.scenario) == name);
  }
  CHECK_THROWS_AS(preset_config("two_slits"), ValidationError);
}

TEST_CASE("a two-slit run emits the documented artifacts and passes checks") {
  const auto cfg = small_two_slit("run");
  const auto manifest = run_scenario(cfg);

  CHECK(manifest.all_passed);
  CHECK(manifest.scenario == "two_slit");

  bool found_non_crossing = false;
  for (const auto& chk : manifest.checks)
    if (chk.name == "non_crossing") {
      found_non_crossing = true;
      CHECK(chk.passed);
    }
  CHECK(found_non_crossing);

  for (const char* name :
       {"config.json", "trajectories.csv", "carpet.csv", "checks.json"}) {
    bool listed = false;
    for (const auto& a : manifest.artifacts) listed |= a.file == name;
    CHECK(listed);
    CHECK(fs::exists(fs::path(cfg.output_dir) / name));
  }
  CHECK(fs::exists(fs::path(cfg.output_dir) / "manifest.json"));

  // digests in the manifest match the bytes on disk
  for (const auto& a : manifest.artifacts) {
    const auto bytes = slurp(fs::path(cfg.output_dir) / a.file);
    CHECK(bytes.size() == a.bytes);
  }

  // checks.json carries the per-check verdicts
  const std::string checks = slurp(fs::path(cfg.output_dir) / "checks.json");
  CHECK(checks.find("\"non_crossing\"") != std::string::npos);
  CHECK(checks.find("\"all_passed\": true") != std::string::npos);
}

TEST_CASE("reruns with the same seed are byte-identical") {
  auto cfg = small_two_slit("det_a");
  const auto first = run_scenario(cfg);
  cfg.output_dir = (temp_dir("det_b") / "out").string();
  const auto second = run_scenario(cfg);

  REQUIRE(first.artifacts.size() == second.artifacts.size());
  for (std::size_t i = 0; i < first.artifacts.size(); ++i) {
    if (first.artifacts[i].file == "config.json") continue;  // echoes the dir
    CHECK(first.artifacts[i].file == second.artifacts[i].file);
    CHECK(first.artifacts[i].sha256 == second.artifacts[i].sha256);
  }
}

TEST_CASE("plot scripts reference the emitted artifacts") {
  const auto cfg = small_two_slit("plots");
  const auto manifest = run_scenario(cfg);
  const auto scripts = emit_plots(manifest);
  bool carpet_script = false;
  for (const auto& s : scripts) carpet_script |= s == "carpet.plot";
  CHECK(carpet_script);
  const std::string body = slurp(fs::path(cfg.output_dir) / "carpet.plot");
  CHECK(body.find("carpet.csv") != std::string::npos);
  CHECK(body.find("xlabel: x") != std::string::npos);
  CHECK(body.find("ylabel: t") != std::string::npos);

  RunManifest empty;
  empty.output_dir = cfg.output_dir;
  CHECK_THROWS_AS(emit_plots(empty), MissingArtifactError);
}

TEST_CASE("the ladder scenario writes an overlay script") {
  ScenarioConfig cfg = preset_config("nslit_ladder");
  cfg.nslit_ladder.n_slits = 11;  // smaller run, same artifact layout
  cfg.nslit_ladder.n_points = 601;
  const double t_far = 11.0 / 4.0;
  const double span = 1.5 * 2 * std::numbers::pi * t_far;
  cfg.grid = {-span, span, 61, 0.0, t_far, 9};
  cfg.output_dir = (temp_dir("ladder") / "out").string();
  const auto manifest = run_scenario(cfg);
  const auto scripts = emit_plots(manifest);
  bool ladder_script = false;
  for (const auto& s : scripts) ladder_script |= s == "ladder.plot";
  CHECK(ladder_script);
  const std::string body = slurp(fs::path(cfg.output_dir) / "ladder.plot");
  CHECK(body.find("ladder.csv") != std::string::npos);
  CHECK(body.find("carpet.csv") != std::string::npos);  // density overlay
  CHECK(body.find("panel") != std::string::npos);
}

TEST_CASE("csv artifacts use full-precision scientific notation") {
  const auto cfg = small_two_slit("fmt");
  run_scenario(cfg);
  const std::string csv = slurp(fs::path(cfg.output_dir) / "trajectories.csv");
  CHECK(csv.find("e+00") != std::string::npos);
  CHECK(csv.find(',') != std::string::npos);
  // header row names each path
  CHECK(csv.rfind("t,path_0,", 0) == 0);
}
