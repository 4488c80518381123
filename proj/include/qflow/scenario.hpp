#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qflow/carpets.hpp"
#include "qflow/fractal.hpp"
#include "qflow/hydro.hpp"
#include "qflow/toymodel.hpp"
#include "qflow/trajectories.hpp"
#include "qflow/types.hpp"
#include "qflow/wavemodel.hpp"

namespace qflow {

enum class ScenarioKind {
  TwoSlit,
  CounterPropagating,
  HarmonicTwoLevel,
  Talbot,
  NslitLadder,
  BoxDiffraction,
  Fractal,
  Toymodel,
};

std::string to_string(ScenarioKind k);
ScenarioKind scenario_from_string(const std::string& name);

struct TwoSlitParams {
  double d = 10.0;
  double sigma0 = 1.0;
};

struct CounterPropagatingParams {
  double d = 20.0;
  double sigma0_1 = 1.0;
  double sigma0_2 = 1.0;
  double weight_1 = 0.5;
  double weight_2 = 0.5;
  double v = 0.0;  // 0 selects the 10%-spread critical speed
};

struct HarmonicParams {
  double omega = 1.0;
  int level_a = 0;
  int level_b = 3;
  double weight_a = 0.5;
  double weight_b = 0.5;
};

struct TalbotParams {
  double d = 1.0;
  double sigma0 = 0.125;
  int nmax = -1;  // -1: machine-negligible-tail cutoff
};

struct NslitParams {
  int n_slits = 51;
  double d = 1.0;
  double sigma0 = 0.1;
  double t_far = 0.0;  // 0 selects the beam-separation time
  double span_orders = 1.5;
  int n_points = 2001;
  double skip_floor = 1e-6;
};

struct BoxDiffractionParams {
  double d = 1.0;
  double sigma0 = 0.1;
  int nmax = -1;
};

struct FractalParams {
  double well_length = 1.0;
  double square_width = 0.25;
  std::vector<int> K_values = {16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  double t = 0.0;  // 0 selects tau_r / sqrt(2)
  int nx = 0;      // 0 selects 32 * K_max
};

struct ToymodelParams {
  std::string preset = "very_fast";
  double t_max = 20.0;
  int nt = 401;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::TwoSlit;
  std::string output_dir = "qflow_out";
  PhysicalConstants constants;
  GridSpec grid{-24.0, 24.0, 241, 0.0, 8.0, 81};
  EnsembleSpec ensemble{200, Sampling::UniformSupport, -9.0, 9.0, 20177};
  IntegratorConfig integrator;  // save_times are derived from the grid

  TwoSlitParams two_slit;
  CounterPropagatingParams counter_propagating;
  HarmonicParams harmonic_two_level;
  TalbotParams talbot;
  NslitParams nslit_ladder;
  BoxDiffractionParams box_diffraction;
  FractalParams fractal;
  ToymodelParams toymodel;
};

// Strict parser for the documented JSON schema: unknown keys are rejected
// with a nearest-key suggestion, numeric invariants are checked against the
// offending key's name.
ScenarioConfig parse_config(const std::string& text);
// Canonical form; parse(print_config(c)) reproduces c byte for byte.
std::string print_config(const ScenarioConfig& c);

std::vector<std::string> preset_names();
ScenarioConfig preset_config(const std::string& name);

struct CheckResult {
  std::string name;
  bool passed;
  double value;
  double threshold;
  std::string detail;
};

struct ArtifactEntry {
  std::string file;
  std::uint64_t bytes;
  std::string sha256;
};

struct RunManifest {
  std::string version;
  std::string scenario;
  std::uint64_t seed;
  std::string output_dir;
  std::string config_json;
  std::vector<ArtifactEntry> artifacts;
  std::vector<CheckResult> checks;
  double node_abort_fraction = 0.0;
  bool all_passed = false;
  double duration_seconds = 0.0;
};

// Runs one scenario, writes its artifacts (CSV/JSON plus checks.json and
// manifest.json) under cfg.output_dir and returns the manifest. Throws on
// I/O failure; check failures are reported, not thrown.
RunManifest run_manifest(const ScenarioConfig& cfg);
RunManifest run_scenario(const ScenarioConfig& cfg);  // alias of run_manifest

// Writes declarative plot scripts next to the artifacts listed in the
// manifest. Throws MissingArtifactError when the manifest is empty or a
// referenced artifact is gone.
std::vector<std::string> emit_plots(const RunManifest& manifest);

std::string toolkit_version();

}  // namespace qflow
