#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "json.hpp"
#include "qflow/scenario.hpp"

namespace qflow {

namespace {

using nlohmann::json;

int edit_distance(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

void check_keys(const json& obj, const std::string& where,
                const std::vector<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) != allowed.end())
      continue;
    std::string best;
    int best_d = 1000;
    for (const auto& cand : allowed) {
      const int d = edit_distance(key, cand);
      if (d < best_d) {
        best_d = d;
        best = cand;
      }
    }
    std::string msg = "unknown key \"" + key + "\" in " + where;
    if (!best.empty() && best_d < static_cast<int>(key.size()))
      msg += "; did you mean \"" + best + "\"?";
    throw ValidationError(msg);
  }
}

double get_number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (v.is_null()) return fallback;
  if (!v.is_number())
    throw ValidationError(std::string("key \"") + key + "\" must be a number");
  return v.get<double>();
}

int get_int(const json& obj, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer())
    throw ValidationError(std::string("key \"") + key +
                          "\" must be an integer");
  return v.get<int>();
}

void require_positive(double v, const char* key) {
  if (!(v > 0.0))
    throw ValidationError(std::string("key \"") + key + "\" must be > 0");
}

constexpr ScenarioKind kAllScenarios[] = {
    ScenarioKind::TwoSlit,        ScenarioKind::CounterPropagating,
    ScenarioKind::HarmonicTwoLevel, ScenarioKind::Talbot,
    ScenarioKind::NslitLadder,    ScenarioKind::BoxDiffraction,
    ScenarioKind::Fractal,        ScenarioKind::Toymodel};

}  // namespace

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::TwoSlit: return "two_slit";
    case ScenarioKind::CounterPropagating: return "counter_propagating";
    case ScenarioKind::HarmonicTwoLevel: return "harmonic_two_level";
    case ScenarioKind::Talbot: return "talbot";
    case ScenarioKind::NslitLadder: return "nslit_ladder";
    case ScenarioKind::BoxDiffraction: return "box_diffraction";
    case ScenarioKind::Fractal: return "fractal";
    case ScenarioKind::Toymodel: return "toymodel";
  }
  throw Error("unreachable scenario kind");
}

ScenarioKind scenario_from_string(const std::string& name) {
  for (const auto k : kAllScenarios)
    if (to_string(k) == name) return k;
  std::string best;
  int best_d = 1000;
  for (const auto k : kAllScenarios) {
    const int d = edit_distance(name, to_string(k));
    if (d < best_d) {
      best_d = d;
      best = to_string(k);
    }
  }
  throw ValidationError("unknown scenario \"" + name + "\"; did you mean \"" +
                        best + "\"?");
}

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("config root must be a JSON object");

  check_keys(root, "config",
             {"scenario", "output_dir", "constants", "grid", "ensemble",
              "integrator", "two_slit", "counter_propagating",
              "harmonic_two_level", "talbot", "nslit_ladder",
              "box_diffraction", "fractal", "toymodel"});

  ScenarioConfig cfg;
  if (!root.contains("scenario"))
    throw ValidationError("missing required key \"scenario\"");
  cfg.scenario = scenario_from_string(root.at("scenario").get<std::string>());
  if (root.contains("output_dir"))
    cfg.output_dir = root.at("output_dir").get<std::string>();

  if (root.contains("constants")) {
    const auto& c = root.at("constants");
    check_keys(c, "constants", {"hbar", "mass"});
    cfg.constants.hbar = get_number(c, "hbar", 1.0);
    cfg.constants.mass = get_number(c, "mass", 1.0);
    require_positive(cfg.constants.hbar, "hbar");
    require_positive(cfg.constants.mass, "mass");
  }

  if (root.contains("grid")) {
    const auto& g = root.at("grid");
    check_keys(g, "grid", {"x_min", "x_max", "nx", "t_min", "t_max", "nt"});
    cfg.grid.x_min = get_number(g, "x_min", cfg.grid.x_min);
    cfg.grid.x_max = get_number(g, "x_max", cfg.grid.x_max);
    cfg.grid.nx = get_int(g, "nx", cfg.grid.nx);
    cfg.grid.t_min = get_number(g, "t_min", cfg.grid.t_min);
    cfg.grid.t_max = get_number(g, "t_max", cfg.grid.t_max);
    cfg.grid.nt = get_int(g, "nt", cfg.grid.nt);
    if (!(cfg.grid.x_max > cfg.grid.x_min))
      throw ValidationError("grid: \"x_max\" must exceed \"x_min\"");
    if (!(cfg.grid.t_max > cfg.grid.t_min))
      throw ValidationError("grid: \"t_max\" must exceed \"t_min\"");
    if (cfg.grid.nx < 2) throw ValidationError("grid: \"nx\" must be >= 2");
    if (cfg.grid.nt < 2) throw ValidationError("grid: \"nt\" must be >= 2");
  }

  if (root.contains("ensemble")) {
    const auto& e = root.at("ensemble");
    check_keys(e, "ensemble", {"n_traj", "sampling", "support", "seed"});
    cfg.ensemble.n_traj = get_int(e, "n_traj", cfg.ensemble.n_traj);
    if (cfg.ensemble.n_traj < 1)
      throw ValidationError("ensemble: \"n_traj\" must be >= 1");
    if (e.contains("sampling")) {
      const std::string s = e.at("sampling").get<std::string>();
      if (s == "density_weighted")
        cfg.ensemble.sampling = Sampling::DensityWeighted;
      else if (s == "uniform_support")
        cfg.ensemble.sampling = Sampling::UniformSupport;
      else
        throw ValidationError(
            "ensemble: \"sampling\" must be \"density_weighted\" or "
            "\"uniform_support\"");
    }
    if (e.contains("support")) {
      const auto& s = e.at("support");
      if (!s.is_array() || s.size() != 2)
        throw ValidationError("ensemble: \"support\" must be [min, max]");
      cfg.ensemble.support_min = s.at(0).get<double>();
      cfg.ensemble.support_max = s.at(1).get<double>();
      if (!(cfg.ensemble.support_max > cfg.ensemble.support_min))
        throw ValidationError("ensemble: \"support\" must be increasing");
    }
    if (e.contains("seed"))
      cfg.ensemble.seed = e.at("seed").get<std::uint64_t>();
  }

  if (root.contains("integrator")) {
    const auto& i = root.at("integrator");
    check_keys(i, "integrator", {"rtol", "atol", "max_step", "density_floor"});
    cfg.integrator.rtol = get_number(i, "rtol", cfg.integrator.rtol);
    cfg.integrator.atol = get_number(i, "atol", cfg.integrator.atol);
    require_positive(cfg.integrator.rtol, "rtol");
    require_positive(cfg.integrator.atol, "atol");
    cfg.integrator.max_step =
        get_number(i, "max_step", std::numeric_limits<double>::infinity());
    if (!(cfg.integrator.max_step > 0.0))
      throw ValidationError("integrator: \"max_step\" must be > 0");
    cfg.integrator.density_floor =
        get_number(i, "density_floor", cfg.integrator.density_floor);
    require_positive(cfg.integrator.density_floor, "density_floor");
  }

  if (root.contains("two_slit")) {
    const auto& s = root.at("two_slit");
    check_keys(s, "two_slit", {"d", "sigma0"});
    cfg.two_slit.d = get_number(s, "d", cfg.two_slit.d);
    cfg.two_slit.sigma0 = get_number(s, "sigma0", cfg.two_slit.sigma0);
    require_positive(cfg.two_slit.d, "d");
    require_positive(cfg.two_slit.sigma0, "sigma0");
  }

  if (root.contains("counter_propagating")) {
    const auto& s = root.at("counter_propagating");
    check_keys(s, "counter_propagating",
               {"d", "sigma0_1", "sigma0_2", "weight_1", "weight_2", "v"});
    auto& p = cfg.counter_propagating;
    p.d = get_number(s, "d", p.d);
    p.sigma0_1 = get_number(s, "sigma0_1", p.sigma0_1);
    p.sigma0_2 = get_number(s, "sigma0_2", p.sigma0_2);
    p.weight_1 = get_number(s, "weight_1", p.weight_1);
    p.weight_2 = get_number(s, "weight_2", p.weight_2);
    p.v = get_number(s, "v", p.v);
    require_positive(p.d, "d");
    require_positive(p.sigma0_1, "sigma0_1");
    require_positive(p.sigma0_2, "sigma0_2");
    require_positive(p.weight_1, "weight_1");
    require_positive(p.weight_2, "weight_2");
    if (p.v < 0.0) throw ValidationError("key \"v\" must be >= 0");
  }

  if (root.contains("harmonic_two_level")) {
    const auto& s = root.at("harmonic_two_level");
    check_keys(s, "harmonic_two_level",
               {"omega", "level_a", "level_b", "weight_a", "weight_b"});
    auto& p = cfg.harmonic_two_level;
    p.omega = get_number(s, "omega", p.omega);
    p.level_a = get_int(s, "level_a", p.level_a);
    p.level_b = get_int(s, "level_b", p.level_b);
    p.weight_a = get_number(s, "weight_a", p.weight_a);
    p.weight_b = get_number(s, "weight_b", p.weight_b);
    require_positive(p.omega, "omega");
    if (p.level_a < 0 || p.level_b < 0)
      throw ValidationError("harmonic levels must be >= 0");
    if (p.level_a == p.level_b)
      throw ValidationError("harmonic levels must be distinct");
    require_positive(p.weight_a, "weight_a");
    require_positive(p.weight_b, "weight_b");
  }

  if (root.contains("talbot")) {
    const auto& s = root.at("talbot");
    check_keys(s, "talbot", {"d", "sigma0", "nmax"});
    auto& p = cfg.talbot;
    p.d = get_number(s, "d", p.d);
    p.sigma0 = get_number(s, "sigma0", p.sigma0);
    p.nmax = get_int(s, "nmax", p.nmax);
    require_positive(p.d, "d");
    require_positive(p.sigma0, "sigma0");
  }

  if (root.contains("nslit_ladder")) {
    const auto& s = root.at("nslit_ladder");
    check_keys(s, "nslit_ladder",
               {"n_slits", "d", "sigma0", "t_far", "span_orders", "n_points",
                "skip_floor"});
    auto& p = cfg.nslit_ladder;
    p.n_slits = get_int(s, "n_slits", p.n_slits);
    p.d = get_number(s, "d", p.d);
    p.sigma0 = get_number(s, "sigma0", p.sigma0);
    p.t_far = get_number(s, "t_far", p.t_far);
    p.span_orders = get_number(s, "span_orders", p.span_orders);
    p.n_points = get_int(s, "n_points", p.n_points);
    p.skip_floor = get_number(s, "skip_floor", p.skip_floor);
    if (p.n_slits < 1) throw ValidationError("key \"n_slits\" must be >= 1");
    require_positive(p.d, "d");
    require_positive(p.sigma0, "sigma0");
    if (p.t_far < 0.0) throw ValidationError("key \"t_far\" must be >= 0");
    require_positive(p.span_orders, "span_orders");
    if (p.n_points < 2) throw ValidationError("key \"n_points\" must be >= 2");
    require_positive(p.skip_floor, "skip_floor");
  }

  if (root.contains("box_diffraction")) {
    const auto& s = root.at("box_diffraction");
    check_keys(s, "box_diffraction", {"d", "sigma0", "nmax"});
    auto& p = cfg.box_diffraction;
    p.d = get_number(s, "d", p.d);
    p.sigma0 = get_number(s, "sigma0", p.sigma0);
    p.nmax = get_int(s, "nmax", p.nmax);
    require_positive(p.d, "d");
    require_positive(p.sigma0, "sigma0");
  }

  if (root.contains("fractal")) {
    const auto& s = root.at("fractal");
    check_keys(s, "fractal",
               {"well_length", "square_width", "K_values", "t", "nx"});
    auto& p = cfg.fractal;
    p.well_length = get_number(s, "well_length", p.well_length);
    p.square_width = get_number(s, "square_width", p.square_width);
    require_positive(p.well_length, "well_length");
    require_positive(p.square_width, "square_width");
    if (p.square_width > p.well_length)
      throw ValidationError(
          "key \"square_width\" must not exceed \"well_length\"");
    if (s.contains("K_values")) {
      const auto& kv = s.at("K_values");
      if (!kv.is_array() || kv.empty())
        throw ValidationError("key \"K_values\" must be a nonempty array");
      p.K_values.clear();
      for (const auto& v : kv) {
        if (!v.is_number_integer())
          throw ValidationError("key \"K_values\" must hold integers");
        p.K_values.push_back(v.get<int>());
      }
      for (std::size_t i = 0; i < p.K_values.size(); ++i) {
        if (p.K_values[i] < 1)
          throw ValidationError("key \"K_values\" entries must be >= 1");
        if (i > 0 && p.K_values[i] <= p.K_values[i - 1])
          throw ValidationError("key \"K_values\" must increase strictly");
      }
    }
    p.t = get_number(s, "t", p.t);
    if (p.t < 0.0) throw ValidationError("key \"t\" must be >= 0");
    p.nx = get_int(s, "nx", p.nx);
    if (p.nx < 0) throw ValidationError("key \"nx\" must be >= 0");
  }

  if (root.contains("toymodel")) {
    const auto& s = root.at("toymodel");
    check_keys(s, "toymodel", {"preset", "t_max", "nt"});
    auto& p = cfg.toymodel;
    if (s.contains("preset")) {
      p.preset = s.at("preset").get<std::string>();
      bool known = false;
      for (const auto& [name, params] : toy_presets())
        known |= name == p.preset;
      if (!known)
        throw ValidationError("unknown toymodel preset \"" + p.preset + "\"");
    }
    p.t_max = get_number(s, "t_max", p.t_max);
    p.nt = get_int(s, "nt", p.nt);
    require_positive(p.t_max, "t_max");
    if (p.nt < 2) throw ValidationError("key \"nt\" must be >= 2");
  }

  return cfg;
}

std::string print_config(const ScenarioConfig& c) {
  json root;
  root["scenario"] = to_string(c.scenario);
  root["output_dir"] = c.output_dir;
  root["constants"] = {{"hbar", c.constants.hbar}, {"mass", c.constants.mass}};
  root["grid"] = {{"x_min", c.grid.x_min}, {"x_max", c.grid.x_max},
                  {"nx", c.grid.nx},       {"t_min", c.grid.t_min},
                  {"t_max", c.grid.t_max}, {"nt", c.grid.nt}};
  root["ensemble"] = {
      {"n_traj", c.ensemble.n_traj},
      {"sampling", c.ensemble.sampling == Sampling::DensityWeighted
                       ? "density_weighted"
                       : "uniform_support"},
      {"support", {c.ensemble.support_min, c.ensemble.support_max}},
      {"seed", c.ensemble.seed}};
  json integ = {{"rtol", c.integrator.rtol},
                {"atol", c.integrator.atol},
                {"density_floor", c.integrator.density_floor}};
  if (std::isfinite(c.integrator.max_step))
    integ["max_step"] = c.integrator.max_step;
  else
    integ["max_step"] = nullptr;
  root["integrator"] = integ;

  root["two_slit"] = {{"d", c.two_slit.d}, {"sigma0", c.two_slit.sigma0}};
  root["counter_propagating"] = {{"d", c.counter_propagating.d},
                                 {"sigma0_1", c.counter_propagating.sigma0_1},
                                 {"sigma0_2", c.counter_propagating.sigma0_2},
                                 {"weight_1", c.counter_propagating.weight_1},
                                 {"weight_2", c.counter_propagating.weight_2},
                                 {"v", c.counter_propagating.v}};
  root["harmonic_two_level"] = {{"omega", c.harmonic_two_level.omega},
                                {"level_a", c.harmonic_two_level.level_a},
                                {"level_b", c.harmonic_two_level.level_b},
                                {"weight_a", c.harmonic_two_level.weight_a},
                                {"weight_b", c.harmonic_two_level.weight_b}};
  root["talbot"] = {{"d", c.talbot.d},
                    {"sigma0", c.talbot.sigma0},
                    {"nmax", c.talbot.nmax}};
  root["nslit_ladder"] = {{"n_slits", c.nslit_ladder.n_slits},
                          {"d", c.nslit_ladder.d},
                          {"sigma0", c.nslit_ladder.sigma0},
                          {"t_far", c.nslit_ladder.t_far},
                          {"span_orders", c.nslit_ladder.span_orders},
                          {"n_points", c.nslit_ladder.n_points},
                          {"skip_floor", c.nslit_ladder.skip_floor}};
  root["box_diffraction"] = {{"d", c.box_diffraction.d},
                             {"sigma0", c.box_diffraction.sigma0},
                             {"nmax", c.box_diffraction.nmax}};
  root["fractal"] = {{"well_length", c.fractal.well_length},
                     {"square_width", c.fractal.square_width},
                     {"K_values", c.fractal.K_values},
                     {"t", c.fractal.t},
                     {"nx", c.fractal.nx}};
  root["toymodel"] = {{"preset", c.toymodel.preset},
                      {"t_max", c.toymodel.t_max},
                      {"nt", c.toymodel.nt}};
  return root.dump(2) + "\n";
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto k : kAllScenarios) names.push_back(to_string(k));
  return names;
}

ScenarioConfig preset_config(const std::string& name) {
  ScenarioConfig cfg;
  cfg.scenario = scenario_from_string(name);
  cfg.output_dir = "qflow_out_" + name;

  switch (cfg.scenario) {
    case ScenarioKind::TwoSlit: {
      cfg.grid = {-24.0, 24.0, 241, 0.0, 8.0, 81};
      cfg.ensemble = {200, Sampling::UniformSupport, -9.0, 9.0, 20177};
      break;
    }
    case ScenarioKind::CounterPropagating: {
      // equal packets at the 10%-spread critical speed; the run ends at
      // twice the crossing time
      const double d = 20.0, s0 = 1.0;
      const double v = 2.2 * d / (2.0 * s0 * s0);
      const double T = 2.0 * d / v;
      cfg.counter_propagating = {d, s0, s0, 0.5, 0.5, 0.0};
      cfg.grid = {-34.0, 34.0, 241, 0.0, T, 41};
      cfg.ensemble = {2000, Sampling::DensityWeighted, -d / 2 - 5 * s0,
                      d / 2 + 5 * s0, 8191};
      break;
    }
    case ScenarioKind::HarmonicTwoLevel: {
      const double period = 2.0 * std::numbers::pi / 3.0;
      cfg.grid = {-6.0, 6.0, 241, 0.0, 2.0 * period, 81};
      cfg.ensemble = {40, Sampling::UniformSupport, -3.0, 3.0, 11};
      break;
    }
    case ScenarioKind::Talbot: {
      const double tau = 1.0 / std::numbers::pi;
      cfg.grid = {-1.5, 1.5, 301, 0.0, 2.0 * tau, 161};
      cfg.ensemble = {21, Sampling::UniformSupport, -0.45, 0.45, 3};
      break;
    }
    case ScenarioKind::NslitLadder: {
      const double t_far = 51.0 / 4.0;
      const double span = 1.5 * 2.0 * std::numbers::pi * t_far;
      cfg.grid = {-span, span, 241, 0.0, t_far, 33};
      cfg.ensemble = {1, Sampling::UniformSupport, -0.45, 0.45, 0};
      break;
    }
    case ScenarioKind::BoxDiffraction: {
      const double tau = 1.0 / (2.0 * std::numbers::pi);
      cfg.grid = {-0.5, 0.5, 241, 0.0, 2.0 * tau, 81};
      cfg.ensemble = {40, Sampling::UniformSupport, -0.3, 0.3, 5};
      break;
    }
    case ScenarioKind::Fractal: {
      cfg.grid = {0.0, 1.0, 241, 0.0, 0.2, 9};
      cfg.ensemble = {1, Sampling::UniformSupport, 0.3, 0.7, 0};
      break;
    }
    case ScenarioKind::Toymodel: {
      cfg.grid = {-30.0, 1.0, 241, 0.0, 20.0, 401};
      cfg.ensemble = {1, Sampling::UniformSupport, -1.0, 1.0, 0};
      break;
    }
  }
  return cfg;
}

std::string toolkit_version() { return "0.1.0"; }

}  // namespace qflow
