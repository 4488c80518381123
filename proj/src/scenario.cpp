#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "qflow/scenario.hpp"

namespace qflow {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kPi = std::numbers::pi;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

// 17 significant digits, '.' decimal, deterministic across runs.
std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

struct ArtifactSink {
  fs::path dir;
  std::vector<ArtifactEntry> entries;

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write artifact: " + path.string());
    out << content;
    out.close();
    entries.push_back({name, content.size(), sha256_hex(content)});
  }
};

std::vector<double> grid_times(const GridSpec& g) {
  std::vector<double> ts(g.nt);
  for (int j = 0; j < g.nt; ++j) ts[j] = g.t(j);
  return ts;
}

std::string trajectories_csv(const TrajectoryEnsemble& ens) {
  std::ostringstream out;
  out << "t";
  for (std::size_t i = 0; i < ens.paths.size(); ++i) out << ",path_" << i;
  out << "\n";
  for (std::size_t j = 0; j < ens.times.size(); ++j) {
    out << fmt(ens.times[j]);
    for (const auto& path : ens.paths) out << "," << fmt(path[j]);
    out << "\n";
  }
  return out.str();
}

std::string carpet_csv(const CarpetField& field) {
  std::ostringstream out;
  out << "t\\x";
  for (int i = 0; i < field.grid.nx; ++i) out << "," << fmt(field.grid.x(i));
  out << "\n";
  for (int j = 0; j < field.grid.nt; ++j) {
    out << fmt(field.grid.t(j));
    for (int i = 0; i < field.grid.nx; ++i) out << "," << fmt(field.at(j, i));
    out << "\n";
  }
  return out.str();
}

struct CheckList {
  std::vector<CheckResult> checks;

  void add(const std::string& name, bool passed, double value,
           double threshold, const std::string& detail = "") {
    checks.push_back({name, passed, value, threshold, detail});
  }
  void add_below(const std::string& name, double value, double threshold,
                 const std::string& detail = "") {
    add(name, value <= threshold, value, threshold, detail);
  }
};

double abort_fraction(const TrajectoryEnsemble& ens) {
  return ens.paths.empty()
             ? 0.0
             : static_cast<double>(ens.n_aborted()) / ens.paths.size();
}

void add_abort_check(CheckList& checks, const TrajectoryEnsemble& ens) {
  checks.add_below("node_abort_fraction", abort_fraction(ens), 0.05);
}

// --- model builders ---

SuperpositionSpec two_slit_model(const TwoSlitParams& p) {
  const Complex w(1.0 / std::numbers::sqrt2, 0.0);
  return {{{-p.d / 2, 0.0, p.sigma0, w}, {p.d / 2, 0.0, p.sigma0, w}}};
}

SuperpositionSpec counter_model(const CounterPropagatingParams& p,
                                const PhysicalConstants& c) {
  const double sigma_ref = std::max(p.sigma0_1, p.sigma0_2);
  const double v = p.v > 0.0 ? p.v : critical_speed(p.d, sigma_ref, c).v;
  const double norm = p.weight_1 + p.weight_2;
  return {{{-p.d / 2, +v, p.sigma0_1, Complex(std::sqrt(p.weight_1 / norm), 0)},
           {+p.d / 2, -v, p.sigma0_2,
            Complex(std::sqrt(p.weight_2 / norm), 0)}}};
}

HarmonicSpec harmonic_model(const HarmonicParams& p) {
  return make_harmonic(p.omega,
                       {{p.level_a, Complex(std::sqrt(p.weight_a), 0.0)},
                        {p.level_b, Complex(std::sqrt(p.weight_b), 0.0)}});
}

BoxSpec square_wave_model(double L, double w, int n_modes) {
  const auto c = square_wave_coefficients(L, w, n_modes);
  std::vector<Complex> cc(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) cc[i] = Complex(c[i], 0.0);
  return make_box_explicit(L, std::move(cc));
}

// Smooth fractal control: a centered gaussian expanded over the sine modes.
BoxSpec smooth_control_model(double L, double sigma0, int n_modes) {
  std::vector<Complex> cc(n_modes);
  for (int k = 0; k < n_modes; ++k) {
    const int n = k + 1;
    double acc = 0.0;
    const int steps = 2000;
    const double h = L / steps;
    for (int i = 0; i <= steps; ++i) {
      const double x = i * h;
      const double weight = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      const double phi = std::sqrt(2.0 / L) * std::sin(n * kPi * x / L);
      const double g = std::pow(2.0 * kPi * sigma0 * sigma0, -0.25) *
                       std::exp(-(x - L / 2) * (x - L / 2) /
                                (4.0 * sigma0 * sigma0));
      acc += weight * phi * g;
    }
    cc[k] = Complex(acc * h / 3.0, 0.0);
  }
  return make_box_explicit(L, std::move(cc));
}

// --- per-scenario runners ---

void run_two_slit(const ScenarioConfig& cfg, ArtifactSink& sink,
                  CheckList& checks) {
  const auto model = two_slit_model(cfg.two_slit);
  const ModelSpec m(model);

  IntegratorConfig icfg = cfg.integrator;
  icfg.save_times = grid_times(cfg.grid);
  const auto ens = run_ensemble(m, cfg.ensemble, icfg, cfg.constants);
  sink.write("trajectories.csv", trajectories_csv(ens));

  const auto carpet =
      density_carpet(m, cfg.grid, CarpetNorm::PerRowMax, cfg.constants);
  sink.write("carpet.csv", carpet_csv(carpet));

  const auto ordering = ordering_check(ens);
  checks.add("non_crossing", ordering.ok && ordering.violations == 0,
             ordering.violations, 0.0);

  int sign_flips = 0;
  for (std::size_t i = 0; i < ens.paths.size(); ++i) {
    if (ens.status[i] != PathStatus::Completed) continue;
    const double s0 = ens.paths[i][0];
    if (s0 == 0.0) continue;
    for (const double x : ens.paths[i])
      if (x * s0 < 0.0) {
        ++sign_flips;
        break;
      }
  }
  checks.add("mirror_confinement", sign_flips == 0, sign_flips, 0.0);

  double worst_im = 0.0;
  for (int i = 0; i < cfg.grid.nx; i += 4) {
    const auto w = eval_model(m, cfg.constants, cfg.grid.x(i), cfg.grid.t_min);
    const double a = std::abs(w.psi);
    if (a > 1e-12) worst_im = std::max(worst_im, std::abs(w.psi.imag()) / a);
  }
  checks.add_below("initial_state_real", worst_im, 1e-14);
  add_abort_check(checks, ens);
}

void run_counter_propagating(const ScenarioConfig& cfg, ArtifactSink& sink,
                             CheckList& checks) {
  const auto& p = cfg.counter_propagating;
  const auto model = counter_model(p, cfg.constants);
  const ModelSpec m(model);
  const double v = model.components[0].v;

  IntegratorConfig icfg = cfg.integrator;
  icfg.save_times = grid_times(cfg.grid);
  const auto ens = run_ensemble(m, cfg.ensemble, icfg, cfg.constants);
  sink.write("trajectories.csv", trajectories_csv(ens));

  const auto rep = exchange_diagnostics(ens, model, cfg.constants);
  const auto& snap = rep.final_snapshot();

  const bool equal_widths = std::abs(p.sigma0_1 - p.sigma0_2) < 1e-12;
  const bool equal_weights = std::abs(p.weight_1 - p.weight_2) < 1e-12;
  if (equal_widths && equal_weights) {
    checks.add_below("speed_exchange_left",
                     std::abs(snap.mean_v_left + v) / v, 0.05);
    checks.add_below("speed_exchange_right",
                     std::abs(snap.mean_v_right - v) / v, 0.05);
    checks.add("no_side_crossings",
               snap.crossings_left_to_right + snap.crossings_right_to_left == 0,
               snap.crossings_left_to_right + snap.crossings_right_to_left,
               0.0);
  } else if (!equal_weights) {
    const int migrations = p.weight_1 > p.weight_2
                               ? snap.crossings_left_to_right
                               : snap.crossings_right_to_left;
    checks.add("heavy_side_migration", migrations > 0, migrations, 1.0,
               "paths leaving the dominant packet");
  } else {
    const double T = ens.times.back();
    const double st1 =
        p.sigma0_1 * spreading_ratio(p.sigma0_1, T, cfg.constants);
    const double st2 =
        p.sigma0_2 * spreading_ratio(p.sigma0_2, T, cfg.constants);
    checks.add_below("spread_swap_left", std::abs(snap.spread_left - st2) / st2,
                     0.10);
    checks.add_below("spread_swap_right",
                     std::abs(snap.spread_right - st1) / st1, 0.10);
  }
  add_abort_check(checks, ens);
}

void run_harmonic(const ScenarioConfig& cfg, ArtifactSink& sink,
                  CheckList& checks) {
  const auto model = harmonic_model(cfg.harmonic_two_level);
  const ModelSpec m(model);

  const auto carpet =
      density_carpet(m, cfg.grid, CarpetNorm::Raw, cfg.constants);
  sink.write("carpet.csv", carpet_csv(carpet));

  IntegratorConfig icfg = cfg.integrator;
  icfg.save_times = grid_times(cfg.grid);
  const auto ens = run_ensemble(m, cfg.ensemble, icfg, cfg.constants);
  sink.write("trajectories.csv", trajectories_csv(ens));

  const double omega_rel =
      harmonic_relative_frequency(model, cfg.constants);
  const double period = 2.0 * kPi / omega_rel;
  double mismatch = 0.0;
  for (int i = 0; i < cfg.grid.nx; i += 2) {
    const double x = cfg.grid.x(i);
    const double a =
        std::norm(eval_model(m, cfg.constants, x, cfg.grid.t_min).psi);
    const double b = std::norm(
        eval_model(m, cfg.constants, x, cfg.grid.t_min + period).psi);
    mismatch = std::max(mismatch, std::abs(a - b));
  }
  checks.add_below("density_period_mismatch", mismatch, 1e-10);
  const auto ordering = ordering_check(ens);
  checks.add("non_crossing", ordering.ok, ordering.violations, 0.0);
  add_abort_check(checks, ens);
}

void run_talbot(const ScenarioConfig& cfg, ArtifactSink& sink,
                CheckList& checks) {
  const TalbotSpec spec =
      make_talbot(cfg.talbot.d, cfg.talbot.sigma0, cfg.talbot.nmax);
  const ModelSpec m(spec);
  const double tau = talbot_time(spec.d, cfg.constants);

  const auto carpet =
      density_carpet(m, cfg.grid, CarpetNorm::PerRowMax, cfg.constants);
  sink.write("carpet.csv", carpet_csv(carpet));

  IntegratorConfig icfg = cfg.integrator;
  icfg.save_times = grid_times(cfg.grid);
  const auto ens = run_ensemble(m, cfg.ensemble, icfg, cfg.constants);
  sink.write("trajectories.csv", trajectories_csv(ens));

  const auto rec = recurrence_report(m, cfg.constants);
  checks.add_below("recurrence_mismatch_full_period", rec.mismatch_full, 1e-8);
  checks.add_below("recurrence_mismatch_half_shift", rec.mismatch_half_shift,
                   1e-8);

  // quantized phases: omega_n tau_T must be exact multiples of 2 pi
  double worst_phase = 0.0;
  for (int n = 1; n <= spec.nmax; ++n) {
    const double wn = 2.0 * kPi * kPi * n * n * cfg.constants.hbar /
                      (cfg.constants.mass * spec.d * spec.d);
    worst_phase = std::max(
        worst_phase,
        std::abs(wn * tau - 2.0 * kPi * n * n) / (2.0 * kPi * n * n));
  }
  checks.add_below("mode_phase_quantization", worst_phase, 1e-13);

  const double half_cell = spec.d / 2;
  int escapes = 0;
  for (std::size_t i = 0; i < ens.paths.size(); ++i) {
    if (ens.status[i] != PathStatus::Completed) continue;
    for (const double x : ens.paths[i])
      if (std::abs(x) > half_cell + 1e-9 * spec.d) {
        ++escapes;
        break;
      }
  }
  checks.add("unit_cell_channeling", escapes == 0, escapes, 0.0);
  add_abort_check(checks, ens);
}

void run_nslit_ladder(const ScenarioConfig& cfg, ArtifactSink& sink,
                      CheckList& checks) {
  const auto& p = cfg.nslit_ladder;
  const auto& c = cfg.constants;

  const auto fraction_for = [&](int n_slits) {
    const ModelSpec m(make_nslit(n_slits, p.d, p.sigma0));
    const double t_far =
        p.t_far > 0.0 ? p.t_far : ladder_far_time(n_slits, p.d, c);
    const auto grid = ladder_grid(t_far, p.d, c, p.span_orders, p.n_points);
    const auto ladder = momentum_ladder(m, grid, t_far, p.d, c, p.skip_floor);
    return std::pair{ladder, plateau_fraction(ladder)};
  };

  const ModelSpec m(make_nslit(p.n_slits, p.d, p.sigma0));
  const double t_far =
      p.t_far > 0.0 ? p.t_far : ladder_far_time(p.n_slits, p.d, c);
  const auto [ladder, frac] = fraction_for(p.n_slits);

  std::ostringstream csv;
  csv << "x,p_normalized\n";
  for (const auto& pt : ladder)
    csv << fmt(pt.x) << ","
        << (pt.skipped ? "nan" : fmt(pt.p_normalized)) << "\n";
  sink.write("ladder.csv", csv.str());

  GridSpec carpet_grid = cfg.grid;
  carpet_grid.t_max = t_far;
  const auto carpet = density_carpet(m, carpet_grid, CarpetNorm::PerRowMax, c);
  sink.write("carpet.csv", carpet_csv(carpet));

  if (p.n_slits >= 51)
    checks.add("plateau_fraction", frac >= 0.60, frac, 0.60,
               "within 0.05 of an integer step");
  else
    checks.add("plateau_fraction", true, frac, 0.0, "reported");

  const double f3 = fraction_for(3).second;
  const double f11 = fraction_for(11).second;
  const double f51 = fraction_for(51).second;
  checks.add("plateau_fraction_monotone", f3 < f11 && f11 < f51, f51, 0.0,
             "N in {3, 11, 51}");
}

void run_box_diffraction(const ScenarioConfig& cfg, ArtifactSink& sink,
                         CheckList& checks) {
  const auto& p = cfg.box_diffraction;
  const auto& c = cfg.constants;
  const BoxSpec spec = make_box_gaussian(p.d, p.sigma0, p.nmax);
  const ModelSpec m(spec);

  const auto carpet = density_carpet(m, cfg.grid, CarpetNorm::PerRowMax, c);
  sink.write("carpet.csv", carpet_csv(carpet));

  IntegratorConfig icfg = cfg.integrator;
  icfg.save_times = grid_times(cfg.grid);
  const auto ens = run_ensemble(m, cfg.ensemble, icfg, c);
  sink.write("trajectories.csv", trajectories_csv(ens));

  const auto rec = recurrence_report(m, c);
  checks.add_below("recurrence_mismatch", rec.mismatch_full, 1e-8);

  const double tau_r = box_recurrence_time(p.d, c);
  const double tau_T = talbot_time(p.d, c);
  checks.add_below("recurrence_is_half_talbot_time",
                   std::abs(tau_r - tau_T / 2) / tau_r, 1e-15);
  checks.add("gaussian_fits_the_well", box_gaussian_edge_ok(p.d, p.sigma0),
             p.sigma0 / p.d, 0.125, "sigma0 <= d/8");
  const auto ordering = ordering_check(ens);
  checks.add("non_crossing", ordering.ok, ordering.violations, 0.0);
  add_abort_check(checks, ens);
}

void run_fractal(const ScenarioConfig& cfg, ArtifactSink& sink,
                 CheckList& checks) {
  const auto& p = cfg.fractal;
  const auto& c = cfg.constants;
  const double L = p.well_length;
  const int k_max = p.K_values.back();
  const double tau_r = box_recurrence_time(L, c);
  const double t = p.t > 0.0 ? p.t : tau_r / std::numbers::sqrt2;
  const int nx = p.nx > 0 ? p.nx : 32 * k_max;

  const BoxSpec base = square_wave_model(L, p.square_width, k_max);
  const auto series = density_length_series(base, p.K_values, t, nx, c);

  std::ostringstream csv;
  csv << "K,L\n";
  for (std::size_t i = 0; i < series.K.size(); ++i)
    csv << series.K[i] << "," << fmt(series.L[i]) << "\n";
  sink.write("scaling.csv", csv.str());

  const auto est = fractal_dimension(series);
  json dim;
  dim["D_f"] = est.D_f;
  dim["slope_stderr"] = est.slope_stderr;
  dim["r_squared"] = est.r_squared;
  dim["snapshot_time"] = t;
  dim["samples_per_mode"] = static_cast<double>(nx) / k_max;
  sink.write("dimension.json", dim.dump(2) + "\n");

  checks.add("fractal_dimension_in_band", est.D_f >= 1.4 && est.D_f <= 1.6,
             est.D_f, 1.5, "[1.4, 1.6]");
  checks.add("fit_r_squared", est.r_squared > 0.98, est.r_squared, 0.98);
  bool all_conv = true;
  for (const bool b : series.converged) all_conv &= b;
  checks.add("lengths_sampling_converged", all_conv, all_conv ? 1.0 : 0.0, 1.0);

  // smooth control: a differentiable state must stay at dimension one
  const BoxSpec smooth = smooth_control_model(L, L / 10.0, 64);
  std::vector<int> control_K{4, 8, 16, 32, 64};
  const auto control_series =
      density_length_series(smooth, control_K, t, 4096, c);
  const auto control_est = fractal_dimension(control_series);
  checks.add("smooth_control_dimension",
             control_est.D_f > 0.95 && control_est.D_f < 1.05, control_est.D_f,
             1.0, "[0.95, 1.05]");
}

void run_toymodel(const ScenarioConfig& cfg, ArtifactSink& sink,
                  CheckList& checks) {
  const auto& p = cfg.toymodel;
  ToyParams params;
  for (const auto& [name, preset] : toy_presets())
    if (name == p.preset) params = preset;
  params.constants = cfg.constants;

  std::ostringstream csv;
  csv << "t,x_min,V0\n";
  double worst_identity = 0.0;
  for (int i = 0; i < p.nt; ++i) {
    const double t = p.t_max * i / (p.nt - 1);
    const auto g = well_geometry(params, t);
    csv << fmt(t) << "," << fmt(g.x_min) << "," << fmt(g.V0) << "\n";
    const double target =
        2.0 * cfg.constants.hbar * cfg.constants.hbar / cfg.constants.mass;
    worst_identity = std::max(
        worst_identity,
        std::abs(g.V0 * g.x_min * g.x_min - target) / target);
  }
  sink.write("toymodel.csv", csv.str());

  checks.add_below("depth_width_identity", worst_identity, 1e-12);

  const double x0_edge = well_geometry(params, 0.0).x_min;
  const double want = kPi * cfg.constants.hbar / (2.0 * params.p);
  checks.add_below("initial_edge_identity",
                   std::abs(x0_edge - want) / std::abs(want), 1e-12);

  // regime contrast across the built-in presets
  const auto scan = [&](ToyParams q) {
    q.constants = cfg.constants;
    double min_width = 1e300, max_depth = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const auto g = well_geometry(q, p.t_max * i / 400.0);
      min_width = std::min(min_width, std::abs(g.x_min));
      max_depth = std::max(max_depth, g.V0);
    }
    return std::pair{min_width, max_depth};
  };
  const auto presets = toy_presets();
  const auto [young_w, young_d] = scan(presets.front().second);
  const auto [fast_w, fast_d] = scan(presets.back().second);
  checks.add("regime_contrast_width", young_w > fast_w, young_w / fast_w, 1.0,
             "young-like well is wider");
  checks.add("regime_contrast_depth", young_d < fast_d, fast_d / young_d, 1.0,
             "fast-packet well is deeper");
}

}  // namespace

RunManifest run_manifest(const ScenarioConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  validate(cfg.constants);
  validate(cfg.grid);

  ArtifactSink sink;
  sink.dir = cfg.output_dir;
  fs::create_directories(sink.dir);

  const std::string config_echo = print_config(cfg);
  sink.write("config.json", config_echo);

  CheckList checks;
  switch (cfg.scenario) {
    case ScenarioKind::TwoSlit: run_two_slit(cfg, sink, checks); break;
    case ScenarioKind::CounterPropagating:
      run_counter_propagating(cfg, sink, checks);
      break;
    case ScenarioKind::HarmonicTwoLevel: run_harmonic(cfg, sink, checks); break;
    case ScenarioKind::Talbot: run_talbot(cfg, sink, checks); break;
    case ScenarioKind::NslitLadder: run_nslit_ladder(cfg, sink, checks); break;
    case ScenarioKind::BoxDiffraction:
      run_box_diffraction(cfg, sink, checks);
      break;
    case ScenarioKind::Fractal: run_fractal(cfg, sink, checks); break;
    case ScenarioKind::Toymodel: run_toymodel(cfg, sink, checks); break;
  }

  RunManifest manifest;
  manifest.version = toolkit_version();
  manifest.scenario = to_string(cfg.scenario);
  manifest.seed = cfg.ensemble.seed;
  manifest.output_dir = cfg.output_dir;
  manifest.config_json = config_echo;
  manifest.checks = checks.checks;
  manifest.all_passed = true;
  for (const auto& chk : manifest.checks) manifest.all_passed &= chk.passed;
  for (const auto& chk : manifest.checks)
    if (chk.name == "node_abort_fraction") manifest.node_abort_fraction = chk.value;

  json checks_json;
  checks_json["all_passed"] = manifest.all_passed;
  checks_json["node_abort_fraction"] = manifest.node_abort_fraction;
  checks_json["checks"] = json::array();
  for (const auto& chk : manifest.checks) {
    json c;
    c["name"] = chk.name;
    c["passed"] = chk.passed;
    c["value"] = std::isfinite(chk.value) ? json(chk.value) : json(fmt(chk.value));
    c["threshold"] = chk.threshold;
    if (!chk.detail.empty()) c["detail"] = chk.detail;
    checks_json["checks"].push_back(c);
  }
  sink.write("checks.json", checks_json.dump(2) + "\n");

  manifest.artifacts = sink.entries;
  manifest.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  json mj;
  mj["toolkit"] = "qflow";
  mj["version"] = manifest.version;
  mj["scenario"] = manifest.scenario;
  mj["seed"] = manifest.seed;
  mj["all_passed"] = manifest.all_passed;
  mj["config"] = json::parse(config_echo);
  mj["artifacts"] = json::array();
  for (const auto& a : manifest.artifacts)
    mj["artifacts"].push_back(
        {{"file", a.file}, {"bytes", a.bytes}, {"sha256", a.sha256}});
  mj["duration_seconds"] = manifest.duration_seconds;
  {
    const fs::path path = sink.dir / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write manifest: " + path.string());
    out << mj.dump(2) << "\n";
  }
  return manifest;
}

RunManifest run_scenario(const ScenarioConfig& cfg) { return run_manifest(cfg); }

}  // namespace qflow
