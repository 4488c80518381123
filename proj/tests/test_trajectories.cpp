#include "qflow/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support.hpp"

using namespace qflow;
using qflow::test::Rng;

namespace {

constexpr double kPi = std::numbers::pi;
const PhysicalConstants kNat{};

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

IntegratorConfig default_cfg(double t0, double t1, int n_save = 41) {
  IntegratorConfig cfg;
  cfg.save_times = linspace(t0, t1, n_save);
  return cfg;
}

const SuperpositionSpec kTwoSlit{{{-5.0, 0.0, 1.0, Complex(1.0, 0.0)},
                                  {5.0, 0.0, 1.0, Complex(1.0, 0.0)}}};

SuperpositionSpec counter_propagating(double s1, double s2, double w1,
                                      double w2, double d, double v) {
  return {{{-d / 2, +v, s1, Complex(std::sqrt(w1), 0.0)},
           {+d / 2, -v, s2, Complex(std::sqrt(w2), 0.0)}}};
}

// Talbot guidance velocity written as the explicit double sum over momentum
// components, independent of the generic Im(psi'/psi) route.
double talbot_velocity_double_sum(const TalbotSpec& s,
                                  const PhysicalConstants& c, double x,
                                  double t) {
  double num = 0.0, den = 0.0;
  for (int i = -s.nmax; i <= s.nmax; ++i) {
    const double pi_ = 2.0 * kPi * i * c.hbar / s.d;
    const double wi = pi_ * pi_ / (2.0 * c.mass * c.hbar);
    const double ai = s.coeff[std::abs(i)];
    for (int j = -s.nmax; j <= s.nmax; ++j) {
      const double pj = 2.0 * kPi * j * c.hbar / s.d;
      const double wj = pj * pj / (2.0 * c.mass * c.hbar);
      const double aj = s.coeff[std::abs(j)];
      const double phase = (pi_ - pj) * x / c.hbar - (wi - wj) * t;
      num += pi_ * ai * aj * std::cos(phase);
      den += ai * aj * std::cos(phase);
    }
  }
  return num / (c.mass * den);
}

}  // namespace

TEST_CASE("drifting packet starts with its drift velocity everywhere") {
  const ModelSpec m(GaussianSpec{1.0, 0.8, 0.9, Complex(1.0, 0.0)});
  for (double x : {-3.0, 0.0, 1.0, 4.5})
    CHECK(velocity_at(m, x, 0.0, kNat) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("symmetric pair starts at rest") {
  const ModelSpec m(kTwoSlit);
  for (double x : {-6.0, -2.0, 0.0, 3.0, 7.0})
    CHECK(std::abs(velocity_at(m, x, 0.0, kNat)) < 1e-12);
  // far out in the dead zone the guidance field is undefined
  CHECK_THROWS_AS(velocity_at(m, 600.0, 0.0, kNat, 1e-12), NodeError);
}

TEST_CASE("talbot guidance matches the explicit double-sum form") {
  const TalbotSpec spec = make_talbot(1.0, 0.125);
  const ModelSpec m(spec);
  Rng rng(42);
  for (int k = 0; k < 100; ++k) {
    const double x = rng.uniform(-0.5, 0.5);
    const double t = rng.uniform(0.0, 0.6);
    const double v_generic = velocity_at(m, x, t, kNat);
    const double v_sum = talbot_velocity_double_sum(spec, kNat, x, t);
    CHECK(std::abs(v_generic - v_sum) <=
          1e-10 * std::max(std::abs(v_generic), 1e-3));
  }
}

TEST_CASE("free packet trajectories follow x0 * sigma_t/sigma0") {
  const double s0 = 1.0;
  const ModelSpec m(GaussianSpec{0.0, 0.0, s0, Complex(1.0, 0.0)});
  const auto cfg = default_cfg(0.0, 4.0);

  // The closed form solves dx/dt = (sigma_t'/sigma_t) x: check it against
  // the guidance field by finite differences before trusting it.
  const double x_probe = 0.7, t_probe = 1.3;
  const auto closed = [&](double t) {
    return x_probe * spreading_ratio(s0, t, kNat) /
           spreading_ratio(s0, t_probe, kNat);
  };
  const double dt = 1e-6;
  const double lhs = (closed(t_probe + dt) - closed(t_probe - dt)) / (2 * dt);
  const double rhs = velocity_at(m, closed(t_probe), t_probe, kNat);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-7));

  for (double x0 : {-2.0, -0.5, 0.4, 1.5}) {
    const Trajectory traj = integrate(m, x0, cfg, kNat);
    REQUIRE(traj.status == PathStatus::Completed);
    for (std::size_t j = 0; j < traj.times.size(); ++j) {
      const double want = x0 * spreading_ratio(s0, traj.times[j], kNat);
      CHECK(traj.positions[j] ==
            doctest::Approx(want).epsilon(1e-6));
    }
  }
}

TEST_CASE("drifting packet trajectories are the boosted free solution") {
  const double s0 = 0.8, u = 1.4, xc = -1.0;
  const ModelSpec m(GaussianSpec{xc, u, s0, Complex(1.0, 0.0)});
  const auto cfg = default_cfg(0.0, 3.0);
  for (double x0 : {-2.2, -1.0, 0.2}) {
    const Trajectory traj = integrate(m, x0, cfg, kNat);
    REQUIRE(traj.status == PathStatus::Completed);
    for (std::size_t j = 0; j < traj.times.size(); ++j) {
      const double t = traj.times[j];
      const double want =
          xc + u * t + (x0 - xc) * spreading_ratio(s0, t, kNat);
      CHECK(traj.positions[j] == doctest::Approx(want).epsilon(1e-6));
    }
  }
}

TEST_CASE("plane-wave trajectories are straight lines") {
  const ModelSpec m(PlaneWaveSpec{1.3});
  const auto cfg = default_cfg(0.0, 2.0);
  const Trajectory traj = integrate(m, 0.25, cfg, kNat);
  for (std::size_t j = 0; j < traj.times.size(); ++j)
    CHECK(std::abs(traj.positions[j] - (0.25 + 1.3 * traj.times[j])) < 1e-10);
}

TEST_CASE("uniform sampling is inclusive and equally spaced") {
  EnsembleSpec spec{5, Sampling::UniformSupport, 0.0, 1.0, 0};
  const auto xs = sample_initial(spec, ModelSpec(PlaneWaveSpec{1.0}), 0.0, kNat);
  REQUIRE(xs.size() == 5);
  const double want[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (int i = 0; i < 5; ++i) CHECK(xs[i] == doctest::Approx(want[i]));
}

TEST_CASE("density-weighted sampling is symmetric on average") {
  const ModelSpec m(GaussianSpec{0.0, 0.0, 1.0, Complex(1.0, 0.0)});
  EnsembleSpec spec{4000, Sampling::DensityWeighted, -6.0, 6.0, 91};
  const auto xs = sample_initial(spec, m, 0.0, kNat);
  double mean = 0.0, var = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= (xs.size() - 1);
  const double stderr_mean = std::sqrt(var / xs.size());
  CHECK(std::abs(mean) < 3.0 * stderr_mean);
}

TEST_CASE("density-weighted histogram tracks the density") {
  const ModelSpec m(GaussianSpec{0.0, 0.0, 1.0, Complex(1.0, 0.0)});
  EnsembleSpec spec{20000, Sampling::DensityWeighted, -6.0, 6.0, 45};
  const auto xs = sample_initial(spec, m, 0.0, kNat);

  constexpr int n_bins = 50;
  const double lo = -5.0, hi = 5.0, w = (hi - lo) / n_bins;
  std::vector<double> hist(n_bins, 0.0);
  int kept = 0;
  for (double x : xs) {
    const int b = static_cast<int>((x - lo) / w);
    if (b >= 0 && b < n_bins) {
      hist[b] += 1.0;
      ++kept;
    }
  }
  double sup = 0.0;
  for (int b = 0; b < n_bins; ++b) {
    const double a = lo + b * w, bb = a + w;
    const double mass = qflow::test::simpson(
        [&](double x) { return std::norm(eval_model(m, kNat, x, 0.0).psi); },
        a, bb, 64);
    const double model_density = mass / w;
    const double sample_density = hist[b] / (xs.size() * w);
    sup = std::max(sup, std::abs(model_density - sample_density));
  }
  CHECK(kept > 19990);
  CHECK(sup < 0.02);
}

TEST_CASE("no mass in the support raises DomainError") {
  const ModelSpec m(GaussianSpec{0.0, 0.0, 0.1, Complex(1.0, 0.0)});
  EnsembleSpec spec{10, Sampling::DensityWeighted, 500.0, 501.0, 3};
  CHECK_THROWS_AS(sample_initial(spec, m, 0.0, kNat), DomainError);
}

TEST_CASE("two-slit ensemble stays inside its mirror domain") {
  const ModelSpec m(kTwoSlit);
  EnsembleSpec spec{60, Sampling::UniformSupport, -9.0, 9.0, 7};
  const auto cfg = default_cfg(0.0, 8.0, 33);
  const auto ens = run_ensemble(m, spec, cfg, kNat);
  CHECK(ens.n_aborted() == 0);
  for (std::size_t i = 0; i < ens.paths.size(); ++i) {
    const double sign0 = ens.paths[i][0] < 0 ? -1.0 : 1.0;
    if (ens.paths[i][0] == 0.0) continue;
    for (double x : ens.paths[i]) CHECK(sign0 * x >= 0.0);
  }
  const auto rep = ordering_check(ens);
  CHECK(rep.ok);
  CHECK(rep.violations == 0);
}

TEST_CASE("one-trajectory ensemble equals a direct integration") {
  const ModelSpec m(kTwoSlit);
  EnsembleSpec spec{1, Sampling::UniformSupport, -5.5, -5.5 + 1e-12, 0};
  const auto cfg = default_cfg(0.0, 4.0);
  const auto ens = run_ensemble(m, spec, cfg, kNat);
  const auto traj = integrate(m, ens.paths[0][0], cfg, kNat);
  for (std::size_t j = 0; j < cfg.save_times.size(); ++j)
    CHECK(ens.paths[0][j] == traj.positions[j]);
}

TEST_CASE("mirror-symmetric starts give mirror-image paths") {
  const ModelSpec m(kTwoSlit);
  const auto cfg = default_cfg(0.0, 6.0);
  for (double x0 : {1.5, 3.0, 5.0, 6.5}) {
    const auto right = integrate(m, x0, cfg, kNat);
    const auto left = integrate(m, -x0, cfg, kNat);
    REQUIRE(right.status == PathStatus::Completed);
    for (std::size_t j = 0; j < right.times.size(); ++j)
      CHECK(std::abs(right.positions[j] + left.positions[j]) < 1e-8);
  }
}

TEST_CASE("ordering check flags a corrupted ensemble") {
  const ModelSpec m(GaussianSpec{0.0, 0.0, 1.0, Complex(1.0, 0.0)});
  EnsembleSpec spec{8, Sampling::UniformSupport, -2.0, 2.0, 0};
  const auto cfg = default_cfg(0.0, 2.0, 9);
  auto ens = run_ensemble(m, spec, cfg, kNat);
  CHECK(ordering_check(ens).ok);
  // Swap two paths from the first saved step on; the initial order no
  // longer matches the evolution.
  for (std::size_t j = 1; j < ens.times.size(); ++j)
    std::swap(ens.paths[2][j], ens.paths[5][j]);
  const auto rep = ordering_check(ens);
  CHECK_FALSE(rep.ok);
  CHECK(rep.first_time == doctest::Approx(ens.times[1]));
}

TEST_CASE("trajectories ignore constant and time-dependent global phases") {
  const ModelSpec m(kTwoSlit);
  const auto cfg = default_cfg(0.0, 6.0, 25);
  const double x0 = -4.3;
  const auto base = integrate(m, x0, cfg, kNat);

  Rng rng(5150);
  const FlowField plain = model_flow(m, kNat);
  for (int k = 0; k < 20; ++k) {
    const double alpha = rng.uniform(0.0, 2.0 * kPi);
    const FlowField rotated = [&, alpha](double x, double t) -> FieldPoint {
      const WaveSample w = eval_model(m, kNat, x, t);
      const Complex rot = std::polar(1.0, alpha);
      const WaveSample wr{w.psi * rot, w.dpsi * rot, w.d2psi * rot};
      const double rho = std::norm(wr.psi);
      return {(wr.dpsi / wr.psi).imag(), rho};
    };
    const auto traj = integrate_field(rotated, x0, cfg);
    for (std::size_t j = 0; j < traj.times.size(); ++j) {
      const double tol = 10.0 * (cfg.rtol * std::abs(base.positions[j]) +
                                 cfg.atol);
      CHECK(std::abs(traj.positions[j] - base.positions[j]) <= tol);
    }
  }

  const FlowField cubic_phase = [&](double x, double t) -> FieldPoint {
    const WaveSample w = eval_model(m, kNat, x, t);
    const Complex rot = std::polar(1.0, t * t * t);
    const WaveSample wr{w.psi * rot, w.dpsi * rot, w.d2psi * rot};
    return {(wr.dpsi / wr.psi).imag(), std::norm(wr.psi)};
  };
  const auto traj = integrate_field(cubic_phase, x0, cfg);
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    const double tol =
        10.0 * (cfg.rtol * std::abs(base.positions[j]) + cfg.atol);
    CHECK(std::abs(traj.positions[j] - base.positions[j]) <= tol);
  }
  (void)plain;
}

TEST_CASE("halving the tolerances moves saved positions by less than 10x tol") {
  const ModelSpec m(kTwoSlit);
  auto cfg = default_cfg(0.0, 8.0, 17);
  auto tight = cfg;
  tight.rtol /= 2.0;
  tight.atol /= 2.0;

  std::vector<Trajectory> loose, fine;
  double x_scale = 0.0;
  for (double x0 : {-6.0, -4.4, -1.2, 3.3, 7.0}) {
    loose.push_back(integrate(m, x0, cfg, kNat));
    fine.push_back(integrate(m, x0, tight, kNat));
    for (double x : loose.back().positions)
      x_scale = std::max(x_scale, std::abs(x));
  }
  // tolerance at the coordinate scale of the run
  const double tol = 10.0 * (cfg.rtol * x_scale + cfg.atol);
  for (std::size_t i = 0; i < loose.size(); ++i)
    for (std::size_t j = 0; j < loose[i].times.size(); ++j)
      CHECK(std::abs(loose[i].positions[j] - fine[i].positions[j]) <= tol);
}

TEST_CASE("a path crossing the density floor aborts with a flag") {
  // Synthetic field whose density collapses at t = 1 regardless of x.
  const FlowField dying = [](double, double t) -> FieldPoint {
    return {0.5, std::max(0.0, 1.0 - t)};
  };
  IntegratorConfig cfg;
  cfg.save_times = linspace(0.0, 2.0, 21);
  cfg.density_floor = 1e-6;
  cfg.max_step = 0.05;
  const auto traj = integrate_field(dying, 0.0, cfg);
  CHECK(traj.status == PathStatus::NodeAbort);
  CHECK(traj.abort_time > 0.5);
  CHECK(traj.abort_time < 1.1);
  bool saw_nan = false;
  for (double x : traj.positions) saw_nan |= std::isnan(x);
  CHECK(saw_nan);
}

TEST_CASE("exchange diagnostics: equal packets swap their velocities") {
  const double s0 = 1.0, d = 20.0;
  const double v = critical_speed(d, s0, kNat).v;
  const auto model = counter_propagating(s0, s0, 0.5, 0.5, d, v);
  const double T = 2.0 * d / v;

  EnsembleSpec spec{600, Sampling::DensityWeighted, -d / 2 - 5 * s0,
                    d / 2 + 5 * s0, 1234};
  IntegratorConfig cfg;
  cfg.save_times = linspace(0.0, 1.25 * T, 26);
  const auto ens = run_ensemble(ModelSpec(model), spec, cfg, kNat);
  const auto rep = exchange_diagnostics(ens, model, kNat);

  CHECK(rep.symmetry_line == doctest::Approx(0.0));
  CHECK(rep.n_aborted == 0);

  // Snapshot nearest to the nominal evaluation time 2 d / v.
  std::size_t j_eval = 0;
  for (std::size_t j = 0; j < rep.history.size(); ++j)
    if (std::abs(rep.history[j].time - T) <
        std::abs(rep.history[j_eval].time - T))
      j_eval = j;
  const auto& snap = rep.history[j_eval];
  CHECK(std::abs(snap.mean_v_left - (-v)) <= 0.05 * v);
  CHECK(std::abs(snap.mean_v_right - (+v)) <= 0.05 * v);
  CHECK(snap.crossings_left_to_right == 0);
  CHECK(snap.crossings_right_to_left == 0);

  // The exchange conclusion is stable against the evaluation-time choice.
  const auto& last = rep.history.back();
  CHECK(std::abs(last.mean_v_left - (-v)) <= 0.05 * v);
  CHECK(std::abs(last.mean_v_right - (+v)) <= 0.05 * v);
}

TEST_CASE("exchange diagnostics: unequal widths swap the spreadings") {
  const double s1 = 1.0, s2 = 1.5, d = 30.0;
  const double v = critical_speed(d, s2, kNat).v;
  const auto model = counter_propagating(s1, s2, 0.5, 0.5, d, v);
  const double T = 2.0 * d / v;

  EnsembleSpec spec{1500, Sampling::DensityWeighted, -d / 2 - 5 * s2,
                    d / 2 + 5 * s2, 777};
  IntegratorConfig cfg;
  cfg.save_times = linspace(0.0, T, 11);
  const auto ens = run_ensemble(ModelSpec(model), spec, cfg, kNat);
  const auto rep = exchange_diagnostics(ens, model, kNat);
  const auto& snap = rep.history.back();

  const double st1 = s1 * spreading_ratio(s1, T, kNat);
  const double st2 = s2 * spreading_ratio(s2, T, kNat);
  CHECK(std::abs(snap.spread_left - st2) <= 0.10 * st2);
  CHECK(std::abs(snap.spread_right - st1) <= 0.10 * st1);
}

TEST_CASE("exchange diagnostics: unequal weights trade trajectories") {
  const double s0 = 1.0, d = 20.0;
  const double v = critical_speed(d, s0, kNat).v;
  const auto model = counter_propagating(s0, s0, 0.8, 0.2, d, v);
  const double T = 2.0 * d / v;

  EnsembleSpec spec{600, Sampling::DensityWeighted, -d / 2 - 5 * s0,
                    d / 2 + 5 * s0, 4242};
  IntegratorConfig cfg;
  cfg.save_times = linspace(0.0, T, 9);
  const auto ens = run_ensemble(ModelSpec(model), spec, cfg, kNat);
  const auto rep = exchange_diagnostics(ens, model, kNat);
  CHECK(rep.history.back().crossings_left_to_right > 0);

  const SuperpositionSpec three{{{-1.0, 0.0, 1.0, Complex(1.0, 0.0)},
                                 {0.0, 0.0, 1.0, Complex(1.0, 0.0)},
                                 {1.0, 0.0, 1.0, Complex(1.0, 0.0)}}};
  CHECK_THROWS_AS(exchange_diagnostics(ens, three, kNat), ArityError);
}

TEST_CASE("talbot trajectories stay channeled inside their unit cell") {
  const TalbotSpec spec = make_talbot(1.0, 0.125);
  const ModelSpec m(spec);
  const double tau = talbot_time(spec.d, kNat);
  EnsembleSpec ens_spec{21, Sampling::UniformSupport, -0.45, 0.45, 3};
  IntegratorConfig cfg;
  cfg.save_times = linspace(0.0, 2.0 * tau, 81);
  const auto ens = run_ensemble(m, ens_spec, cfg, kNat);
  CHECK(ens.n_aborted() == 0);
  for (const auto& path : ens.paths)
    for (double x : path) {
      CHECK(x >= -0.5 - 1e-9);
      CHECK(x <= 0.5 + 1e-9);
    }
}

TEST_CASE("ensembles are bit-identical for any worker count") {
  const ModelSpec m(kTwoSlit);
  EnsembleSpec spec{40, Sampling::DensityWeighted, -9.0, 9.0, 555};
  const auto cfg = default_cfg(0.0, 4.0, 17);

  setenv("QFLOW_THREADS", "1", 1);
  const auto serial = run_ensemble(m, spec, cfg, kNat);
  setenv("QFLOW_THREADS", "7", 1);
  const auto parallel = run_ensemble(m, spec, cfg, kNat);
  unsetenv("QFLOW_THREADS");

  REQUIRE(serial.paths.size() == parallel.paths.size());
  for (std::size_t i = 0; i < serial.paths.size(); ++i)
    for (std::size_t j = 0; j < serial.times.size(); ++j)
      CHECK(serial.paths[i][j] == parallel.paths[i][j]);
}

TEST_CASE("density transport: the ensemble histogram follows rho(., T)") {
  const double T = 2.0;
  const ModelSpec m(GaussianSpec{0.0, 0.0, 1.0, Complex(1.0, 0.0)});
  EnsembleSpec spec{20000, Sampling::DensityWeighted, -6.0, 6.0, 2029};
  IntegratorConfig cfg;
  cfg.save_times = {0.0, T / 2, T};
  const auto ens = run_ensemble(m, spec, cfg, kNat);
  CHECK(ens.n_aborted() == 0);

  const double st = spreading_ratio(1.0, T, kNat);
  constexpr int n_bins = 50;
  const double lo = -5.0 * st, hi = 5.0 * st, w = (hi - lo) / n_bins;
  std::vector<double> hist(n_bins, 0.0);
  for (const auto& path : ens.paths) {
    const int b = static_cast<int>((path.back() - lo) / w);
    if (b >= 0 && b < n_bins) hist[b] += 1.0;
  }
  double sup = 0.0;
  for (int b = 0; b < n_bins; ++b) {
    const double a = lo + b * w;
    const double mass = qflow::test::simpson(
        [&](double x) { return std::norm(eval_model(m, kNat, x, T).psi); }, a,
        a + w, 64);
    sup = std::max(sup,
                   std::abs(mass / w - hist[b] / (spec.n_traj * w)));
  }
  CHECK(sup < 0.03);
}
