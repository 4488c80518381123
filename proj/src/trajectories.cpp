#include "qflow/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <random>
#include <thread>

namespace qflow {

int TrajectoryEnsemble::n_aborted() const {
  return static_cast<int>(
      std::count(status.begin(), status.end(), PathStatus::NodeAbort));
}

FlowField model_flow(const ModelSpec& m, const PhysicalConstants& c) {
  return [m, c](double x, double t) -> FieldPoint {
    const WaveSample w = eval_model(m, c, x, t);
    const double rho = std::norm(w.psi);
    if (!(rho > 0.0)) return {0.0, 0.0};
    return {(c.hbar / c.mass) * (w.dpsi / w.psi).imag(), rho};
  };
}

double velocity_at(const ModelSpec& m, double x, double t,
                   const PhysicalConstants& c, double density_floor) {
  const WaveSample w = eval_model(m, c, x, t);
  const double rho = std::norm(w.psi);
  if (!(rho >= density_floor))
    throw NodeError("velocity_at: density below floor");
  return (c.hbar / c.mass) * (w.dpsi / w.psi).imag();
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

struct DenseSegment {
  double t0, h;
  double r1, r2, r3, r4, r5;
  double eval(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
};

}  // namespace

Trajectory integrate_field(const FlowField& f, double x0,
                           const IntegratorConfig& cfg) {
  const auto& ts = cfg.save_times;
  if (ts.size() < 1) throw ValidationError("integrate: empty save_times");
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (!(ts[i] > ts[i - 1]))
      throw ValidationError("integrate: save_times must increase strictly");
  if (!(cfg.rtol > 0.0) || !(cfg.atol > 0.0))
    throw ValidationError("integrate: tolerances must be positive");

  Trajectory out;
  out.times = ts;
  out.positions.assign(ts.size(), std::numeric_limits<double>::quiet_NaN());
  out.positions[0] = x0;
  if (ts.size() == 1) return out;

  const double t_end = ts.back();
  const double span = t_end - ts.front();
  double t = ts.front();
  double x = x0;
  double rho_max = 0.0;

  const auto rhs = [&](double xx, double tt) -> std::optional<FieldPoint> {
    const FieldPoint p = f(xx, tt);
    if (!std::isfinite(p.v) || !std::isfinite(p.rho)) return std::nullopt;
    if (p.rho < cfg.density_floor * rho_max || p.rho <= 0.0)
      return std::nullopt;
    return p;
  };

  const FieldPoint p0 = f(x0, t);
  rho_max = p0.rho;
  auto v0 = rhs(x0, t);
  if (!v0) {
    out.status = PathStatus::NodeAbort;
    out.abort_time = t;
    return out;
  }

  const auto abort_at = [&](double ta) {
    out.status = PathStatus::NodeAbort;
    out.abort_time = ta;
  };

  double k1 = v0->v;
  const double sc0 = cfg.atol + cfg.rtol * std::abs(x0);
  double h = 0.01 * sc0 / std::max(std::abs(k1), sc0 / span);
  h = std::min({h, cfg.max_step, span / 10.0});
  h = std::max(h, 1e-12 * span);

  std::size_t next_save = 1;
  const double h_min = 1e-14 * std::max(1.0, std::abs(t_end));
  long steps = 0;
  constexpr long max_steps = 50'000'000;

  while (t < t_end) {
    if (++steps > max_steps)
      throw Error("integrate: step limit exceeded");
    h = std::min(h, t_end - t);
    if (h < h_min) {
      abort_at(t);
      return out;
    }

    const auto stage2 = rhs(x + h * a21 * k1, t + c2 * h);
    const auto stage3 =
        stage2 ? rhs(x + h * (a31 * k1 + a32 * stage2->v), t + c3 * h)
               : std::nullopt;
    const double k2 = stage2 ? stage2->v : 0.0;
    const double k3 = stage3 ? stage3->v : 0.0;
    const auto stage4 =
        stage3 ? rhs(x + h * (a41 * k1 + a42 * k2 + a43 * k3), t + c4 * h)
               : std::nullopt;
    const double k4 = stage4 ? stage4->v : 0.0;
    const auto stage5 =
        stage4 ? rhs(x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4),
                     t + c5 * h)
               : std::nullopt;
    const double k5 = stage5 ? stage5->v : 0.0;
    const auto stage6 =
        stage5 ? rhs(x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 +
                              a65 * k5),
                     t + h)
               : std::nullopt;
    const double k6 = stage6 ? stage6->v : 0.0;
    double x_new = 0.0;
    std::optional<FieldPoint> stage7;
    if (stage6) {
      x_new = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      stage7 = rhs(x_new, t + h);
    }
    if (!stage7) {
      // A stage probed past a node. Shrink and retry; give up once the step
      // has collapsed.
      h *= 0.5;
      if (h < h_min) {
        abort_at(t);
        return out;
      }
      continue;
    }
    const double k7 = stage7->v;

    const double err_raw =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double sc =
        cfg.atol + cfg.rtol * std::max(std::abs(x), std::abs(x_new));
    const double err = std::abs(err_raw) / sc;

    if (err <= 1.0) {
      DenseSegment seg;
      seg.t0 = t;
      seg.h = h;
      seg.r1 = x;
      seg.r2 = x_new - x;
      seg.r3 = h * k1 - seg.r2;
      seg.r4 = seg.r2 - h * k7 - seg.r3;
      seg.r5 =
          h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      const double t_new = t + h;
      while (next_save < ts.size() && ts[next_save] <= t_new + 1e-14 * span) {
        out.positions[next_save] =
            ts[next_save] >= t_new ? x_new : seg.eval(ts[next_save]);
        ++next_save;
      }
      t = t_new;
      x = x_new;
      k1 = k7;  // FSAL
      rho_max = std::max(rho_max, stage7->rho);
      if (next_save >= ts.size()) break;
    }
    const double factor =
        err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
    h = std::min({h * factor, cfg.max_step, span});
  }
  return out;
}

double suggested_max_step(const ModelSpec& m, const PhysicalConstants& c) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto cap_from = [&](double dp_max, double v_char) {
    if (!(dp_max > 0.0) || !(v_char > 0.0)) return inf;
    const double fringe = 2.0 * std::numbers::pi * c.hbar / dp_max;
    return fringe / v_char / 8.0;
  };

  return std::visit(
      [&](const auto& spec) -> double {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, SuperpositionSpec>) {
          if (spec.components.size() < 2) return inf;
          double dp_max = 0.0, v_char = 0.0;
          for (std::size_t i = 0; i < spec.components.size(); ++i) {
            const auto& a = spec.components[i];
            v_char = std::max(v_char, std::abs(a.v) +
                                          c.hbar / (2.0 * c.mass * a.sigma0));
            for (std::size_t j = i + 1; j < spec.components.size(); ++j) {
              const auto& b = spec.components[j];
              dp_max = std::max(
                  dp_max, c.mass * std::abs(a.v - b.v) +
                              0.5 * c.hbar * (1.0 / a.sigma0 + 1.0 / b.sigma0));
            }
          }
          return cap_from(dp_max, v_char);
        } else if constexpr (std::is_same_v<T, TalbotSpec>) {
          const double p_eff = c.hbar / spec.sigma0;
          return cap_from(2.0 * p_eff, p_eff / c.mass);
        } else if constexpr (std::is_same_v<T, BoxSpec>) {
          // rms momentum of the occupied mode ladder
          double p2 = 0.0;
          for (std::size_t n = 0; n < spec.coefficients.size(); ++n) {
            const double pn =
                spec.mode == BoxSpec::Mode::GaussianInWell
                    ? (2.0 * n + 1.0) * std::numbers::pi * c.hbar / spec.d
                    : (n + 1.0) * std::numbers::pi * c.hbar / spec.d;
            p2 += std::norm(spec.coefficients[n]) * pn * pn;
          }
          const double p_eff = std::sqrt(p2);
          return cap_from(2.0 * p_eff, p_eff / c.mass);
        } else if constexpr (std::is_same_v<T, HarmonicSpec>) {
          int n_max = 0;
          for (const auto& [n, cn] : spec.levels) n_max = std::max(n_max, n);
          const double p_eff = std::sqrt(
              2.0 * c.mass * c.hbar * spec.omega * (n_max + 0.5));
          return cap_from(2.0 * p_eff, p_eff / c.mass);
        } else {
          return inf;
        }
      },
      m);
}

Trajectory integrate(const ModelSpec& m, double x0, const IntegratorConfig& cfg,
                     const PhysicalConstants& c) {
  IntegratorConfig run_cfg = cfg;
  if (!std::isfinite(run_cfg.max_step))
    run_cfg.max_step = suggested_max_step(m, c);
  return integrate_field(model_flow(m, c), x0, run_cfg);
}

std::vector<double> sample_initial(const EnsembleSpec& spec, const ModelSpec& m,
                                   double t0, const PhysicalConstants& c) {
  if (spec.n_traj < 1) throw ValidationError("ensemble: n_traj >= 1");
  if (!(spec.support_max > spec.support_min))
    throw ValidationError("ensemble: support degenerate");
  const int n = spec.n_traj;
  std::vector<double> out(n);

  if (spec.sampling == Sampling::UniformSupport) {
    if (n == 1) {
      out[0] = 0.5 * (spec.support_min + spec.support_max);
      return out;
    }
    const double step = (spec.support_max - spec.support_min) / (n - 1);
    for (int i = 0; i < n; ++i) out[i] = spec.support_min + i * step;
    return out;
  }

  constexpr int n_cells = 4096;
  std::vector<double> xs(n_cells + 1), cdf(n_cells + 1, 0.0);
  const double dx = (spec.support_max - spec.support_min) / n_cells;
  std::vector<double> rho(n_cells + 1);
  for (int i = 0; i <= n_cells; ++i) {
    xs[i] = spec.support_min + i * dx;
    rho[i] = std::norm(eval_model(m, c, xs[i], t0).psi);
  }
  for (int i = 1; i <= n_cells; ++i)
    cdf[i] = cdf[i - 1] + 0.5 * (rho[i] + rho[i - 1]) * dx;
  const double mass = cdf.back();
  if (!(mass > 1e-12))
    throw DomainError("sample_initial: no density mass in support");

  for (int i = 0; i < n; ++i) {
    std::mt19937_64 eng(spec.seed ^ static_cast<std::uint64_t>(i));
    const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
    const double target = u * mass;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    const int j = std::clamp<int>(
        static_cast<int>(std::distance(cdf.begin(), it)), 1, n_cells);
    const double seg = cdf[j] - cdf[j - 1];
    const double frac = seg > 0.0 ? (target - cdf[j - 1]) / seg : 0.5;
    out[i] = xs[j - 1] + frac * dx;
  }
  return out;
}

int worker_count() {
  if (const char* env = std::getenv("QFLOW_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return std::min(n, 256);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 4;
}

TrajectoryEnsemble run_ensemble(const ModelSpec& m, const EnsembleSpec& spec,
                                const IntegratorConfig& cfg,
                                const PhysicalConstants& c) {
  if (cfg.save_times.empty())
    throw ValidationError("run_ensemble: empty save_times");
  IntegratorConfig run_cfg = cfg;
  if (!std::isfinite(run_cfg.max_step))
    run_cfg.max_step = suggested_max_step(m, c);
  const std::vector<double> x0s =
      sample_initial(spec, m, run_cfg.save_times.front(), c);
  const int n = spec.n_traj;

  TrajectoryEnsemble ens;
  ens.times = cfg.save_times;
  ens.paths.resize(n);
  ens.status.assign(n, PathStatus::Completed);
  ens.abort_times.assign(n, std::numeric_limits<double>::quiet_NaN());

  const FlowField flow = model_flow(m, c);
  const auto work = [&](int begin, int stride) {
    for (int i = begin; i < n; i += stride) {
      Trajectory traj = integrate_field(flow, x0s[i], run_cfg);
      ens.paths[i] = std::move(traj.positions);
      ens.status[i] = traj.status;
      ens.abort_times[i] = traj.abort_time;
    }
  };

  const int n_workers = std::min(worker_count(), n);
  if (n_workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w)
      pool.emplace_back(work, w, n_workers);
    for (auto& th : pool) th.join();
  }
  return ens;
}

OrderingReport ordering_check(const TrajectoryEnsemble& e) {
  OrderingReport rep;
  const int n = static_cast<int>(e.paths.size());
  if (n < 2 || e.times.empty()) return rep;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return e.paths[a][0] < e.paths[b][0];
  });

  for (std::size_t j = 0; j < e.times.size(); ++j) {
    for (int k = 0; k + 1 < n; ++k) {
      const double xa = e.paths[order[k]][j];
      const double xb = e.paths[order[k + 1]][j];
      if (std::isnan(xa) || std::isnan(xb)) continue;
      if (xa > xb) {
        ++rep.violations;
        if (rep.ok) {
          rep.ok = false;
          rep.first_path_a = order[k];
          rep.first_path_b = order[k + 1];
          rep.first_time = e.times[j];
        }
      }
    }
  }
  return rep;
}

ExchangeReport exchange_diagnostics(const TrajectoryEnsemble& e,
                                    const SuperpositionSpec& model,
                                    const PhysicalConstants& c) {
  if (model.components.size() != 2)
    throw ArityError("exchange_diagnostics: exactly two components required");
  const auto& g1 = model.components[0];
  const auto& g2 = model.components[1];
  const double w1 = std::norm(g1.weight);
  const double w2 = std::norm(g2.weight);

  ExchangeReport rep;
  rep.symmetry_line = (w1 * g1.x0 + w2 * g2.x0) / (w1 + w2);

  const int n = static_cast<int>(e.paths.size());
  std::vector<bool> left_start(n, false);
  std::vector<bool> usable(n, false);
  for (int i = 0; i < n; ++i) {
    usable[i] = e.status[i] == PathStatus::Completed;
    if (!usable[i]) ++rep.n_aborted;
    left_start[i] = e.paths[i][0] < rep.symmetry_line;
    if (usable[i]) (left_start[i] ? rep.n_left_start : rep.n_right_start)++;
  }

  const ModelSpec m = model;
  for (std::size_t j = 0; j < e.times.size(); ++j) {
    ExchangeSnapshot snap{};
    snap.time = e.times[j];
    double sum_v_l = 0.0, sum_v_r = 0.0;
    double sum_x_l = 0.0, sum_x_r = 0.0, sum_xx_l = 0.0, sum_xx_r = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!usable[i]) continue;
      const double x = e.paths[i][j];
      const double v = velocity_at(m, x, e.times[j], c);
      const bool now_left = x < rep.symmetry_line;
      if (left_start[i]) {
        sum_v_l += v;
        sum_x_l += x;
        sum_xx_l += x * x;
        if (!now_left) ++snap.crossings_left_to_right;
      } else {
        sum_v_r += v;
        sum_x_r += x;
        sum_xx_r += x * x;
        if (now_left) ++snap.crossings_right_to_left;
      }
    }
    const auto finish = [](double sv, double sx, double sxx, int cnt,
                           double& mean_v, double& spread) {
      if (cnt > 0) {
        mean_v = sv / cnt;
        const double mx = sx / cnt;
        const double var =
            cnt > 1 ? std::max(0.0, (sxx - cnt * mx * mx) / (cnt - 1)) : 0.0;
        spread = std::sqrt(var);
      } else {
        mean_v = std::numeric_limits<double>::quiet_NaN();
        spread = std::numeric_limits<double>::quiet_NaN();
      }
    };
    finish(sum_v_l, sum_x_l, sum_xx_l, rep.n_left_start, snap.mean_v_left,
           snap.spread_left);
    finish(sum_v_r, sum_x_r, sum_xx_r, rep.n_right_start, snap.mean_v_right,
           snap.spread_right);
    rep.history.push_back(snap);
  }
  return rep;
}

}  // namespace qflow
