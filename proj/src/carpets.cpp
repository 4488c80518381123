#include "qflow/carpets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace qflow {

CarpetField density_carpet(const ModelSpec& m, const GridSpec& grid,
                           CarpetNorm norm, const PhysicalConstants& c) {
  validate(grid);
  CarpetField field;
  field.grid = grid;
  field.norm = norm;
  field.values.resize(static_cast<std::size_t>(grid.nx) * grid.nt);

  const auto fill_rows = [&](int begin, int stride) {
    for (int j = begin; j < grid.nt; j += stride) {
      const double t = grid.t(j);
      double* row = field.values.data() + static_cast<std::size_t>(j) * grid.nx;
      for (int i = 0; i < grid.nx; ++i)
        row[i] = std::norm(eval_model(m, c, grid.x(i), t).psi);
      if (norm == CarpetNorm::PerRowMax) {
        const double mx = *std::max_element(row, row + grid.nx);
        if (mx > 0.0)
          for (int i = 0; i < grid.nx; ++i) row[i] /= mx;
      }
    }
  };
  const int n_workers = std::min(worker_count(), grid.nt);
  if (n_workers <= 1) {
    fill_rows(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(fill_rows, w, n_workers);
    for (auto& th : pool) th.join();
  }
  return field;
}

namespace {

double sup_density_mismatch(const ModelSpec& m, const PhysicalConstants& c,
                            double x_lo, double x_hi, int nx, double t0,
                            double tau, double x_shift) {
  double worst = 0.0;
  for (int i = 0; i < nx; ++i) {
    const double x = x_lo + (x_hi - x_lo) * i / (nx - 1);
    const double a = std::norm(eval_model(m, c, x, t0).psi);
    const double b = std::norm(eval_model(m, c, x + x_shift, t0 + tau).psi);
    worst = std::max(worst, std::abs(a - b));
  }
  return worst;
}

}  // namespace

RecurrenceReport recurrence_report(const ModelSpec& m,
                                   const PhysicalConstants& c) {
  constexpr int nx = 257;
  // Probe at a generic pair of base times; recurrence must hold at any t.
  const double base_fracs[] = {0.137, 0.411};

  if (const auto* talbot = std::get_if<TalbotSpec>(&m)) {
    const double tau = talbot_time(talbot->d, c);
    RecurrenceReport rep{tau, 0.0, 0.0, true};
    for (const double f : base_fracs) {
      rep.mismatch_full =
          std::max(rep.mismatch_full,
                   sup_density_mismatch(m, c, -talbot->d / 2, talbot->d / 2, nx,
                                        f * tau, tau, 0.0));
      rep.mismatch_half_shift =
          std::max(rep.mismatch_half_shift,
                   sup_density_mismatch(m, c, -talbot->d / 2, talbot->d / 2, nx,
                                        f * tau, tau / 2, talbot->d / 2));
    }
    return rep;
  }
  if (const auto* box = std::get_if<BoxSpec>(&m)) {
    double tau = box_recurrence_time(box->d, c);
    double x_lo = -box->d / 2, x_hi = box->d / 2;
    if (box->mode == BoxSpec::Mode::ExplicitCoefficients) {
      x_lo = 0.0;
      x_hi = box->d;
      // sine-basis revivals: odd-quantum-number states share the cosine-well
      // period; any populated even mode stretches it by a factor of 8
      bool has_even = false;
      for (std::size_t k = 0; k < box->coefficients.size(); ++k)
        if ((k + 1) % 2 == 0 && std::norm(box->coefficients[k]) > 1e-24)
          has_even = true;
      if (has_even) tau *= 8.0;
    }
    RecurrenceReport rep{tau, 0.0,
                         std::numeric_limits<double>::quiet_NaN(), false};
    for (const double f : base_fracs)
      rep.mismatch_full =
          std::max(rep.mismatch_full, sup_density_mismatch(m, c, x_lo, x_hi, nx,
                                                           f * tau, tau, 0.0));
    return rep;
  }
  throw DomainError("recurrence_report: model is not periodic or bound");
}

std::vector<LadderPoint> momentum_ladder(const ModelSpec& m,
                                         std::span<const double> x_grid,
                                         double t_far, double d,
                                         const PhysicalConstants& c,
                                         double skip_floor) {
  if (!(d > 0.0)) throw ValidationError("momentum_ladder: d must be > 0");
  const double p_unit = 2.0 * std::numbers::pi * c.hbar / d;

  std::vector<double> rho(x_grid.size());
  std::vector<WaveSample> samples(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    samples[i] = eval_model(m, c, x_grid[i], t_far);
    rho[i] = std::norm(samples[i].psi);
  }
  const double rho_max = *std::max_element(rho.begin(), rho.end());

  std::vector<LadderPoint> out(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    out[i].x = x_grid[i];
    if (rho[i] < skip_floor * rho_max) {
      out[i].skipped = true;
      out[i].p_normalized = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double v =
        (c.hbar / c.mass) * (samples[i].dpsi / samples[i].psi).imag();
    out[i].skipped = false;
    out[i].p_normalized = c.mass * v / p_unit;
  }
  return out;
}

double plateau_fraction(std::span<const LadderPoint> pts, double tol) {
  int kept = 0, on_step = 0;
  for (const auto& p : pts) {
    if (p.skipped) continue;
    ++kept;
    if (std::abs(p.p_normalized - std::round(p.p_normalized)) <= tol)
      ++on_step;
  }
  if (kept == 0) throw DomainError("plateau_fraction: all points skipped");
  return static_cast<double>(on_step) / kept;
}

double ladder_far_time(int n_slits, double d, const PhysicalConstants& c) {
  if (n_slits < 1) throw ValidationError("ladder_far_time: n_slits >= 1");
  return n_slits * c.mass * d * d / (4.0 * c.hbar);
}

std::vector<double> ladder_grid(double t_far, double d,
                                const PhysicalConstants& c, double span_orders,
                                int n_points) {
  const double order_spacing = 2.0 * std::numbers::pi * c.hbar * t_far /
                               (c.mass * d);
  const double x_max = span_orders * order_spacing;
  std::vector<double> xs(n_points);
  for (int i = 0; i < n_points; ++i)
    xs[i] = -x_max + 2.0 * x_max * i / (n_points - 1);
  return xs;
}

}  // namespace qflow
