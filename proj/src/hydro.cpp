#include "qflow/hydro.hpp"

#include <cmath>
#include <numbers>

namespace qflow {

namespace {

void check_floor(double rho, double floor, const char* where) {
  if (!(rho >= floor))
    throw NodeError(std::string(where) + ": density below floor");
}

}  // namespace

HydroSample hydro_fields(const WaveSample& w, const PhysicalConstants& c,
                         double density_floor) {
  const double rho = std::norm(w.psi);
  check_floor(rho, density_floor, "hydro_fields");
  const Complex dlog = w.dpsi / w.psi;
  const double v = (c.hbar / c.mass) * dlog.imag();
  const double J =
      (c.hbar / c.mass) * (std::conj(w.psi) * w.dpsi).imag();
  // Q = -(hbar^2/4m) [rho''/rho - (1/2)(rho'/rho)^2]
  const double drho = 2.0 * (std::conj(w.psi) * w.dpsi).real();
  const double d2rho =
      2.0 * (std::conj(w.psi) * w.d2psi).real() + 2.0 * std::norm(w.dpsi);
  const double Q = -(c.hbar * c.hbar / (4.0 * c.mass)) *
                   (d2rho / rho - 0.5 * (drho / rho) * (drho / rho));
  const double S = c.hbar * std::arg(w.psi);
  return {rho, S, v, J, Q};
}

double quantum_potential_curvature_form(const WaveSample& w,
                                        const PhysicalConstants& c) {
  // A''/A = Re(psi''/psi) + (Im(psi'/psi))^2
  const Complex dlog = w.dpsi / w.psi;
  const double curv = (w.d2psi / w.psi).real() + dlog.imag() * dlog.imag();
  return -(c.hbar * c.hbar / (2.0 * c.mass)) * curv;
}

TwoWaveFields two_wave_velocity(const WaveSample& w1, const WaveSample& w2,
                                const PhysicalConstants& c,
                                double density_floor) {
  const double rho1 = std::norm(w1.psi);
  const double rho2 = std::norm(w2.psi);
  check_floor(rho1, density_floor, "two_wave_velocity: wave 1");
  check_floor(rho2, density_floor, "two_wave_velocity: wave 2");

  const double S1 = c.hbar * std::arg(w1.psi);
  const double S2 = c.hbar * std::arg(w2.psi);
  const Complex dlog1 = w1.dpsi / w1.psi;
  const Complex dlog2 = w2.dpsi / w2.psi;
  const double v1 = (c.hbar / c.mass) * dlog1.imag();
  const double v2 = (c.hbar / c.mass) * dlog2.imag();
  const double J1 = rho1 * v1;
  const double J2 = rho2 * v2;
  const double u1 = (c.hbar / c.mass) * dlog1.real();  // (hbar/2m) rho1'/rho1
  const double u2 = (c.hbar / c.mass) * dlog2.real();

  TwoWaveDecomposition dec;
  dec.mean_phase = 0.5 * (S1 + S2);
  dec.phase_diff = (S1 - S2) / c.hbar;
  dec.osmotic_diff = u1 - u2;

  const double cross = 2.0 * std::sqrt(rho1 * rho2);
  const double cs = std::cos(dec.phase_diff);
  const double sn = std::sin(dec.phase_diff);
  const double rho = rho1 + rho2 + cross * cs;
  // tan(S) cos(S) written as sin(S); the cross term couples the mean current
  // velocity and the osmotic mismatch of the pair.
  const double J =
      J1 + J2 + cross * (cs * 0.5 * (v1 + v2) + sn * 0.5 * dec.osmotic_diff);
  const double v = (rho1 / rho) * v1 + (rho2 / rho) * v2 +
                   (cross / rho) * (cs * 0.5 * (v1 + v2) +
                                    sn * 0.5 * dec.osmotic_diff);
  return {rho, J, v, dec};
}

EnergySplit energy_split(const WaveSample& w, const PhysicalConstants& c,
                         double density_floor) {
  const double rho = std::norm(w.psi);
  check_floor(rho, density_floor, "energy_split");
  const Complex dlog = w.dpsi / w.psi;
  const double v = (c.hbar / c.mass) * dlog.imag();
  const double kinetic = 0.5 * c.mass * v * v;
  const HydroSample h = hydro_fields(w, c, density_floor);
  // J' = rho' v + rho v'
  const double drho = 2.0 * (std::conj(w.psi) * w.dpsi).real();
  const Complex d2log = w.d2psi / w.psi - dlog * dlog;
  const double dv = (c.hbar / c.mass) * d2log.imag();
  const double dJ = drho * v + rho * dv;
  const Complex flux_term = Complex(0.0, -0.5 * c.hbar) * (dJ / rho);
  return {kinetic, h.Q, flux_term};
}

double continuity_residual(const ModelSpec& m, const GridSpec& grid,
                           const PhysicalConstants& c) {
  validate(grid);
  const int nx = grid.nx, nt = grid.nt;
  std::vector<double> rho(static_cast<std::size_t>(nx) * nt);
  std::vector<double> J(static_cast<std::size_t>(nx) * nt);
  for (int j = 0; j < nt; ++j)
    for (int i = 0; i < nx; ++i) {
      const WaveSample w = eval_model(m, c, grid.x(i), grid.t(j));
      const double r = std::norm(w.psi);
      rho[static_cast<std::size_t>(j) * nx + i] = r;
      J[static_cast<std::size_t>(j) * nx + i] =
          (c.hbar / c.mass) * (std::conj(w.psi) * w.dpsi).imag();
    }
  const double inv2dt = 1.0 / (2.0 * grid.dt());
  const double inv2dx = 1.0 / (2.0 * grid.dx());
  double worst = 0.0;
  for (int j = 1; j + 1 < nt; ++j)
    for (int i = 1; i + 1 < nx; ++i) {
      const auto at = [&](int jj, int ii) {
        return static_cast<std::size_t>(jj) * nx + ii;
      };
      const double drho_dt = (rho[at(j + 1, i)] - rho[at(j - 1, i)]) * inv2dt;
      const double dJ_dx = (J[at(j, i + 1)] - J[at(j, i - 1)]) * inv2dx;
      worst = std::max(worst, std::abs(drho_dt + dJ_dx));
    }
  return worst;
}

std::vector<double> unwrap_phase(std::span<const double> wrapped) {
  std::vector<double> out(wrapped.begin(), wrapped.end());
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double offset = 0.0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double jump = wrapped[i] - wrapped[i - 1];
    if (jump > std::numbers::pi)
      offset -= two_pi * std::ceil((jump - std::numbers::pi) / two_pi);
    else if (jump < -std::numbers::pi)
      offset += two_pi * std::ceil((-jump - std::numbers::pi) / two_pi);
    out[i] = wrapped[i] + offset;
  }
  return out;
}

std::vector<double> phase_sweep(const ModelSpec& m, const PhysicalConstants& c,
                                std::span<const double> xs, double t) {
  std::vector<double> args(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    args[i] = std::arg(eval_model(m, c, xs[i], t).psi);
  auto unwrapped = unwrap_phase(args);
  for (auto& a : unwrapped) a *= c.hbar;
  return unwrapped;
}

}  // namespace qflow
