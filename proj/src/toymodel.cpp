#include "qflow/toymodel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace qflow {

WellGeometry well_geometry(const ToyParams& params, double t) {
  const auto& c = params.constants;
  if (!(params.sigma0 > 0.0))
    throw ValidationError("toy model: sigma0 must be > 0");
  const double s0 = params.sigma0;
  const double beta = c.hbar * t / (2.0 * c.mass * s0 * s0);
  const double sig_t2 = s0 * s0 * (1.0 + beta * beta);
  // Image-packet position x0 - (p/m) t; with p < 0 this is the physical
  // packet drifting toward the wall.
  const double x_t = params.x0 - (params.p / c.mass) * t;
  const double denom = 2.0 * params.p / c.hbar + beta * x_t / sig_t2;
  if (std::abs(denom) < 1e-14)
    throw SingularityError("well_geometry: phase-gradient denominator vanished");
  const double x_min = std::numbers::pi / denom;
  const double V0 = 2.0 * c.hbar * c.hbar / (c.mass * x_min * x_min);
  return {x_min, V0};
}

double potential_profile(const ToyParams& params, double x, double t) {
  if (x > 0.0) return std::numeric_limits<double>::infinity();
  const WellGeometry g = well_geometry(params, t);
  if (x < g.x_min) return 0.0;
  return -g.V0;
}

std::vector<std::pair<std::string, ToyParams>> toy_presets() {
  // hbar = m = sigma0 = 1, so v_s = 1/2; x0 = -10 leaves room for the well
  // to breathe before the packet reaches the wall.
  const double v_s = 0.5;
  std::vector<std::pair<std::string, ToyParams>> out;
  const std::pair<std::string, double> cases[] = {
      {"young_like", 0.5}, {"moderate", 2.0}, {"fast", 10.0}, {"very_fast", 44.0}};
  for (const auto& [name, ratio] : cases) {
    ToyParams p;
    p.sigma0 = 1.0;
    p.x0 = -10.0;
    p.p = -ratio * v_s;  // momentum of the mirror packet
    out.emplace_back(name, p);
  }
  return out;
}

}  // namespace qflow
