#pragma once

#include <complex>

#include "qflow/errors.hpp"

namespace qflow {

using Complex = std::complex<double>;

// Natural units (hbar = m = 1) by default; every quantity downstream scales
// through these two constants only.
struct PhysicalConstants {
  double hbar = 1.0;
  double mass = 1.0;
};

inline void validate(const PhysicalConstants& c) {
  if (!(c.hbar > 0.0)) throw ValidationError("hbar must be > 0");
  if (!(c.mass > 0.0)) throw ValidationError("mass must be > 0");
}

// Uniform space-time sampling rectangle. Row index = time, column index = x.
struct GridSpec {
  double x_min = -1.0;
  double x_max = 1.0;
  int nx = 2;
  double t_min = 0.0;
  double t_max = 1.0;
  int nt = 2;

  double dx() const { return (x_max - x_min) / (nx - 1); }
  double dt() const { return (t_max - t_min) / (nt - 1); }
  double x(int i) const { return x_min + i * dx(); }
  double t(int j) const { return t_min + j * dt(); }
};

inline void validate(const GridSpec& g) {
  if (!(g.x_max > g.x_min)) throw ValidationError("grid x range degenerate");
  if (!(g.t_max >= g.t_min)) throw ValidationError("grid t range degenerate");
  if (g.nx < 2 || g.nt < 2) throw ValidationError("grid needs nx, nt >= 2");
}

}  // namespace qflow
