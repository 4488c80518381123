#pragma once

#include <span>
#include <vector>

#include "qflow/trajectories.hpp"
#include "qflow/types.hpp"
#include "qflow/wavemodel.hpp"

namespace qflow {

enum class CarpetNorm { Raw, PerRowMax };

// Space-time density field; values stored row-major, one row per time.
struct CarpetField {
  GridSpec grid;
  CarpetNorm norm = CarpetNorm::Raw;
  std::vector<double> values;

  double at(int it, int ix) const {
    return values[static_cast<std::size_t>(it) * grid.nx + ix];
  }
};

CarpetField density_carpet(const ModelSpec& m, const GridSpec& grid,
                           CarpetNorm norm, const PhysicalConstants& c);

// Sup-norm density mismatch under the model's recurrence. Talbot gratings
// report both the full period tau_T and the half-period d/2-shifted replica;
// bound Gaussian-in-well states report tau_r.
struct RecurrenceReport {
  double period;
  double mismatch_full;
  double mismatch_half_shift;  // NaN when not applicable
  bool has_half_shift;
};
RecurrenceReport recurrence_report(const ModelSpec& m,
                                   const PhysicalConstants& c);

struct LadderPoint {
  double x;
  double p_normalized;  // m v(x, t_far) / (2 pi hbar / d)
  bool skipped;
};

// Bohmian momentum across the far-field pattern, normalized to the grating
// momentum quantum. Points whose density is below skip_floor (relative to
// the grid maximum) are flagged and skipped.
std::vector<LadderPoint> momentum_ladder(const ModelSpec& m,
                                         std::span<const double> x_grid,
                                         double t_far, double d,
                                         const PhysicalConstants& c,
                                         double skip_floor = 1e-6);

// Fraction of non-skipped points within tol of an integer step.
double plateau_fraction(std::span<const LadderPoint> pts, double tol = 0.05);

// Time at which the diffraction orders of an n-slit grating have separated
// into distinct beams but not yet dispersed: n m d^2 / (4 hbar).
double ladder_far_time(int n_slits, double d, const PhysicalConstants& c);

// Uniform grid covering `span_orders` diffraction orders on each side at
// time t_far.
std::vector<double> ladder_grid(double t_far, double d,
                                const PhysicalConstants& c,
                                double span_orders = 1.5, int n_points = 2001);

}  // namespace qflow
