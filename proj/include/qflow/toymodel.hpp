#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qflow/types.hpp"

namespace qflow {

// Parameters of the time-dependent wall-plus-well potential that mimics the
// two-packet interference by a single packet bouncing off the symmetry line
// at x = 0. `p` is the momentum entering the well geometry; the physical
// packet sits at x0 < 0 and drifts toward the wall with velocity -p/m, so
// p < 0 in every physical scenario (the well then lies on the packet side).
struct ToyParams {
  double p = -1.0;
  double sigma0 = 1.0;
  double x0 = -10.0;
  PhysicalConstants constants;
};

struct WellGeometry {
  double x_min;  // inner well edge (negative for physical parameters)
  double V0;     // well depth, 2 hbar^2 / (m x_min^2)
};

// Throws SingularityError when the effective phase gradient changes sign
// (the geometry is undefined past that instant).
WellGeometry well_geometry(const ToyParams& params, double t);

// Piecewise potential: 0 left of the well, -V0 inside [x_min, 0], +infinity
// behind the wall (x > 0).
double potential_profile(const ToyParams& params, double x, double t);

// Illustrative parameter sets spanning v/v_s in {0.5, 2, 10, 44}, from the
// spreading-dominated Young regime to a fast packet with negligible
// dispersion.
std::vector<std::pair<std::string, ToyParams>> toy_presets();

}  // namespace qflow
