#pragma once

#include <span>
#include <utility>
#include <vector>

#include "qflow/trajectories.hpp"
#include "qflow/types.hpp"
#include "qflow/wavemodel.hpp"

namespace qflow {

// (truncation size, polyline length) pairs feeding the dimension fit.
// `converged[i]` is false when doubling the sampling resolution still moved
// the length by more than 1% (the measured length is then grid-limited).
struct ScalingSeries {
  std::vector<int> K;
  std::vector<double> L;
  std::vector<bool> converged;
};

struct DimensionEstimate {
  double D_f;
  double slope_stderr;
  double r_squared;
};

// Euclidean length of the polyline through (x_i, y_i); x strictly increasing.
double curve_length(std::span<const double> x, std::span<const double> y);

// Length of the density snapshot rho(., t) of the K-term truncations of an
// explicit box state, sampled on nx+1 points across the well.
ScalingSeries density_length_series(const BoxSpec& base,
                                    std::span<const int> K_values, double t,
                                    int nx, const PhysicalConstants& c);

// Least-squares slope of log L vs log K over the asymptotic window (the
// smallest quarter of the K values is dropped); D_f = 1 + slope.
DimensionEstimate fractal_dimension(const ScalingSeries& s);

// Path length of the trajectory started at x0 under N-term truncations,
// measured in the (t/span, x) plane.
ScalingSeries trajectory_length_series(const BoxSpec& base, double x0,
                                       std::span<const int> N_values,
                                       std::pair<double, double> t_span,
                                       const IntegratorConfig& cfg,
                                       const PhysicalConstants& c);

}  // namespace qflow
