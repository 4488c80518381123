#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "qflow/types.hpp"
#include "qflow/wavemodel.hpp"

namespace qflow {

struct IntegratorConfig {
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  // Relative to the largest density seen along the path so far.
  double density_floor = 1e-10;
  std::vector<double> save_times;  // strictly increasing, >= 1 entry
};

enum class Sampling { DensityWeighted, UniformSupport };

struct EnsembleSpec {
  int n_traj = 1;
  Sampling sampling = Sampling::DensityWeighted;
  double support_min = -1.0;
  double support_max = 1.0;
  std::uint64_t seed = 0;
};

enum class PathStatus { Completed, NodeAbort };

struct Trajectory {
  std::vector<double> times;
  std::vector<double> positions;  // NaN past an abort
  PathStatus status = PathStatus::Completed;
  double abort_time = std::numeric_limits<double>::quiet_NaN();
};

struct TrajectoryEnsemble {
  std::vector<double> times;
  std::vector<std::vector<double>> paths;  // paths[i][j] = x_i(times[j])
  std::vector<PathStatus> status;
  std::vector<double> abort_times;

  int n_aborted() const;
};

// Velocity and density of the guiding wave at one point; the integrator only
// needs these two numbers.
struct FieldPoint {
  double v;
  double rho;
};
using FlowField = std::function<FieldPoint(double x, double t)>;

FlowField model_flow(const ModelSpec& m, const PhysicalConstants& c);

// Guidance velocity (hbar/m) Im(psi'/psi). Throws NodeError below the
// (absolute) floor.
double velocity_at(const ModelSpec& m, double x, double t,
                   const PhysicalConstants& c, double density_floor = 1e-300);

// Adaptive Dormand-Prince 5(4) with dense output at cfg.save_times. The path
// starts at (save_times.front(), x0). Crossing the density floor aborts the
// path and flags it; it is not an error.
Trajectory integrate_field(const FlowField& f, double x0,
                           const IntegratorConfig& cfg);

// Step bound that resolves the finest interference fringe a model can form;
// error control alone can alias across fringes while their amplitude is
// still ramping up. Infinite for single-packet and plane-wave models.
double suggested_max_step(const ModelSpec& m, const PhysicalConstants& c);

// Model-aware entry points apply suggested_max_step when cfg.max_step was
// left unset (infinite).
Trajectory integrate(const ModelSpec& m, double x0, const IntegratorConfig& cfg,
                     const PhysicalConstants& c);

// Deterministic initial conditions at time t0. UniformSupport: equally
// spaced, endpoints included. DensityWeighted: inverse-CDF on a 4096-cell
// quadrature of rho(., t0), one substream per path (seed xor index).
std::vector<double> sample_initial(const EnsembleSpec& spec, const ModelSpec& m,
                                   double t0, const PhysicalConstants& c);

TrajectoryEnsemble run_ensemble(const ModelSpec& m, const EnsembleSpec& spec,
                                const IntegratorConfig& cfg,
                                const PhysicalConstants& c);

// Checks that the initial left-to-right order of paths is preserved at every
// saved time (the non-crossing rule, seen discretely).
struct OrderingReport {
  bool ok = true;
  int violations = 0;
  int first_path_a = -1;
  int first_path_b = -1;
  double first_time = std::numeric_limits<double>::quiet_NaN();
};
OrderingReport ordering_check(const TrajectoryEnsemble& e);

// Per-side statistics of a two-packet ensemble, classified by starting side
// of the symmetry line (the weight-averaged midpoint of the two centers).
struct ExchangeSnapshot {
  double time;
  double mean_v_left;   // paths that started left of the line
  double mean_v_right;
  double spread_left;   // sample std of current positions by starting side
  double spread_right;
  int crossings_left_to_right;
  int crossings_right_to_left;
};
struct ExchangeReport {
  double symmetry_line;
  int n_left_start = 0;
  int n_right_start = 0;
  int n_aborted = 0;
  std::vector<ExchangeSnapshot> history;  // one entry per saved time
  const ExchangeSnapshot& final_snapshot() const { return history.back(); }
};
ExchangeReport exchange_diagnostics(const TrajectoryEnsemble& e,
                                    const SuperpositionSpec& model,
                                    const PhysicalConstants& c);

// Worker cap shared by ensemble integration and grid sampling; honors the
// QFLOW_THREADS environment variable.
int worker_count();

}  // namespace qflow
