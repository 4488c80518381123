#pragma once

#include <span>
#include <vector>

#include "qflow/types.hpp"
#include "qflow/wavemodel.hpp"

namespace qflow {

// Hydrodynamic fields at one point: density, phase (principal branch),
// velocity, flux and quantum potential.
struct HydroSample {
  double rho;
  double S;
  double v;
  double J;
  double Q;
};

// Two-wave quantities entering the recast flux/velocity of a coherent pair:
// the mean phase (S1+S2)/2, the scaled phase difference (S1-S2)/hbar, and
// the osmotic-velocity difference u1 - u2 with u_i = (hbar/2m) rho_i'/rho_i.
// The last one replaces the half quantum-potential difference printed in the
// source decomposition, which is not dimensionally consistent with the flux.
struct TwoWaveDecomposition {
  double mean_phase;
  double phase_diff;
  double osmotic_diff;
};

struct TwoWaveFields {
  double rho;
  double J;
  double v;
  TwoWaveDecomposition dec;
};

// Terms of the kinetic-energy split -(hbar^2/2m) psi''/psi =
// (grad S)^2/2m + Q + (hbar/2i) J'/rho.
struct EnergySplit {
  double kinetic;
  double internal;
  Complex flux_term;
};

HydroSample hydro_fields(const WaveSample& w, const PhysicalConstants& c,
                         double density_floor = 1e-300);

// Quantum potential from the amplitude-curvature form -(hbar^2/2m) A''/A;
// hydro_fields uses the density form. The two agree analytically.
double quantum_potential_curvature_form(const WaveSample& w,
                                        const PhysicalConstants& c);

TwoWaveFields two_wave_velocity(const WaveSample& w1, const WaveSample& w2,
                                const PhysicalConstants& c,
                                double density_floor = 1e-300);

EnergySplit energy_split(const WaveSample& w, const PhysicalConstants& c,
                         double density_floor = 1e-300);

// max |d rho/dt + d J/dx| over interior grid points, central differences.
double continuity_residual(const ModelSpec& m, const GridSpec& grid,
                           const PhysicalConstants& c);

// Branch-tracked unwrap of a 1D phase sweep; jumps larger than pi are
// folded back by multiples of 2 pi.
std::vector<double> unwrap_phase(std::span<const double> wrapped);

// Continuous action S = hbar * arg(psi) along an x sweep at fixed t.
std::vector<double> phase_sweep(const ModelSpec& m, const PhysicalConstants& c,
                                std::span<const double> xs, double t);

}  // namespace qflow
