#pragma once

#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "qflow/types.hpp"

namespace qflow {

// psi and its first two spatial derivatives at one space-time point.
struct WaveSample {
  Complex psi;
  Complex dpsi;
  Complex d2psi;
};

// One free Gaussian packet: center x0, drift velocity v, initial width
// sigma0, complex weight in a superposition.
struct GaussianSpec {
  double x0 = 0.0;
  double v = 0.0;
  double sigma0 = 1.0;
  Complex weight{1.0, 0.0};
};

struct SuperpositionSpec {
  std::vector<GaussianSpec> components;
};

// Infinite periodic grating: plane-wave ladder p_n = 2*pi*n*hbar/d with
// Gaussian weights, normalized over one unit cell. coeff[n] is the
// normalized weight shared by the +n and -n plane waves.
struct TalbotSpec {
  double d = 1.0;
  double sigma0 = 0.125;
  int nmax = 0;
  std::vector<double> coeff;
};

// Bound eigenstate superposition. Two conventions:
//  - GaussianInWell: well [-d/2, d/2], cosine modes p_n = (2n+1)*pi*hbar/d
//  - ExplicitCoefficients: well [0, d], sine modes k_n = (n+1)*pi/d
// coefficients are normalized to unit sum of squares on construction.
struct BoxSpec {
  enum class Mode { GaussianInWell, ExplicitCoefficients };
  double d = 1.0;
  Mode mode = Mode::ExplicitCoefficients;
  std::vector<Complex> coefficients;
};

// Sparse harmonic-oscillator superposition: occupied levels (n, c_n).
struct HarmonicSpec {
  double omega = 1.0;
  std::vector<std::pair<int, Complex>> levels;
};

// Constant-velocity reference state exp(i(px - Et)/hbar); used by the
// continuity and trajectory diagnostics.
struct PlaneWaveSpec {
  double p = 1.0;
};

using ModelSpec = std::variant<GaussianSpec, SuperpositionSpec, TalbotSpec,
                               BoxSpec, HarmonicSpec, PlaneWaveSpec>;

// --- evaluation ---

// Complex width sigma0 * (1 + i*hbar*t / (2*m*sigma0^2)).
Complex sigma_tilde(double sigma0, double t, const PhysicalConstants& c);

WaveSample eval_gaussian(const GaussianSpec& g, const PhysicalConstants& c,
                         double x, double t);

// Sum/series evaluation of any model, terms ordered by |n| ascending.
// Throws OverflowError if a term leaves the representable range.
WaveSample eval_model(const ModelSpec& m, const PhysicalConstants& c, double x,
                      double t);

// --- scales and parameter maps ---

// sigma_t / sigma0 = sqrt(1 + (hbar t / 2 m sigma0^2)^2)
double spreading_ratio(double sigma0, double t, const PhysicalConstants& c);

struct CriticalSpeed {
  double v;          // 2.2 * hbar d / (2 m sigma0^2)
  double v_over_vs;  // 2.2 * d / sigma0, with v_s = hbar / (2 m sigma0)
};
CriticalSpeed critical_speed(double d, double sigma0,
                             const PhysicalConstants& c);

struct Wavelength {
  double value;
};
struct Momentum {
  double value;
};
using WavelengthOrMomentum = std::variant<Wavelength, Momentum>;

struct TalbotScales {
  double z_T;    // d^2 / lambda
  double tau_T;  // m d^2 / (pi hbar)
};
TalbotScales talbot_scales(double d, const WavelengthOrMomentum& k,
                           const PhysicalConstants& c);
double talbot_time(double d, const PhysicalConstants& c);
// Revival period of the two lowest odd-cosine modes, m d^2 / (2 pi hbar).
double box_recurrence_time(double d, const PhysicalConstants& c);

// --- model factories ---

// nmax < 0 selects the automatic cutoff: the first weight below 1e-16.
TalbotSpec make_talbot(double d, double sigma0, int nmax = -1);
int talbot_auto_nmax(double d, double sigma0);

BoxSpec make_box_gaussian(double d, double sigma0, int nmax = -1);
int box_auto_nmax(double d, double sigma0);
// The Gaussian-in-well expansion assumes the packet is negligible at the
// walls; holds for sigma0 <~ d/8.
bool box_gaussian_edge_ok(double d, double sigma0);

BoxSpec make_box_explicit(double L, std::vector<Complex> coefficients);

// Centered square of width w expanded over sine modes of a [0, L] well;
// returned coefficients are unit-normalized. Index k corresponds to the
// quantum number n = k + 1.
std::vector<double> square_wave_coefficients(double L, double w, int N);

HarmonicSpec make_harmonic(double omega,
                           std::vector<std::pair<int, Complex>> levels);

// Transition frequency (E_b - E_a)/hbar of a two-level harmonic state.
double harmonic_relative_frequency(const HarmonicSpec& spec,
                                   const PhysicalConstants& c);

// N equally weighted slits spaced d apart, Gaussian transmission sigma0.
SuperpositionSpec make_nslit(int n_slits, double d, double sigma0);

}  // namespace qflow
