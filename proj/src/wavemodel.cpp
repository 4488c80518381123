#include "qflow/wavemodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qflow {

namespace {

constexpr double kPi = std::numbers::pi;

void check_finite(const WaveSample& w, const char* what) {
  if (!std::isfinite(w.psi.real()) || !std::isfinite(w.psi.imag()) ||
      !std::isfinite(w.dpsi.real()) || !std::isfinite(w.dpsi.imag()) ||
      !std::isfinite(w.d2psi.real()) || !std::isfinite(w.d2psi.imag()))
    throw OverflowError(std::string("eval_model: non-finite term in ") + what);
}

WaveSample accumulate(WaveSample acc, const WaveSample& term) {
  acc.psi += term.psi;
  acc.dpsi += term.dpsi;
  acc.d2psi += term.d2psi;
  return acc;
}

}  // namespace

Complex sigma_tilde(double sigma0, double t, const PhysicalConstants& c) {
  return sigma0 * Complex(1.0, c.hbar * t / (2.0 * c.mass * sigma0 * sigma0));
}

WaveSample eval_gaussian(const GaussianSpec& g, const PhysicalConstants& c,
                         double x, double t) {
  const Complex st = sigma_tilde(g.sigma0, t, c);
  const double p = c.mass * g.v;
  const double energy = p * p / (2.0 * c.mass);
  const double xt = g.x0 + g.v * t;
  const double dx = x - xt;

  // (2 pi st^2)^(-1/4); Re(st) = sigma0 > 0, so the principal square root
  // never crosses a branch cut.
  const Complex prefactor = std::pow(2.0 * kPi, -0.25) / std::sqrt(st);
  const Complex exponent = -dx * dx / (4.0 * g.sigma0 * st) +
                           Complex(0.0, p * dx / c.hbar) +
                           Complex(0.0, energy * t / c.hbar);
  const Complex psi = g.weight * prefactor * std::exp(exponent);
  const Complex dlog = -dx / (2.0 * g.sigma0 * st) + Complex(0.0, p / c.hbar);
  const Complex d2log = -1.0 / (2.0 * g.sigma0 * st);
  return {psi, psi * dlog, psi * (d2log + dlog * dlog)};
}

namespace {

WaveSample eval_superposition(const SuperpositionSpec& s,
                              const PhysicalConstants& c, double x, double t) {
  WaveSample acc{};
  for (const auto& g : s.components)
    acc = accumulate(acc, eval_gaussian(g, c, x, t));
  return acc;
}

WaveSample eval_talbot(const TalbotSpec& s, const PhysicalConstants& c,
                       double x, double t) {
  // psi = sum_n coeff[n] * u_n(x) * exp(-i w_n t), u_0 = 1/sqrt(d),
  // u_n = (2/sqrt(d)) cos(p_n x / hbar), p_n = 2 pi n hbar / d,
  // w_n = E_n / hbar = 2 pi^2 n^2 hbar / (m d^2).
  WaveSample acc{};
  const double invsqd = 1.0 / std::sqrt(s.d);
  for (int n = 0; n <= s.nmax; ++n) {
    const double pn = 2.0 * kPi * n * c.hbar / s.d;
    const double wn = 2.0 * kPi * kPi * n * n * c.hbar / (c.mass * s.d * s.d);
    const Complex phase = std::polar(1.0, -wn * t);
    const double k = pn / c.hbar;
    const double amp = (n == 0 ? 1.0 : 2.0) * s.coeff[n] * invsqd;
    const Complex a = amp * phase;
    acc.psi += a * std::cos(k * x);
    acc.dpsi += a * (-k * std::sin(k * x));
    acc.d2psi += a * (-k * k * std::cos(k * x));
  }
  return acc;
}

WaveSample eval_box(const BoxSpec& s, const PhysicalConstants& c, double x,
                    double t) {
  WaveSample acc{};
  const int n_terms = static_cast<int>(s.coefficients.size());
  if (s.mode == BoxSpec::Mode::GaussianInWell) {
    // sqrt(2/d) cos(p_n x / hbar), p_n = (2n+1) pi hbar / d, well [-d/2, d/2]
    const double norm = std::sqrt(2.0 / s.d);
    const double k1 = kPi / s.d;
    for (int n = 0; n < n_terms; ++n) {
      const double k = (2.0 * n + 1.0) * k1;
      const double pn = k * c.hbar;
      const double En = pn * pn / (2.0 * c.mass);
      const Complex a =
          s.coefficients[n] * norm * std::polar(1.0, -En * t / c.hbar);
      acc.psi += a * std::cos(k * x);
      acc.dpsi += a * (-k * std::sin(k * x));
      acc.d2psi += a * (-k * k * std::cos(k * x));
    }
  } else {
    // sqrt(2/L) sin(n pi x / L), n = 1..N, well [0, L]. The rotation
    // recurrence keeps large truncations cheap; re-synced every 256 terms.
    const double norm = std::sqrt(2.0 / s.d);
    const double theta = kPi * x / s.d;
    const Complex step = std::polar(1.0, theta);
    Complex rot = step;  // exp(i n theta) for n = 1
    const double k1 = kPi / s.d;
    for (int n = 1; n <= n_terms; ++n) {
      if (n % 256 == 0) rot = std::polar(1.0, n * theta);
      const double k = n * k1;
      const double En = k * k * c.hbar * c.hbar / (2.0 * c.mass);
      const Complex a =
          s.coefficients[n - 1] * norm * std::polar(1.0, -En * t / c.hbar);
      const double sn = rot.imag();
      const double cn = rot.real();
      acc.psi += a * sn;
      acc.dpsi += a * (k * cn);
      acc.d2psi += a * (-k * k * sn);
      rot *= step;
    }
  }
  return acc;
}

double hermite(int n, double xi) {
  if (n == 0) return 1.0;
  double hm = 1.0, h = 2.0 * xi;
  for (int k = 1; k < n; ++k) {
    const double hn = 2.0 * xi * h - 2.0 * k * hm;
    hm = h;
    h = hn;
  }
  return h;
}

WaveSample eval_harmonic(const HarmonicSpec& s, const PhysicalConstants& c,
                         double x, double t) {
  WaveSample acc{};
  const double a = std::sqrt(c.mass * s.omega / c.hbar);
  const double xi = a * x;
  const double gauss = std::exp(-0.5 * xi * xi);
  const double base_norm = std::pow(c.mass * s.omega / (kPi * c.hbar), 0.25);
  for (const auto& [n, cn] : s.levels) {
    double norm = base_norm;
    for (int k = 1; k <= n; ++k) norm /= std::sqrt(2.0 * k);
    const double hn = hermite(n, xi);
    const double hnm1 = n > 0 ? hermite(n - 1, xi) : 0.0;
    const double phi = norm * hn * gauss;
    const double dphi = a * norm * (2.0 * n * hnm1 - xi * hn) * gauss;
    const double d2phi = a * a * (xi * xi - 1.0 - 2.0 * n) * phi;
    const double En = c.hbar * s.omega * (n + 0.5);
    const Complex ph = cn * std::polar(1.0, -En * t / c.hbar);
    acc.psi += ph * phi;
    acc.dpsi += ph * dphi;
    acc.d2psi += ph * d2phi;
  }
  return acc;
}

WaveSample eval_plane_wave(const PlaneWaveSpec& s, const PhysicalConstants& c,
                           double x, double t) {
  const double k = s.p / c.hbar;
  const double energy = s.p * s.p / (2.0 * c.mass);
  const Complex psi = std::polar(1.0, k * x - energy * t / c.hbar);
  const Complex ik{0.0, k};
  return {psi, ik * psi, ik * ik * psi};
}

}  // namespace

WaveSample eval_model(const ModelSpec& m, const PhysicalConstants& c, double x,
                      double t) {
  WaveSample w = std::visit(
      [&](const auto& spec) -> WaveSample {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, GaussianSpec>)
          return eval_gaussian(spec, c, x, t);
        else if constexpr (std::is_same_v<T, SuperpositionSpec>)
          return eval_superposition(spec, c, x, t);
        else if constexpr (std::is_same_v<T, TalbotSpec>)
          return eval_talbot(spec, c, x, t);
        else if constexpr (std::is_same_v<T, BoxSpec>)
          return eval_box(spec, c, x, t);
        else if constexpr (std::is_same_v<T, HarmonicSpec>)
          return eval_harmonic(spec, c, x, t);
        else
          return eval_plane_wave(spec, c, x, t);
      },
      m);
  check_finite(w, "model evaluation");
  return w;
}

double spreading_ratio(double sigma0, double t, const PhysicalConstants& c) {
  const double b = c.hbar * t / (2.0 * c.mass * sigma0 * sigma0);
  return std::sqrt(1.0 + b * b);
}

CriticalSpeed critical_speed(double d, double sigma0,
                             const PhysicalConstants& c) {
  const double v = 2.2 * c.hbar * d / (2.0 * c.mass * sigma0 * sigma0);
  return {v, 2.2 * (d / sigma0)};
}

TalbotScales talbot_scales(double d, const WavelengthOrMomentum& k,
                           const PhysicalConstants& c) {
  const double lambda = std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Wavelength>)
          return v.value;
        else
          return 2.0 * kPi * c.hbar / v.value;
      },
      k);
  if (!(lambda > 0.0)) throw ValidationError("wavelength must be > 0");
  if (!(d > 0.0)) throw ValidationError("grating period must be > 0");
  return {d * d / lambda, talbot_time(d, c)};
}

double talbot_time(double d, const PhysicalConstants& c) {
  return c.mass * d * d / (kPi * c.hbar);
}

double box_recurrence_time(double d, const PhysicalConstants& c) {
  return c.mass * d * d / (2.0 * kPi * c.hbar);
}

int talbot_auto_nmax(double d, double sigma0) {
  // smallest n with exp(-(2 pi n sigma0 / d)^2) < 1e-16
  const double target = std::sqrt(16.0 * std::numbers::ln10);
  return std::max(1, static_cast<int>(
                         std::ceil(target * d / (2.0 * kPi * sigma0))));
}

TalbotSpec make_talbot(double d, double sigma0, int nmax) {
  if (!(d > 0.0)) throw ValidationError("talbot: d must be > 0");
  if (!(sigma0 > 0.0)) throw ValidationError("talbot: sigma0 must be > 0");
  if (nmax < 0) nmax = talbot_auto_nmax(d, sigma0);
  TalbotSpec s;
  s.d = d;
  s.sigma0 = sigma0;
  s.nmax = nmax;
  s.coeff.resize(nmax + 1);
  double norm2 = 0.0;
  for (int n = 0; n <= nmax; ++n) {
    const double u = 2.0 * kPi * n * sigma0 / d;
    s.coeff[n] = std::exp(-u * u);
    norm2 += (n == 0 ? 1.0 : 2.0) * s.coeff[n] * s.coeff[n];
  }
  const double scale = 1.0 / std::sqrt(norm2);
  for (auto& a : s.coeff) a *= scale;
  return s;
}

int box_auto_nmax(double d, double sigma0) {
  const double target = std::sqrt(16.0 * std::numbers::ln10);
  const double m = target * d / (kPi * sigma0);  // cutoff in (2n+1)
  return std::max(1, static_cast<int>(std::ceil((m - 1.0) / 2.0)) + 1);
}

bool box_gaussian_edge_ok(double d, double sigma0) {
  return sigma0 <= d / 8.0 + 1e-15;
}

BoxSpec make_box_gaussian(double d, double sigma0, int nmax) {
  if (!(d > 0.0)) throw ValidationError("box: d must be > 0");
  if (!(sigma0 > 0.0)) throw ValidationError("box: sigma0 must be > 0");
  if (nmax < 0) nmax = box_auto_nmax(d, sigma0);
  BoxSpec s;
  s.d = d;
  s.mode = BoxSpec::Mode::GaussianInWell;
  s.coefficients.resize(nmax);
  double norm2 = 0.0;
  for (int n = 0; n < nmax; ++n) {
    const double u = (2.0 * n + 1.0) * kPi * sigma0 / d;
    const double a = std::exp(-u * u);
    s.coefficients[n] = a;
    norm2 += a * a;
  }
  const double scale = 1.0 / std::sqrt(norm2);
  for (auto& a : s.coefficients) a *= scale;
  return s;
}

BoxSpec make_box_explicit(double L, std::vector<Complex> coefficients) {
  if (!(L > 0.0)) throw ValidationError("box: L must be > 0");
  if (coefficients.empty()) throw ValidationError("box: empty coefficients");
  double norm2 = 0.0;
  for (const auto& a : coefficients) norm2 += std::norm(a);
  if (!(norm2 > 0.0)) throw ValidationError("box: zero-norm coefficients");
  const double scale = 1.0 / std::sqrt(norm2);
  for (auto& a : coefficients) a *= scale;
  BoxSpec s;
  s.d = L;
  s.mode = BoxSpec::Mode::ExplicitCoefficients;
  s.coefficients = std::move(coefficients);
  return s;
}

std::vector<double> square_wave_coefficients(double L, double w, int N) {
  if (!(L > 0.0) || !(w > 0.0)) throw DomainError("square wave: need 0 < w <= L");
  if (w > L) throw DomainError("square wave: width exceeds well length");
  if (N < 1) throw DomainError("square wave: N >= 1");
  // <phi_n | square> with phi_n = sqrt(2/L) sin(n pi x / L) and the square
  // 1/sqrt(w) on [(L-w)/2, (L+w)/2]:
  //   c_n = sqrt(2/L)/sqrt(w) * (2L / n pi) sin(n pi / 2) sin(n pi w / 2L)
  std::vector<double> c(N);
  double norm2 = 0.0;
  for (int k = 0; k < N; ++k) {
    const int n = k + 1;
    const double parity = (n % 2 == 1) ? ((n / 2) % 2 == 0 ? 1.0 : -1.0) : 0.0;
    const double val = parity == 0.0
                           ? 0.0
                           : std::sqrt(2.0 / L) / std::sqrt(w) *
                                 (2.0 * L / (n * kPi)) * parity *
                                 std::sin(n * kPi * w / (2.0 * L));
    c[k] = val;
    norm2 += val * val;
  }
  if (!(norm2 > 0.0)) throw DomainError("square wave: all projections vanish");
  const double scale = 1.0 / std::sqrt(norm2);
  for (auto& v : c) v *= scale;
  return c;
}

HarmonicSpec make_harmonic(double omega,
                           std::vector<std::pair<int, Complex>> levels) {
  if (!(omega > 0.0)) throw ValidationError("harmonic: omega must be > 0");
  if (levels.empty()) throw ValidationError("harmonic: no levels");
  double norm2 = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].first < 0)
      throw ValidationError("harmonic: negative level index");
    for (std::size_t j = i + 1; j < levels.size(); ++j)
      if (levels[i].first == levels[j].first)
        throw ValidationError("harmonic: duplicate level index");
    norm2 += std::norm(levels[i].second);
  }
  if (!(norm2 > 0.0)) throw ValidationError("harmonic: zero-norm state");
  const double scale = 1.0 / std::sqrt(norm2);
  for (auto& [n, cn] : levels) cn *= scale;
  return {omega, std::move(levels)};
}

double harmonic_relative_frequency(const HarmonicSpec& spec,
                                   const PhysicalConstants&) {
  if (spec.levels.size() != 2)
    throw ArityError("harmonic_relative_frequency: exactly two levels");
  const int na = spec.levels[0].first;
  const int nb = spec.levels[1].first;
  // (E_b - E_a)/hbar with E_n = hbar omega (n + 1/2); hbar cancels.
  return std::abs(nb - na) * spec.omega;
}

SuperpositionSpec make_nslit(int n_slits, double d, double sigma0) {
  if (n_slits < 1) throw ValidationError("nslit: need at least one slit");
  SuperpositionSpec s;
  const double c = 1.0 / std::sqrt(static_cast<double>(n_slits));
  for (int k = 0; k < n_slits; ++k) {
    const double x0 = (k - (n_slits - 1) / 2.0) * d;
    s.components.push_back({x0, 0.0, sigma0, Complex(c, 0.0)});
  }
  return s;
}

}  // namespace qflow
