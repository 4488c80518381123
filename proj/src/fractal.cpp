#include "qflow/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace qflow {

double curve_length(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || x.size() != y.size())
    throw DomainError("curve_length: need >= 2 matching samples");
  double len = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double dx = x[i] - x[i - 1];
    if (!(dx > 0.0)) throw DomainError("curve_length: x must increase strictly");
    const double dy = y[i] - y[i - 1];
    len += std::sqrt(dx * dx + dy * dy);
  }
  return len;
}

namespace {

// Density rows of every requested truncation in one sweep: per sample point
// the partial sums over modes are accumulated in ascending n and recorded
// whenever n hits a requested K.
std::vector<double> truncation_lengths(const BoxSpec& base,
                                       std::span<const int> K_values, double t,
                                       int nx, const PhysicalConstants& c) {
  const int n_modes = static_cast<int>(base.coefficients.size());
  const int k_count = static_cast<int>(K_values.size());
  const double L = base.d;
  const int n_pts = nx + 1;

  // c_n exp(-i E_n t / hbar), n = 1..K_max
  std::vector<Complex> phase(n_modes);
  for (int n = 1; n <= n_modes; ++n) {
    const double k = n * std::numbers::pi / L;
    const double En = k * k * c.hbar * c.hbar / (2.0 * c.mass);
    phase[n - 1] =
        base.coefficients[n - 1] * std::polar(1.0, -En * t / c.hbar);
  }
  const double norm = std::sqrt(2.0 / L);

  std::vector<double> rows(static_cast<std::size_t>(k_count) * n_pts);
  const auto fill = [&](int begin, int stride) {
    for (int i = begin; i < n_pts; i += stride) {
      const double x = L * i / nx;
      const double theta = std::numbers::pi * x / L;
      const Complex step = std::polar(1.0, theta);
      Complex rot = step;
      Complex psi{0.0, 0.0};
      int next_k = 0;
      for (int n = 1; n <= n_modes && next_k < k_count; ++n) {
        if (n % 256 == 0) rot = std::polar(1.0, n * theta);
        psi += phase[n - 1] * (norm * rot.imag());
        rot *= step;
        if (n == K_values[next_k]) {
          rows[static_cast<std::size_t>(next_k) * n_pts + i] = std::norm(psi);
          ++next_k;
        }
      }
    }
  };
  const int n_workers = std::min(worker_count(), 16);
  if (n_workers <= 1) {
    fill(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(fill, w, n_workers);
    for (auto& th : pool) th.join();
  }

  std::vector<double> xs(n_pts);
  for (int i = 0; i < n_pts; ++i) xs[i] = L * i / nx;
  std::vector<double> lengths(k_count);
  for (int k = 0; k < k_count; ++k)
    lengths[k] = curve_length(
        xs, std::span<const double>(rows.data() +
                                        static_cast<std::size_t>(k) * n_pts,
                                    n_pts));
  return lengths;
}

}  // namespace

ScalingSeries density_length_series(const BoxSpec& base,
                                    std::span<const int> K_values, double t,
                                    int nx, const PhysicalConstants& c) {
  if (base.mode != BoxSpec::Mode::ExplicitCoefficients)
    throw DomainError("density_length_series: explicit box state required");
  if (K_values.empty()) throw DomainError("density_length_series: no K values");
  for (std::size_t i = 0; i < K_values.size(); ++i) {
    if (K_values[i] < 1 ||
        K_values[i] > static_cast<int>(base.coefficients.size()))
      throw DomainError("density_length_series: K out of range");
    if (i > 0 && K_values[i] <= K_values[i - 1])
      throw DomainError("density_length_series: K must increase strictly");
  }
  if (nx < 2 * K_values.back())
    throw DomainError("density_length_series: nx too coarse for K_max");

  const auto lengths = truncation_lengths(base, K_values, t, nx, c);
  const auto refined = truncation_lengths(base, K_values, t, 2 * nx, c);

  ScalingSeries s;
  s.K.assign(K_values.begin(), K_values.end());
  s.L = lengths;
  s.converged.resize(K_values.size());
  for (std::size_t i = 0; i < K_values.size(); ++i)
    s.converged[i] = std::abs(refined[i] - lengths[i]) <= 0.01 * lengths[i];
  return s;
}

DimensionEstimate fractal_dimension(const ScalingSeries& s) {
  const int n = static_cast<int>(s.K.size());
  if (n < 4) throw DomainError("fractal_dimension: need >= 4 entries");
  const int drop = n >= 6 ? n / 4 : 0;
  const int m = n - drop;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = drop; i < n; ++i) {
    const double lx = std::log(static_cast<double>(s.K[i]));
    const double ly = std::log(s.L[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double Sxx = sxx - sx * sx / m;
  const double Sxy = sxy - sx * sy / m;
  const double slope = Sxy / Sxx;
  const double intercept = (sy - slope * sx) / m;

  double ssr = 0.0, sst = 0.0;
  const double mean_y = sy / m;
  for (int i = drop; i < n; ++i) {
    const double lx = std::log(static_cast<double>(s.K[i]));
    const double ly = std::log(s.L[i]);
    const double resid = ly - (slope * lx + intercept);
    ssr += resid * resid;
    sst += (ly - mean_y) * (ly - mean_y);
  }
  DimensionEstimate est;
  est.D_f = 1.0 + slope;
  est.slope_stderr = m > 2 ? std::sqrt(ssr / ((m - 2) * Sxx)) : 0.0;
  est.r_squared = sst > 1e-30 ? 1.0 - ssr / sst : (ssr < 1e-30 ? 1.0 : 0.0);
  return est;
}

ScalingSeries trajectory_length_series(const BoxSpec& base, double x0,
                                       std::span<const int> N_values,
                                       std::pair<double, double> t_span,
                                       const IntegratorConfig& cfg,
                                       const PhysicalConstants& c) {
  if (base.mode != BoxSpec::Mode::ExplicitCoefficients)
    throw DomainError("trajectory_length_series: explicit box state required");
  if (!(x0 > 0.0 && x0 < base.d))
    throw DomainError("trajectory_length_series: x0 outside the well");
  const double span = t_span.second - t_span.first;
  if (!(span > 0.0)) throw DomainError("trajectory_length_series: empty span");

  ScalingSeries s;
  for (const int N : N_values) {
    if (N < 1 || N > static_cast<int>(base.coefficients.size()))
      throw DomainError("trajectory_length_series: N out of range");
    BoxSpec trunc = make_box_explicit(
        base.d, std::vector<Complex>(base.coefficients.begin(),
                                     base.coefficients.begin() + N));

    // Resolve the fastest mode beating: >= 32 samples per period of E_N/hbar.
    const double k = N * std::numbers::pi / base.d;
    const double omega_N = k * k * c.hbar / (2.0 * c.mass);
    const int n_save = std::clamp(
        static_cast<int>(std::ceil(32.0 * span * omega_N /
                                   (2.0 * std::numbers::pi))),
        2048, 1 << 18);
    IntegratorConfig run_cfg = cfg;
    run_cfg.save_times.resize(n_save + 1);
    for (int i = 0; i <= n_save; ++i)
      run_cfg.save_times[i] = t_span.first + span * i / n_save;

    const Trajectory traj = integrate(ModelSpec(trunc), x0, run_cfg, c);
    if (traj.status == PathStatus::NodeAbort)
      throw NodeError("trajectory_length_series: path aborted at node");

    std::vector<double> scaled_t(traj.times.size());
    for (std::size_t i = 0; i < traj.times.size(); ++i)
      scaled_t[i] = (traj.times[i] - t_span.first) / span;
    s.K.push_back(N);
    s.L.push_back(curve_length(scaled_t, traj.positions));
    s.converged.push_back(true);
  }
  return s;
}

}  // namespace qflow
