#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "qflow/types.hpp"

namespace qflow::test {

// Composite Simpson's rule on [a, b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int n = 2000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Central finite differences of a complex-valued function of x.
inline Complex fd1(const std::function<Complex(double)>& f, double x,
                   double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}
inline Complex fd2(const std::function<Complex(double)>& f, double x,
                   double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

inline double rel_err(double got, double want, double scale = 0.0) {
  const double denom =
      std::max({std::abs(got), std::abs(want), scale, 1e-300});
  return std::abs(got - want) / denom;
}

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(eng() >> 11) * 0x1.0p-53);
  }
};

}  // namespace qflow::test
