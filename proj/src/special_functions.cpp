#include "polymer/special_functions.hpp"

#include <cmath>
#include <limits>

#include "polymer/errors.hpp"

namespace polymer {

double digamma(double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli tail: B_2k / (2k x^2k), k = 1..7
  const double series =
      inv2 * (1.0 / 12 -
      inv2 * (1.0 / 120 -
      inv2 * (1.0 / 252 -
      inv2 * (1.0 / 240 -
      inv2 * (1.0 / 132 -
      inv2 * (691.0 / 32760 -
      inv2 * (1.0 / 12)))))));
  return acc + std::log(x) - 0.5 * inv - series;
}

double trigamma(double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  while (x < 10.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // B_2k / x^(2k+1), k = 1..7
  const double series =
      inv * inv2 * (1.0 / 6 -
      inv2 * (1.0 / 30 -
      inv2 * (1.0 / 42 -
      inv2 * (1.0 / 30 -
      inv2 * (5.0 / 66 -
      inv2 * (691.0 / 2730 -
      inv2 * (7.0 / 6)))))));
  return acc + inv + 0.5 * inv2 + series;
}

double shape_minimizer(double mu, double x, double y) {
  if (!(mu > 0.0) || !(x > 0.0) || !(y > 0.0))
    throw Error("shape function needs mu, x, y > 0");
  double lo = 0.0;
  double hi = mu;
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (x * trigamma(mid) - y * trigamma(mu - mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double shape_value(double mu, double x, double y) {
  const double z = shape_minimizer(mu, x, y);
  return -x * digamma(z) - y * digamma(mu - z);
}

double shape_diagonal(double mu, double n) { return -2.0 * n * digamma(0.5 * mu); }

}  // namespace polymer
