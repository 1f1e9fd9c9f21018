#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "polymer/disorder.hpp"
#include "polymer/errors.hpp"
#include "polymer/special_functions.hpp"

using namespace polymer;

namespace {

struct Moments {
  double mean = 0.0, var = 0.0;
  std::size_t n = 0;
};

template <class Fn>
Moments moments(std::size_t n, Fn&& value) {
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = value(i);
    const double d = v - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (v - mean);
  }
  return {mean, m2 / static_cast<double>(n - 1), n};
}

LatticePoint spread(std::size_t i) {
  return {static_cast<std::int64_t>(i % 1000) - 500, static_cast<std::int64_t>(i / 1000) - 500};
}

}  // namespace

TEST_CASE("hash constants are frozen") {
  CHECK(mix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(hash_combine(1, 2) == hash_combine(1, 2));
  CHECK(hash_combine(1, 2) != hash_combine(2, 1));
  Substream a(5), b(5);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(a.draws() == 10);
}

TEST_CASE("next_below stays in range and next_open01 in (0,1)") {
  Substream s(11);
  for (int i = 0; i < 10000; ++i) {
    CHECK(s.next_below(7) < 7);
    const double u = s.next_open01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("log weights are deterministic per point") {
  const WeightField f(1.0, 42);
  const WeightField g(1.0, 42);
  for (LatticePoint p : {LatticePoint{0, 0}, LatticePoint{-7, 13}, LatticePoint{100000, -3}}) {
    CHECK(std::bit_cast<std::uint64_t>(f.log_weight(p)) == std::bit_cast<std::uint64_t>(f.log_weight(p)));
    CHECK(std::bit_cast<std::uint64_t>(f.log_weight(p)) == std::bit_cast<std::uint64_t>(g.log_weight(p)));
    CHECK(std::isfinite(f.log_weight(p)));
  }
  CHECK_THROWS_AS(WeightField(0.0, 1), Error);
}

TEST_CASE("mu = 1: mean gamma and variance pi^2/6 of log Y over 10^6 points") {
  const WeightField f(1.0, 2024);
  const auto m = moments(1000000, [&](std::size_t i) { return f.log_weight(spread(i)); });
  const double var = std::numbers::pi * std::numbers::pi / 6.0;
  CHECK(std::abs(m.mean - kEulerGamma) <= 3.0 * std::sqrt(var / 1e6));
  // Var of the sample variance: (mu4 - var^2)/n with excess kurtosis 2.4 for the Gumbel law.
  const double var_se = std::sqrt((2.4 + 2.0) * var * var / 1e6);
  CHECK(std::abs(m.var - var) <= 3.0 * var_se);
}

TEST_CASE("E[1/Y] = mu") {
  for (double mu : {0.5, 1.0, 2.0, 4.5}) {
    const WeightField f(mu, 7);
    const auto m = moments(200000, [&](std::size_t i) { return std::exp(-f.log_weight(spread(i))); });
    CHECK(std::abs(m.mean - mu) <= 3.0 * std::sqrt(mu / 2e5));
  }
}

TEST_CASE("1/Y passes a Kolmogorov-Smirnov test against Gamma(mu, 1)") {
  for (double mu : {0.5, 1.0, 2.0}) {
    const WeightField f(mu, 31337);
    const std::size_t n = 100000;
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(-f.log_weight(spread(i)));
    std::sort(g.begin(), g.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double cdf = boost::math::gamma_p(mu, g[i]);
      d = std::max({d, cdf - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - cdf});
    }
    // Asymptotic critical value at significance 1e-3.
    CHECK_MESSAGE(d * std::sqrt(static_cast<double>(n)) < 1.9495, "mu=" << mu << " D=" << d);
  }
}

TEST_CASE("replica fields are distinct and uncorrelated") {
  const auto a = replica_field(9, 0, 1.0);
  const auto b = replica_field(9, 1, 1.0);
  CHECK(a.seed() == hash_combine(9, 0));
  CHECK(replica_field(9, 1, 1.0).log_weight({3, 4}) == b.log_weight({3, 4}));
  CHECK(a.log_weight({3, 4}) != b.log_weight({3, 4}));

  const std::size_t n = 100000;
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = a.log_weight(spread(i)), y = b.log_weight(spread(i));
    sa += x; sb += y; sab += x * y; saa += x * x; sbb += y * y;
  }
  const double nn = static_cast<double>(n);
  const double cov = sab / nn - sa * sb / (nn * nn);
  const double corr = cov / std::sqrt((saa / nn - sa * sa / (nn * nn)) * (sbb / nn - sb * sb / (nn * nn)));
  CHECK(std::abs(corr) <= 3.0 / std::sqrt(nn));
}

TEST_CASE("materialization does not depend on evaluation order") {
  const Box box{{-3, 2}, {9, 14}};
  const WeightField f(0.7, 5, box);
  const Eigen::ArrayXXd a = materialize(f);
  Eigen::ArrayXXd b(a.rows(), a.cols());
  for (Eigen::Index i = a.rows() - 1; i >= 0; --i)
    for (Eigen::Index j = a.cols() - 1; j >= 0; --j)
      b(i, j) = f.log_weight({box.lo.x + i, box.lo.y + j});
  CHECK((a == b).all());
  CHECK(a.rows() == 13);
  CHECK(a(4, 0) == f.log_weight({1, 2}));
}

TEST_CASE("small shapes stay finite") {
  const WeightField f(0.1, 3);
  for (std::size_t i = 0; i < 100000; ++i) REQUIRE(std::isfinite(f.log_weight(spread(i))));
}
