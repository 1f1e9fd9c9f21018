#pragma once

#include <cmath>
#include <concepts>
#include <limits>

namespace polymer {

template <std::floating_point Scalar = double>
inline constexpr Scalar kLogZero = -std::numeric_limits<Scalar>::infinity();

/// log(e^a + e^b) = max(a,b) + log1p(exp(-|a-b|)); -inf is the identity.
template <std::floating_point Scalar>
inline Scalar log_add_exp(Scalar a, Scalar b) noexcept {
  if (a == kLogZero<Scalar>) return b;
  if (b == kLogZero<Scalar>) return a;
  const Scalar hi = a > b ? a : b;
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

/// Log of a nonnegative quantity; -inf encodes zero.
struct LogValue {
  double v = kLogZero<double>;

  bool is_zero() const noexcept { return v == kLogZero<double>; }
  bool is_finite() const noexcept { return std::isfinite(v); }

  friend LogValue combine(LogValue a, LogValue b) noexcept { return {log_add_exp(a.v, b.v)}; }
  friend bool operator==(const LogValue&, const LogValue&) = default;
};

}  // namespace polymer
