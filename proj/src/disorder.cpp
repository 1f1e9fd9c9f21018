#include "polymer/disorder.hpp"

#include <cmath>
#include <numbers>

#include "polymer/errors.hpp"

namespace polymer {

std::uint64_t Substream::next_below(std::uint64_t bound) noexcept {
  // Lemire's nearly divisionless method.
  using u128 = unsigned __int128;
  u128 m = static_cast<u128>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      m = static_cast<u128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Substream::next_normal() noexcept {
  const double u1 = next_open01();
  const double u2 = next_open01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double log_gamma_variate(double shape, Substream& stream) {
  if (shape == 1.0) return std::log(-std::log(stream.next_open01()));
  if (shape < 1.0) {
    const double boosted = log_gamma_variate(shape + 1.0, stream);
    return boosted + std::log(stream.next_open01()) / shape;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = stream.next_normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = stream.next_open01();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
      return std::log(d) + std::log(v);
  }
}

WeightField::WeightField(double mu, std::uint64_t seed, std::optional<Box> region_hint)
    : mu_(mu), seed_(seed), region_hint_(region_hint) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw Error("weight field shape mu must be positive");
}

WeightField replica_field(std::uint64_t master_seed, std::uint64_t replica_index, double mu) {
  return WeightField(mu, hash_combine(master_seed, replica_index));
}

Eigen::ArrayXXd materialize(const WeightField& field) {
  if (!field.region_hint()) throw Error("weight field has no region hint to materialize");
  return materialize(field, *field.region_hint());
}

}  // namespace polymer
