#pragma once

#include <concepts>
#include <cstdint>
#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "polymer/geometry.hpp"

namespace polymer {

// ---------------------------------------------------------------------------
// Hashing and per-point substreams
//
// All randomness is derived from the SplitMix64 finalizer
//
//   mix64(z) = splitmix64 output function applied to z + 0x9e3779b97f4a7c15
//
// A substream with key K yields the counter-based sequence
// mix64(K + i * 0x9e3779b97f4a7c15), i = 0, 1, 2, ...  Archived seeds only
// reproduce if these constants and the sampler below stay untouched.
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// H(a, b): order-sensitive combination of two words.
constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(a) ^ (b + 0x632be59bd9b4e019ULL));
}

/// Key of the substream owned by lattice point p under `seed`.
constexpr std::uint64_t point_key(std::uint64_t seed, LatticePoint p) noexcept {
  return hash_combine(hash_combine(seed, static_cast<std::uint64_t>(p.x)),
                      static_cast<std::uint64_t>(p.y));
}

/// Counter-based uniform stream.
class Substream {
 public:
  explicit constexpr Substream(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t next_u64() noexcept { return mix64(key_ + kGolden * counter_++); }
  /// Uniform on the open interval (0, 1) with 53 random bits.
  constexpr double next_open01() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }
  /// Uniform integer in [0, bound), multiply-shift with rejection.
  std::uint64_t next_below(std::uint64_t bound) noexcept;
  /// Standard normal (Box-Muller, cosine branch only).
  double next_normal() noexcept;

  constexpr std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// log of a Gamma(shape, 1) variate drawn from `stream`.
///   shape == 1: inversion, G = -log U
///   shape >  1: Marsaglia-Tsang squeeze/rejection
///   shape <  1: G = G' * U^(1/shape) with G' ~ Gamma(shape + 1), in log form
double log_gamma_variate(double shape, Substream& stream);

// ---------------------------------------------------------------------------
// Weight fields
// ---------------------------------------------------------------------------

/// Anything that maps a lattice point to a log-weight.
template <class F>
concept LogWeightField = requires(const F& f, LatticePoint p) {
  { f.log_weight(p) } -> std::convertible_to<double>;
};

/// Inclusive lattice box [x0, x1] x [y0, y1].
struct Box {
  LatticePoint lo;
  LatticePoint hi;
};

/// Seeded i.i.d. inverse-gamma weights, evaluated lazily per point.
/// log_weight(p) = -log G with G ~ Gamma(mu, 1) drawn from p's substream.
class WeightField {
 public:
  WeightField(double mu, std::uint64_t seed, std::optional<Box> region_hint = std::nullopt);

  double mu() const noexcept { return mu_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::optional<Box>& region_hint() const noexcept { return region_hint_; }

  double log_weight(LatticePoint p) const {
    Substream s(point_key(seed_, p));
    return -log_gamma_variate(mu_, s);
  }

 private:
  double mu_;
  std::uint64_t seed_;
  std::optional<Box> region_hint_;
};

/// Independent field for replica `replica_index`: seed = H(master_seed, index).
WeightField replica_field(std::uint64_t master_seed, std::uint64_t replica_index, double mu);

/// Eager evaluation over a box; rows are x, columns are y.
template <LogWeightField F>
Eigen::ArrayXXd materialize(const F& field, const Box& box) {
  const Eigen::Index nx = box.hi.x - box.lo.x + 1;
  const Eigen::Index ny = box.hi.y - box.lo.y + 1;
  Eigen::ArrayXXd out(nx, ny);
  for (Eigen::Index j = 0; j < ny; ++j)
    for (Eigen::Index i = 0; i < nx; ++i)
      out(i, j) = field.log_weight({box.lo.x + i, box.lo.y + j});
  return out;
}

/// Eager evaluation over the field's region hint.
Eigen::ArrayXXd materialize(const WeightField& field);

// ---------------------------------------------------------------------------
// Test and experiment surrogates
// ---------------------------------------------------------------------------

/// Every weight equal to exp(value); value = 0 gives the all-ones field.
struct ConstantField {
  double value = 0.0;
  double log_weight(LatticePoint) const noexcept { return value; }
};

/// Field evaluated at p + offset.
template <LogWeightField F>
struct ShiftedField {
  F base;
  LatticePoint offset;
  double log_weight(LatticePoint p) const { return base.log_weight(p + offset); }
};

/// Weights below `split_level` come from `lower`, the rest from `upper`.
template <LogWeightField Lower, LogWeightField Upper>
struct BandSplitField {
  Lower lower;
  Upper upper;
  std::int64_t split_level;
  double log_weight(LatticePoint p) const {
    return p.level() < split_level ? lower.log_weight(p) : upper.log_weight(p);
  }
};

/// Dense table over a box; points outside the box use `outside`.
struct TableField {
  Box box;
  Eigen::ArrayXXd log_weights;
  double outside = 0.0;
  double log_weight(LatticePoint p) const {
    if (p.x < box.lo.x || p.x > box.hi.x || p.y < box.lo.y || p.y > box.hi.y) return outside;
    return log_weights(p.x - box.lo.x, p.y - box.lo.y);
  }
};

}  // namespace polymer
