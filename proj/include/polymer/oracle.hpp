#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "polymer/disorder.hpp"
#include "polymer/geometry.hpp"
#include "polymer/partition.hpp"

namespace polymer {

// Brute-force reference: walks every up-right path explicitly, classifies it
// against the restriction and sums path weights in extended precision. Kept
// free of the level-sweep machinery so the two can check each other.

namespace oracle_detail {

struct PathState {
  bool any_in = false;
  bool any_out = false;
};

template <LogWeightField F>
class Enumerator {
 public:
  Enumerator(const F& field, const PartitionQuery& q) : field_(field), q_(q) {}

  long double run() {
    const std::int64_t ls = q_.source.level();
    const std::int64_t lt = q_.target.level();
    if (ls > lt) return -std::numeric_limits<long double>::infinity();
    // Start points: the source members that can reach the target hull.
    const XRange reach = backward_cone(q_.target, ls);
    for (const XRange& r : q_.source.member_ranges()) {
      const XRange starts = intersect(r, reach);
      if (!starts.bounded() && !starts.empty()) throw InfeasibleQuery("unbounded enumeration");
      for (std::int64_t x = starts.lo; x <= starts.hi; ++x) walk({x, ls - x}, 0.0L, {});
    }
    if (logs_.empty()) return -std::numeric_limits<long double>::infinity();
    const long double top = *std::max_element(logs_.begin(), logs_.end());
    long double sum = 0.0L;
    for (long double v : logs_) sum += std::exp(v - top);
    return top + std::log(sum);
  }

  std::size_t paths() const noexcept { return logs_.size(); }

 private:
  void walk(LatticePoint p, long double acc, PathState st) {
    if (!backward_cone(q_.target, p.level()).contains(p.x)) return;
    if (q_.restriction.kind != RestrictionKind::none) {
      if (contains(q_.restriction.region, p))
        st.any_in = true;
      else
        st.any_out = true;
    }
    if (p.level() == q_.target.level()) {
      if (q_.target.contains(p) && admitted(st)) logs_.push_back(acc);
      return;
    }
    const long double next = acc + static_cast<long double>(field_.log_weight(p));
    walk(p + e1, next, st);
    walk(p + e2, next, st);
  }

  bool admitted(const PathState& st) const {
    switch (q_.restriction.kind) {
      case RestrictionKind::none: return true;
      case RestrictionKind::in: return !st.any_out;
      case RestrictionKind::out: return !st.any_in;
      case RestrictionKind::touch: return st.any_in;
      case RestrictionKind::exit: return st.any_out;
    }
    return false;
  }

  const F& field_;
  const PartitionQuery& q_;
  std::vector<long double> logs_;
};

}  // namespace oracle_detail

/// log of the partition function by explicit path enumeration.
template <LogWeightField F>
long double brute_force_log_partition(const F& field, const PartitionQuery& q) {
  oracle_detail::Enumerator<F> e(field, q);
  return e.run();
}

/// |a - b| / max(1, |b|) with matching -inf values counting as agreement.
double log_domain_error(double value, long double reference);

struct OracleReport {
  int trials = 0;
  int max_level = 0;
  double max_error = 0.0;
  std::string worst_case;
  int per_kind[5] = {0, 0, 0, 0, 0};  ///< trials per RestrictionKind
  bool passed = false;
};

enum class OracleSurrogate { none, unit_weights };

struct OracleTrial {
  RestrictionKind kind = RestrictionKind::none;
  double value = 0.0;
  long double reference = 0.0L;
  double error = 0.0;
  std::string description;
};

/// Trial t of the seeded sequence: restriction kind t mod 5, a random query
/// and a field with shape drawn from {0.5, 1, 2, 0.25, 4}.
OracleTrial oracle_trial(int max_level, std::uint64_t seed, int t,
                         OracleSurrogate surrogate = OracleSurrogate::none);

/// Random (field, query, region) triples compared against enumeration.
/// Trial t uses restriction kind t mod 5, so every kind is covered once
/// trials >= 5. Fails when the error exceeds 1e-10.
OracleReport verify_oracle(int max_level, int trials, std::uint64_t seed,
                           OracleSurrogate surrogate = OracleSurrogate::none);

}  // namespace polymer
