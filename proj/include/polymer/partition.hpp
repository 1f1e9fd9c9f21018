#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "polymer/disorder.hpp"
#include "polymer/errors.hpp"
#include "polymer/geometry.hpp"
#include "polymer/log_value.hpp"

namespace polymer {

// Partition functions of up-right paths. A path's weight is the product of
// the weights of its vertices, divided by the weight of its final vertex.
// All sums are taken in the log domain, level by level along anti-diagonals.

enum class RestrictionKind { none, in, out, exit, touch };

/// Path ensemble relative to a parallelogram:
///   in     every vertex inside the region
///   out    every vertex outside the region
///   exit   some vertex outside (endpoints must lie inside)
///   touch  some vertex inside
struct Restriction {
  RestrictionKind kind = RestrictionKind::none;
  Parallelogram region{};

  static Restriction none() { return {}; }
  static Restriction in(Parallelogram r) { return {RestrictionKind::in, r}; }
  static Restriction out(Parallelogram r) { return {RestrictionKind::out, r}; }
  static Restriction exit(Parallelogram r) { return {RestrictionKind::exit, r}; }
  static Restriction touch(Parallelogram r) { return {RestrictionKind::touch, r}; }
};

struct PartitionQuery {
  LineSpec source;
  LineSpec target;
  Restriction restriction{};
};

struct TouchOut {
  LogValue touch;
  LogValue out;
};

struct InExit {
  LogValue in;
  LogValue exit;
};

/// log Z_{u, target} for u = (r + j, r - j) on the anti-diagonal through (r, r).
struct ProfileResult {
  std::int64_t line = 0;          ///< r; the line sits at level 2r
  std::int64_t anchor_level = 0;  ///< 2r
  std::vector<std::int64_t> offsets;
  std::vector<LogValue> logz;
  std::int64_t argmax_offset = 0;

  /// Index of offset j in the lists, or -1.
  std::ptrdiff_t index_of(std::int64_t j) const noexcept {
    if (offsets.empty() || j < offsets.front() || j > offsets.back()) return -1;
    return static_cast<std::ptrdiff_t>(j - offsets.front());
  }
};

enum class EventKind { B, C };

struct EventClass {
  std::int64_t j = 1;
  EventKind kind = EventKind::C;
  double gap = 0.0;  ///< log Z at the maximizer minus the window maximum
};

namespace detail {

/// Per-level x-ranges of the cells a sweep has to visit.
struct SweepPlan {
  std::int64_t first_level = 0;
  std::int64_t last_level = 0;
  std::vector<XRange> ranges;

  const XRange& at(std::int64_t level) const { return ranges[level - first_level]; }
};

SweepPlan plan_forward(const LineSpec& source, const LineSpec& target);

/// Exact slices region ∩ L for every level of a plan.
struct RegionSlices {
  std::int64_t first_level = 0;
  std::vector<XRange> slices;

  RegionSlices(const Parallelogram& region, const SweepPlan& plan);
  bool contains(LatticePoint p) const { return slices[p.level() - first_level].contains(p.x); }
};

void validate_exit(const PartitionQuery& q);

struct SweepTotals {
  double layer0 = kLogZero<double>;
  double layer1 = kLogZero<double>;
};

struct NoHook {
  void operator()(LatticePoint, double) const noexcept {}
};

/// One forward pass.
///
/// Plain mode keeps one layer; when `region` is set, a cell is admissible iff
/// its membership equals `region_sense`, and inadmissible cells carry zero
/// mass. Flagged mode keeps two layers, layer 0 for paths that have not yet
/// visited a marked cell and layer 1 for those that have; a cell is marked
/// iff its membership equals `region_sense`.
///
/// `hook(p, v)` sees log(F(p)/Y_p) for every visited cell (layer 0).
template <bool Flagged, LogWeightField F, class Hook = NoHook>
SweepTotals forward_sweep(const F& field, const LineSpec& source, const LineSpec& target,
                          const SweepPlan& plan, const RegionSlices* region, bool region_sense,
                          Hook&& hook = {}) {
  constexpr double neg_inf = kLogZero<double>;
  SweepTotals totals;
  Eigen::ArrayXd prev0, cur0, prev1, cur1;
  std::int64_t prev_lo = 0;

  for (std::int64_t level = plan.first_level; level <= plan.last_level; ++level) {
    const XRange range = plan.at(level);
    const Eigen::Index width = static_cast<Eigen::Index>(range.size());
    // One sentinel cell on each side keeps predecessor lookups branch-free.
    cur0.setConstant(width + 2, neg_inf);
    if constexpr (Flagged) cur1.setConstant(width + 2, neg_inf);
    const bool first = level == plan.first_level;
    const bool last = level == plan.last_level;

    for (Eigen::Index i = 0; i < width; ++i) {
      const LatticePoint p{range.lo + i, level - (range.lo + i)};
      double in0 = neg_inf;
      double in1 = neg_inf;
      if (first) {
        if (source.contains(p)) in0 = 0.0;
      } else {
        // Cell ranges move by at most one per level, so both predecessors
        // fall inside the padded previous buffer.
        const Eigen::Index left = p.x - prev_lo;  // p - e1, padded index
        const Eigen::Index down = left + 1;       // p - e2
        in0 = log_add_exp(prev0(left), prev0(down));
        if constexpr (Flagged) in1 = log_add_exp(prev1(left), prev1(down));
      }

      if constexpr (!Flagged) {
        if (region && region->contains(p) != region_sense) in0 = neg_inf;
        hook(p, in0);
        if (in0 != neg_inf) cur0(i + 1) = field.log_weight(p) + in0;
      } else {
        if (region->contains(p) == region_sense) {
          in1 = log_add_exp(in0, in1);
          in0 = neg_inf;
        }
        hook(p, in0);
        if (in0 != neg_inf || in1 != neg_inf) {
          const double lw = field.log_weight(p);
          cur0(i + 1) = lw + in0;
          cur1(i + 1) = lw + in1;
        }
      }

      if (last && target.contains(p)) {
        totals.layer0 = log_add_exp(totals.layer0, in0);
        if constexpr (Flagged) totals.layer1 = log_add_exp(totals.layer1, in1);
      }
    }
    std::swap(prev0, cur0);
    if constexpr (Flagged) std::swap(prev1, cur1);
    prev_lo = range.lo;
  }
  return totals;
}

}  // namespace detail

/// Partition function of the query, in the log domain. -inf when no
/// admissible path exists. Throws InfeasibleQuery when no target member
/// dominates a source member or the path set is unbounded.
template <LogWeightField F>
LogValue log_partition(const F& field, const PartitionQuery& q) {
  const detail::SweepPlan plan = detail::plan_forward(q.source, q.target);
  switch (q.restriction.kind) {
    case RestrictionKind::none:
      return {detail::forward_sweep<false>(field, q.source, q.target, plan, nullptr, true).layer0};
    case RestrictionKind::in:
    case RestrictionKind::out: {
      const detail::RegionSlices slices(q.restriction.region, plan);
      const bool inside = q.restriction.kind == RestrictionKind::in;
      return {detail::forward_sweep<false>(field, q.source, q.target, plan, &slices, inside).layer0};
    }
    case RestrictionKind::touch: {
      const detail::RegionSlices slices(q.restriction.region, plan);
      return {detail::forward_sweep<true>(field, q.source, q.target, plan, &slices, true).layer1};
    }
    case RestrictionKind::exit: {
      detail::validate_exit(q);
      const detail::RegionSlices slices(q.restriction.region, plan);
      return {detail::forward_sweep<true>(field, q.source, q.target, plan, &slices, false).layer1};
    }
  }
  return {};
}

/// Touch and out components from a single two-layer pass.
template <LogWeightField F>
TouchOut touch_out_decomposition(const F& field, const LineSpec& source, const LineSpec& target,
                                 const Parallelogram& region) {
  const detail::SweepPlan plan = detail::plan_forward(source, target);
  const detail::RegionSlices slices(region, plan);
  const auto t = detail::forward_sweep<true>(field, source, target, plan, &slices, true);
  return {{t.layer1}, {t.layer0}};
}

/// In and exit components from a single two-layer pass.
template <LogWeightField F>
InExit in_exit_decomposition(const F& field, const LineSpec& source, const LineSpec& target,
                             const Parallelogram& region) {
  detail::validate_exit({source, target, Restriction::exit(region)});
  const detail::SweepPlan plan = detail::plan_forward(source, target);
  const detail::RegionSlices slices(region, plan);
  const auto t = detail::forward_sweep<true>(field, source, target, plan, &slices, false);
  return {{t.layer0}, {t.layer1}};
}

/// log Z_{source, (m,m)} for m = 0..n_max from one forward pass towards
/// (n_max, n_max); entries below the source level are -inf.
template <LogWeightField F>
std::vector<double> diagonal_free_energies(const F& field, const LineSpec& source,
                                           std::int64_t n_max) {
  std::vector<double> out(static_cast<std::size_t>(n_max + 1), kLogZero<double>);
  const LineSpec target = LineSpec::point(diag(n_max));
  const detail::SweepPlan plan = detail::plan_forward(source, target);
  detail::forward_sweep<false>(field, source, target, plan, nullptr, true,
                               [&](LatticePoint p, double v) {
                                 if (p.x == p.y) out[static_cast<std::size_t>(p.x)] = v;
                               });
  return out;
}

/// Ties: smallest |j|, then smallest j.
std::int64_t profile_argmax(std::span<const std::int64_t> offsets, std::span<const LogValue> logz);

/// log Z_{u, target} for every u on the anti-diagonal through (r, r) that can
/// reach the target, from one backward pass.
template <LogWeightField F>
ProfileResult line_profile(const F& field, std::int64_t r, const LineSpec& target) {
  constexpr double neg_inf = kLogZero<double>;
  const std::int64_t base = 2 * r;
  const std::int64_t lt = target.level();
  if (base > lt) throw InfeasibleQuery("profile line lies above the target");
  if (!target.bounded()) throw InfeasibleQuery("profile target must be bounded");
  if (target.hull().empty()) throw InfeasibleQuery("profile target has no members");

  // G(p) = sum over paths p -> target of the weights of all but the last vertex.
  Eigen::ArrayXd next, cur;
  std::int64_t next_lo = 0;
  for (std::int64_t level = lt; level >= base; --level) {
    const XRange range = backward_cone(target, level);
    const Eigen::Index width = static_cast<Eigen::Index>(range.size());
    cur.setConstant(width + 2, neg_inf);
    for (Eigen::Index i = 0; i < width; ++i) {
      const LatticePoint p{range.lo + i, level - (range.lo + i)};
      if (level == lt) {
        if (target.contains(p)) cur(i + 1) = 0.0;
        continue;
      }
      const Eigen::Index right = p.x + 1 - next_lo + 1;  // p + e1
      const Eigen::Index up = right - 1;                 // p + e2
      const double out = log_add_exp(next(right), next(up));
      if (out != neg_inf) cur(i + 1) = field.log_weight(p) + out;
    }
    std::swap(next, cur);
    next_lo = range.lo;
  }

  ProfileResult res;
  res.line = r;
  res.anchor_level = base;
  const XRange range = backward_cone(target, base);
  for (std::int64_t x = range.lo; x <= range.hi; ++x) {
    res.offsets.push_back(x - r);
    res.logz.push_back({next(x - range.lo + 1)});
  }
  res.argmax_offset = profile_argmax(res.offsets, res.logz);
  return res;
}

/// 1 v floor(log(j)^10)
std::int64_t event_scale(std::int64_t j);

/// Displacement bin j and B/C classification of the profile maximizer with
/// bin width k_a * r^(2/3). B requires the maximizer to beat every point of
/// the window |offset| <= 5 * s * r^(2/3) by at least sqrt(s) * r^(1/3),
/// where s = event_scale(j).
EventClass classify_event(const ProfileResult& profile, std::int64_t r, double k_a);

}  // namespace polymer
