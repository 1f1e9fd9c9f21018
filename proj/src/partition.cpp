#include "polymer/partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace polymer {
namespace detail {

SweepPlan plan_forward(const LineSpec& source, const LineSpec& target) {
  if (source.level() > target.level())
    throw InfeasibleQuery("source lies above the target");
  if (!feasible(source, target))
    throw InfeasibleQuery("no target member dominates a source member");
  SweepPlan plan;
  plan.first_level = source.level();
  plan.last_level = target.level();
  plan.ranges.reserve(static_cast<std::size_t>(plan.last_level - plan.first_level + 1));
  for (std::int64_t level = plan.first_level; level <= plan.last_level; ++level) {
    const XRange r = intersect(forward_cone(source, level), backward_cone(target, level));
    if (!r.bounded()) throw InfeasibleQuery("query admits infinitely many start or end points");
    plan.ranges.push_back(r);
  }
  return plan;
}

RegionSlices::RegionSlices(const Parallelogram& region, const SweepPlan& plan)
    : first_level(plan.first_level) {
  slices.reserve(plan.ranges.size());
  for (std::int64_t level = plan.first_level; level <= plan.last_level; ++level)
    slices.push_back(level_slice(region, level));
}

void validate_exit(const PartitionQuery& q) {
  const Parallelogram& r = q.restriction.region;
  const std::int64_t lo = r.start.level();
  const std::int64_t hi = r.end.level();
  for (const LineSpec* line : {&q.source, &q.target}) {
    if (!line->bounded())
      throw InfeasibleQuery("exit restriction needs bounded source and target");
    if (line->level() < lo || line->level() > hi)
      throw InfeasibleQuery("exit restriction needs endpoints between the region's end lines");
    const XRange slice = level_slice(r, line->level());
    const XRange hull = line->hull();
    if (!hull.empty() && (hull.lo < slice.lo || hull.hi > slice.hi))
      throw InfeasibleQuery("exit restriction needs endpoints inside the region");
  }
}

}  // namespace detail

std::int64_t profile_argmax(std::span<const std::int64_t> offsets, std::span<const LogValue> logz) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < offsets.size(); ++i) {
    const double a = logz[i].v;
    const double b = logz[best].v;
    if (a > b) {
      best = i;
    } else if (a == b) {
      const auto ai = std::llabs(offsets[i]);
      const auto bi = std::llabs(offsets[best]);
      if (ai < bi || (ai == bi && offsets[i] < offsets[best])) best = i;
    }
  }
  return offsets.empty() ? 0 : offsets[best];
}

std::int64_t event_scale(std::int64_t j) {
  if (j <= 1) return 1;
  const double v = std::floor(std::pow(std::log(static_cast<double>(j)), 10.0));
  return v < 1.0 ? 1 : static_cast<std::int64_t>(v);
}

EventClass classify_event(const ProfileResult& profile, std::int64_t r, double k_a) {
  const double rd = static_cast<double>(r);
  const double r23 = std::cbrt(rd * rd);
  const double r13 = std::cbrt(rd);
  EventClass ev;
  const double displacement = 2.0 * static_cast<double>(std::llabs(profile.argmax_offset));
  ev.j = static_cast<std::int64_t>(std::floor(displacement / (k_a * r23))) + 1;

  const std::int64_t s = event_scale(ev.j);
  const auto window = static_cast<std::int64_t>(std::floor(5.0 * static_cast<double>(s) * r23));
  double window_max = kLogZero<double>;
  double at_max = kLogZero<double>;
  for (std::size_t i = 0; i < profile.offsets.size(); ++i) {
    if (std::llabs(profile.offsets[i]) <= window)
      window_max = std::max(window_max, profile.logz[i].v);
    if (profile.offsets[i] == profile.argmax_offset) at_max = profile.logz[i].v;
  }
  ev.gap = window_max == kLogZero<double> ? std::numeric_limits<double>::infinity()
                                          : at_max - window_max;
  ev.kind = ev.gap >= std::sqrt(static_cast<double>(s)) * r13 ? EventKind::B : EventKind::C;
  return ev;
}

}  // namespace polymer
