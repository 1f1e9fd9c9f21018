#include "polymer/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "polymer/errors.hpp"

namespace polymer {
namespace {

using i128 = __int128;

// Exact test of c <= k * s for integers c >= 0, s > 0 and a finite double
// k >= 0. k is split as m * 2^e with an integer mantissa m, so the
// comparison reduces to integer arithmetic. Coordinates are assumed to be
// below 2^28 in magnitude, which bounds c and s well inside 128 bits.
bool leq_scaled(std::int64_t c, std::int64_t s, double k) {
  if (c == 0) return true;
  if (k == 0.0) return false;
  int exp2 = 0;
  const double frac = std::frexp(k, &exp2);  // k = frac * 2^exp2, frac in [0.5, 1)
  const auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
  const int e = exp2 - 53;  // k = mant * 2^e exactly
  if (e >= 0) {
    if (e > 60) return true;
    return static_cast<i128>(c) <= (static_cast<i128>(mant) * s) << e;
  }
  const int shift = -e;
  if (shift > 80) return false;  // k * s < 1 <= c
  return (static_cast<i128>(c) << shift) <= static_cast<i128>(mant) * s;
}

std::int64_t sat_add(std::int64_t a, std::int64_t b) {
  if (a <= XRange::kNegInf || b <= XRange::kNegInf) return XRange::kNegInf;
  if (a >= XRange::kPosInf || b >= XRange::kPosInf) return XRange::kPosInf;
  const std::int64_t r = a + b;
  if (r < XRange::kNegInf) return XRange::kNegInf;
  if (r > XRange::kPosInf) return XRange::kPosInf;
  return r;
}

void require_valid(const Parallelogram& r) {
  if (!dominated_by(r.start, r.end))
    throw DegenerateRegion("parallelogram start must be dominated by end");
  if (r.start == r.end)
    throw DegenerateRegion("parallelogram spine is parallel to its anti-diagonal side");
  if (!(r.halfwidth >= 0.0) || !std::isfinite(r.halfwidth))
    throw DegenerateRegion("parallelogram halfwidth must be finite and nonnegative");
}

}  // namespace

std::int64_t integer_halfwidth(double h) {
  if (!(h >= 0.0)) return -1;
  if (h >= static_cast<double>(XRange::kPosInf)) return XRange::kPosInf;
  return static_cast<std::int64_t>(std::floor(h));
}

LineSpec LineSpec::segment(LatticePoint p, double h) { return {p, LineKind::segment, h}; }
LineSpec LineSpec::complement(LatticePoint p, double h) { return {p, LineKind::complement, h}; }

std::vector<XRange> LineSpec::member_ranges() const {
  const std::int64_t ax = anchor.x;
  switch (kind) {
    case LineKind::point:
      return {{ax, ax}};
    case LineKind::segment: {
      const std::int64_t k = integer_halfwidth(halfwidth);
      if (k < 0) return {};
      return {{sat_add(ax, -k), sat_add(ax, k)}};
    }
    case LineKind::complement: {
      const std::int64_t k = integer_halfwidth(halfwidth);
      if (k < 0) return {{XRange::kNegInf, XRange::kPosInf}};
      return {{XRange::kNegInf, sat_add(ax, -k - 1)}, {sat_add(ax, k + 1), XRange::kPosInf}};
    }
    case LineKind::full:
      return {{XRange::kNegInf, XRange::kPosInf}};
  }
  return {};
}

bool LineSpec::contains(LatticePoint p) const {
  if (p.level() != level()) return false;
  for (const XRange& r : member_ranges())
    if (r.contains(p.x)) return true;
  return false;
}

XRange LineSpec::hull() const {
  const auto ranges = member_ranges();
  if (ranges.empty()) return {};
  return {ranges.front().lo, ranges.back().hi};
}

bool contains(const Parallelogram& region, LatticePoint p) {
  require_valid(region);
  const LatticePoint w = region.end - region.start;
  const LatticePoint q = p - region.start;
  // With d = (k,-k): det(w,d) = -k*S, det(q,d) = -k*(qx+qy), S = wx+wy > 0.
  // t = (qx+qy)/S and s = -det(w,q)/(k*S).
  const std::int64_t s_den = w.x + w.y;
  const std::int64_t t_num = q.x + q.y;
  if (t_num < 0 || t_num > s_den) return false;
  const std::int64_t cross = w.x * q.y - w.y * q.x;
  return leq_scaled(std::llabs(cross), s_den, region.halfwidth);
}

XRange level_slice(const Parallelogram& region, std::int64_t level) {
  require_valid(region);
  const LatticePoint w = region.end - region.start;
  const std::int64_t s_den = w.x + w.y;
  const std::int64_t dl = level - region.start.level();
  if (dl < 0 || dl > s_den) return {};
  // Members satisfy |wx*dl - S*qx| <= k*S; the set of qx is an interval
  // around wx*dl/S. Start from a floating estimate and settle it exactly.
  const double centre = static_cast<double>(w.x) * static_cast<double>(dl) /
                        static_cast<double>(s_den);
  const double k = std::min(region.halfwidth, 1e12);
  auto member = [&](std::int64_t qx) {
    return leq_scaled(std::llabs(w.x * dl - s_den * qx), s_den, region.halfwidth);
  };
  std::int64_t lo = static_cast<std::int64_t>(std::ceil(centre - k));
  std::int64_t hi = static_cast<std::int64_t>(std::floor(centre + k));
  while (member(lo - 1)) --lo;
  while (lo <= hi + 1 && !member(lo)) ++lo;
  while (member(hi + 1)) ++hi;
  while (hi >= lo && !member(hi)) --hi;
  if (lo > hi) return {};
  return {region.start.x + lo, region.start.x + hi};
}

XRange backward_cone(const LineSpec& target, std::int64_t level) {
  const XRange h = target.hull();
  if (h.empty()) return {};
  // p = (x, level - x) <= (tx, lt - tx)  <=>  level - lt + tx <= x <= tx.
  return {sat_add(h.lo, level - target.level()), h.hi};
}

XRange forward_cone(const LineSpec& source, std::int64_t level) {
  const XRange h = source.hull();
  if (h.empty()) return {};
  // p >= (sx, ls - sx)  <=>  sx <= x <= level - ls + sx.
  return {h.lo, sat_add(h.hi, level - source.level())};
}

std::vector<LatticePoint> cone_slice(const LineSpec& target, std::int64_t level) {
  const std::int64_t lt = target.level();
  if (level > lt) return {};
  std::vector<LatticePoint> out;
  const std::int64_t drop = level - lt;
  // Union of per-range cones; the ranges are sorted and disjoint, so the
  // cones are sorted by lower end and merging keeps the output ordered.
  std::vector<XRange> cones;
  for (const XRange& r : target.member_ranges()) {
    XRange c{sat_add(r.lo, drop), r.hi};
    if (!c.bounded())
      throw InfeasibleQuery("cone slice of an unbounded target is infinite");
    if (!cones.empty() && c.lo <= cones.back().hi + 1)
      cones.back().hi = std::max(cones.back().hi, c.hi);
    else
      cones.push_back(c);
  }
  for (const XRange& c : cones)
    for (std::int64_t x = c.lo; x <= c.hi; ++x) out.push_back({x, level - x});
  return out;
}

bool feasible(const LineSpec& source, const LineSpec& target) {
  const std::int64_t gap = target.level() - source.level();
  if (gap < 0) return false;
  // s <= t on anti-diagonals `gap` apart  <=>  tx - gap <= sx <= tx.
  for (const XRange& t : target.member_ranges()) {
    const XRange reach{sat_add(t.lo, -gap), t.hi};
    for (const XRange& s : source.member_ranges())
      if (!intersect(reach, s).empty()) return true;
  }
  return false;
}

}  // namespace polymer
