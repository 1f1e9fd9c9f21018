#pragma once

#include <compare>
#include <cstdint>
#include <vector>

namespace polymer {

/// Vertex of Z^2. Level is the anti-diagonal index x + y.
struct LatticePoint {
  std::int64_t x = 0;
  std::int64_t y = 0;

  constexpr std::int64_t level() const noexcept { return x + y; }

  friend constexpr bool operator==(const LatticePoint&, const LatticePoint&) = default;
  friend constexpr LatticePoint operator+(LatticePoint a, LatticePoint b) noexcept {
    return {a.x + b.x, a.y + b.y};
  }
  friend constexpr LatticePoint operator-(LatticePoint a, LatticePoint b) noexcept {
    return {a.x - b.x, a.y - b.y};
  }
};

inline constexpr LatticePoint e1{1, 0};
inline constexpr LatticePoint e2{0, 1};

/// (a, a)
constexpr LatticePoint diag(std::int64_t a) noexcept { return {a, a}; }
/// (a, -a)
constexpr LatticePoint antidiag(std::int64_t a) noexcept { return {a, -a}; }

/// Coordinatewise partial order.
constexpr bool dominated_by(LatticePoint p, LatticePoint q) noexcept {
  return p.x <= q.x && p.y <= q.y;
}

/// Closed range of x coordinates on one anti-diagonal. Unbounded ends use
/// the sentinels below, which leave headroom for offset arithmetic.
struct XRange {
  static constexpr std::int64_t kNegInf = INT64_MIN / 4;
  static constexpr std::int64_t kPosInf = INT64_MAX / 4;

  std::int64_t lo = 0;
  std::int64_t hi = -1;

  constexpr bool empty() const noexcept { return lo > hi; }
  constexpr bool bounded() const noexcept { return lo > kNegInf && hi < kPosInf; }
  constexpr bool contains(std::int64_t x) const noexcept { return lo <= x && x <= hi; }
  constexpr std::int64_t size() const noexcept { return empty() ? 0 : hi - lo + 1; }

  friend constexpr bool operator==(const XRange&, const XRange&) = default;
};

constexpr XRange intersect(XRange a, XRange b) noexcept {
  return {a.lo > b.lo ? a.lo : b.lo, a.hi < b.hi ? a.hi : b.hi};
}

enum class LineKind { point, segment, complement, full };

/// A subset of the anti-diagonal through `anchor`:
///   point       {anchor}
///   segment     {anchor + (j,-j) : |j| <= floor(halfwidth)}
///   complement  the rest of the anti-diagonal
///   full        the whole anti-diagonal
struct LineSpec {
  LatticePoint anchor;
  LineKind kind = LineKind::point;
  double halfwidth = 0.0;

  static LineSpec point(LatticePoint p) { return {p, LineKind::point, 0.0}; }
  static LineSpec segment(LatticePoint p, double h);
  static LineSpec complement(LatticePoint p, double h);
  static LineSpec full(LatticePoint p) { return {p, LineKind::full, 0.0}; }

  std::int64_t level() const noexcept { return anchor.level(); }
  bool bounded() const noexcept {
    return kind == LineKind::point || kind == LineKind::segment;
  }
  /// Member x coordinates as at most two disjoint ranges, sorted.
  std::vector<XRange> member_ranges() const;
  bool contains(LatticePoint p) const;
  /// Hull of the member x coordinates.
  XRange hull() const;
};

/// floor(h) for a nonnegative halfwidth, saturated to the sentinel range.
std::int64_t integer_halfwidth(double h);

/// Minkowski sum of segment [start, end] and the anti-diagonal segment of
/// halfwidth k through the origin. Requires start <= end.
struct Parallelogram {
  LatticePoint start;
  LatticePoint end;
  double halfwidth = 0.0;

  /// R^k_{a,b} with both ends on the main diagonal.
  static Parallelogram diagonal(std::int64_t a, std::int64_t b, double k) {
    return {diag(a), diag(b), k};
  }
};

/// Exact membership. Throws DegenerateRegion when start == end.
bool contains(const Parallelogram& region, LatticePoint p);

/// x-range of region ∩ {level}, empty when the level misses the region.
XRange level_slice(const Parallelogram& region, std::int64_t level);

/// Points at `level` that reach some member of `target` by up-right steps,
/// sorted by x. Throws InfeasibleQuery when the slice is infinite.
std::vector<LatticePoint> cone_slice(const LineSpec& target, std::int64_t level);

/// x-range of the backward cone of `target`'s hull at `level`.
XRange backward_cone(const LineSpec& target, std::int64_t level);
/// x-range of the forward cone of `source`'s hull at `level`.
XRange forward_cone(const LineSpec& source, std::int64_t level);

/// True when some target member dominates some source member.
bool feasible(const LineSpec& source, const LineSpec& target);

}  // namespace polymer
