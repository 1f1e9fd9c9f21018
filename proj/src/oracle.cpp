#include "polymer/oracle.hpp"

#include <cmath>
#include <sstream>

namespace polymer {
namespace {

const char* kind_name(RestrictionKind k) {
  switch (k) {
    case RestrictionKind::none: return "none";
    case RestrictionKind::in: return "in";
    case RestrictionKind::out: return "out";
    case RestrictionKind::exit: return "exit";
    case RestrictionKind::touch: return "touch";
  }
  return "?";
}

std::string describe(const LineSpec& l) {
  std::ostringstream os;
  static const char* kinds[] = {"point", "segment", "complement", "full"};
  os << kinds[static_cast<int>(l.kind)] << "(" << l.anchor.x << "," << l.anchor.y;
  if (l.kind == LineKind::segment || l.kind == LineKind::complement) os << ";" << l.halfwidth;
  os << ")";
  return os.str();
}

// Random halfwidth in [0, max) with a fractional part, so non-integer
// boundaries get exercised.
double random_halfwidth(Substream& s, double max) {
  return std::floor(s.next_open01() * max * 4.0) / 4.0;
}

std::int64_t random_between(Substream& s, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(s.next_below(static_cast<std::uint64_t>(hi - lo + 1)));
}

LineSpec random_line(Substream& s, LatticePoint anchor, bool allow_unbounded) {
  const auto pick = s.next_below(allow_unbounded ? 4 : 2);
  switch (pick) {
    case 0: return LineSpec::point(anchor);
    case 1: return LineSpec::segment(anchor, random_halfwidth(s, 3.0));
    case 2: return LineSpec::complement(anchor, random_halfwidth(s, 2.0));
    default: return LineSpec::full(anchor);
  }
}

PartitionQuery random_query(Substream& s, RestrictionKind kind, int max_level) {
  const std::int64_t lt = random_between(s, 1, max_level);
  const std::int64_t ls = random_between(s, 0, lt - 1);
  const std::int64_t width = (lt - ls) / 2 + 1;

  if (kind == RestrictionKind::exit) {
    // Region spans exactly the source and target levels; endpoints sit on
    // the spine so bounded segments of smaller halfwidth stay inside.
    const std::int64_t dx = random_between(s, 0, lt - ls);
    const std::int64_t ux = random_between(s, -2, 2);
    const LatticePoint u{ux, ls - ux};
    const LatticePoint v{u.x + dx, u.y + (lt - ls - dx)};
    const double k = random_halfwidth(s, 3.0);
    const double hs = std::floor(k * s.next_open01());
    const double ht = std::floor(k * s.next_open01());
    return {LineSpec::segment(u, hs), LineSpec::segment(v, ht),
            Restriction::exit({u, v, k})};
  }

  const std::int64_t sx = random_between(s, -width, width);
  const std::int64_t tx = random_between(s, -width, width) + (lt - ls) / 2;
  const bool source_unbounded = s.next_below(3) == 0;
  const LineSpec source = random_line(s, {sx, ls - sx}, source_unbounded);
  const LineSpec target = random_line(s, {tx, lt - tx}, source.bounded());

  Restriction restriction;
  restriction.kind = kind;
  if (kind != RestrictionKind::none) {
    const std::int64_t a = random_between(s, ls - 2, lt);
    const std::int64_t len = random_between(s, 1, lt - ls + 2);
    const std::int64_t ax = random_between(s, -width, width);
    const std::int64_t dx = random_between(s, 0, len);
    const LatticePoint u{ax, a - ax};
    restriction.region = {u, {u.x + dx, u.y + (len - dx)}, random_halfwidth(s, 4.0)};
  }
  return {source, target, restriction};
}

}  // namespace

double log_domain_error(double value, long double reference) {
  const bool a_zero = value == kLogZero<double>;
  const bool b_zero = reference == -std::numeric_limits<long double>::infinity();
  if (a_zero || b_zero) return a_zero == b_zero ? 0.0 : std::numeric_limits<double>::infinity();
  const long double diff = std::fabs(static_cast<long double>(value) - reference);
  return static_cast<double>(diff / std::max(1.0L, std::fabs(reference)));
}

OracleTrial oracle_trial(int max_level, std::uint64_t seed, int t, OracleSurrogate surrogate) {
  if (max_level < 1 || max_level > 16) throw Error("oracle max_level must be in [1, 16]");
  static const double shapes[] = {0.5, 1.0, 2.0, 0.25, 4.0};
  Substream s(hash_combine(seed, static_cast<std::uint64_t>(t)));
  OracleTrial trial;
  trial.kind = static_cast<RestrictionKind>(t % 5);
  PartitionQuery q;
  for (;;) {
    q = random_query(s, trial.kind, max_level);
    if (feasible(q.source, q.target)) break;
  }
  const double mu = shapes[s.next_below(5)];
  const WeightField field(mu, s.next_u64());

  if (surrogate == OracleSurrogate::unit_weights) {
    const ConstantField ones{};
    trial.value = log_partition(ones, q).v;
    trial.reference = brute_force_log_partition(ones, q);
  } else {
    trial.value = log_partition(field, q).v;
    trial.reference = brute_force_log_partition(field, q);
  }
  trial.error = log_domain_error(trial.value, trial.reference);
  std::ostringstream os;
  os << "trial " << t << " kind=" << kind_name(trial.kind) << " source=" << describe(q.source)
     << " target=" << describe(q.target) << " dp=" << trial.value
     << " enum=" << static_cast<double>(trial.reference);
  trial.description = os.str();
  return trial;
}

OracleReport verify_oracle(int max_level, int trials, std::uint64_t seed,
                           OracleSurrogate surrogate) {
  if (max_level < 1 || max_level > 16) throw Error("oracle max_level must be in [1, 16]");
  OracleReport report;
  report.trials = trials;
  report.max_level = max_level;
  for (int t = 0; t < trials; ++t) {
    const OracleTrial trial = oracle_trial(max_level, seed, t, surrogate);
    ++report.per_kind[t % 5];
    if (!(trial.error <= report.max_error)) {
      report.max_error = trial.error;
      report.worst_case = trial.description;
    }
  }
  report.passed = report.max_error <= 1e-10;
  return report;
}

}  // namespace polymer
