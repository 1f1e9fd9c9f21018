#include <doctest.h>

#include <cmath>

#include "polymer/disorder.hpp"
#include "polymer/oracle.hpp"
#include "polymer/partition.hpp"

using namespace polymer;

namespace {

double lz(const auto& field, LineSpec s, LineSpec t, Restriction r = {}) {
  return log_partition(field, PartitionQuery{s, t, r}).v;
}

const double kNegInf = kLogZero<double>;

}  // namespace

TEST_CASE("log_add_exp") {
  CHECK(log_add_exp(kNegInf, 2.5) == 2.5);
  CHECK(log_add_exp(2.5, kNegInf) == 2.5);
  CHECK(log_add_exp(kNegInf, kNegInf) == kNegInf);
  CHECK(log_add_exp(0.0, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(log_add_exp(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(log_add_exp(1.0, 3.0) == log_add_exp(3.0, 1.0));
}

TEST_CASE("unit-weight path counts") {
  const ConstantField ones{};
  CHECK(lz(ones, LineSpec::point({0, 0}), LineSpec::point({0, 0})) == 0.0);
  CHECK(lz(ones, LineSpec::point({0, 0}), LineSpec::point({2, 2})) == doctest::Approx(std::log(6.0)).epsilon(1e-15));
  CHECK(lz(ones, LineSpec::full({0, 0}), LineSpec::point({1, 1})) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(lz(ones, LineSpec::point({0, 0}), LineSpec::point({8, 8})) == doctest::Approx(std::log(12870.0)).epsilon(1e-14));
}

TEST_CASE("single vertex path is log 1 on any field") {
  const WeightField f(1.0, 1);
  CHECK(lz(f, LineSpec::point({3, -2}), LineSpec::point({3, -2})) == 0.0);
}

TEST_CASE("endpoint weight is excluded") {
  const WeightField f(1.0, 8);
  const double expect = log_add_exp(f.log_weight({0, 0}) + f.log_weight({1, 0}),
                                    f.log_weight({0, 0}) + f.log_weight({0, 1}));
  CHECK(lz(f, LineSpec::point({0, 0}), LineSpec::point({1, 1})) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("infeasible queries throw") {
  const ConstantField ones{};
  CHECK_THROWS_AS(lz(ones, LineSpec::point({0, 3}), LineSpec::point({2, 2})), InfeasibleQuery);
  CHECK_THROWS_AS(lz(ones, LineSpec::point({4, 4}), LineSpec::point({2, 2})), InfeasibleQuery);
  CHECK_THROWS_AS(lz(ones, LineSpec::full({0, 0}), LineSpec::full({4, 4})), InfeasibleQuery);
}

TEST_CASE("in(R) with R covering the cone equals the unrestricted value bit for bit") {
  const WeightField f(1.0, 77);
  const auto R = Parallelogram::diagonal(-2, 12, 30.0);
  for (auto s : {LineSpec::point({0, 0}), LineSpec::full({0, 0}), LineSpec::segment({1, 1}, 2.0)}) {
    const double free = lz(f, s, LineSpec::point({10, 10}));
    CHECK(lz(f, s, LineSpec::point({10, 10}), Restriction::in(R)) == free);
  }
}

TEST_CASE("touch/out decomposition edge cases") {
  const WeightField f(2.0, 3);
  const auto s = LineSpec::point({0, 0});
  const auto t = LineSpec::point({6, 6});
  const double free = lz(f, s, t);
  const auto far = touch_out_decomposition(f, s, t, Parallelogram::diagonal(100, 110, 1.0));
  CHECK(far.touch.v == kNegInf);
  CHECK(far.out.v == free);
  const auto all = touch_out_decomposition(f, s, t, Parallelogram::diagonal(-1, 8, 20.0));
  CHECK(all.out.v == kNegInf);
  CHECK(all.touch.v == free);
}

TEST_CASE("random 6x6 field: touch and out match enumeration") {
  const WeightField f(1.0, 606);
  const auto R = Parallelogram::diagonal(1, 4, 1.0);
  const auto s = LineSpec::point({0, 0});
  const auto t = LineSpec::point({6, 6});
  const auto d = touch_out_decomposition(f, s, t, R);
  const auto touch = brute_force_log_partition(f, {s, t, Restriction::touch(R)});
  const auto out = brute_force_log_partition(f, {s, t, Restriction::out(R)});
  CHECK(log_domain_error(d.touch.v, touch) <= 1e-10);
  CHECK(log_domain_error(d.out.v, out) <= 1e-10);
}

TEST_CASE("oracle agreement for every restriction kind") {
  const auto report = verify_oracle(10, 100, 123);
  CHECK(report.passed);
  CHECK(report.max_error <= 1e-10);
  for (int k = 0; k < 5; ++k) CHECK(report.per_kind[k] == 20);
  const auto unit = verify_oracle(4, 25, 5, OracleSurrogate::unit_weights);
  CHECK(unit.passed);
}

TEST_CASE("decompositions on random fields") {
  for (int trial = 0; trial < 20; ++trial) {
    Substream s(hash_combine(555, trial));
    const WeightField f(1.0, s.next_u64());
    const std::int64_t n = 16 + static_cast<std::int64_t>(s.next_below(32));
    const std::int64_t a = static_cast<std::int64_t>(s.next_below(static_cast<std::uint64_t>(n / 2)));
    const std::int64_t b = a + 2 + static_cast<std::int64_t>(s.next_below(static_cast<std::uint64_t>(n - a - 1)));
    const double k = 0.5 + 0.25 * static_cast<double>(s.next_below(20));
    const auto R = Parallelogram::diagonal(a, b, k);

    const auto src = LineSpec::full({0, 0});
    const auto tgt = LineSpec::point({n, n});
    const auto to = touch_out_decomposition(f, src, tgt, R);
    CHECK(std::abs(log_add_exp(to.touch.v, to.out.v) - lz(f, src, tgt)) <= 1e-12 * std::max(1.0, std::abs(lz(f, src, tgt))));

    const auto ss = LineSpec::segment(diag(a), std::floor(k));
    const auto ts = LineSpec::segment(diag(b), std::floor(k));
    const auto ie = in_exit_decomposition(f, ss, ts, R);
    const double seg = lz(f, ss, ts);
    CHECK(std::abs(log_add_exp(ie.in.v, ie.exit.v) - seg) <= 1e-12 * std::max(1.0, std::abs(seg)));
    CHECK(ie.in.v <= seg);
  }
}

TEST_CASE("restriction monotonicity") {
  const WeightField f(1.0, 19);
  const auto s = LineSpec::full({0, 0});
  const auto t = LineSpec::point({20, 20});
  const double free = lz(f, s, t);
  for (double k : {0.0, 1.0, 3.5, 8.0}) {
    const auto R = Parallelogram::diagonal(2, 15, k);
    CHECK(lz(f, s, t, Restriction::in(R)) <= free);
    CHECK(lz(f, s, t, Restriction::out(R)) <= free);
    CHECK(lz(f, s, t, Restriction::touch(R)) <= free);
  }
}

TEST_CASE("superadditivity holds exactly") {
  Substream s(404);
  const WeightField f(1.0, 404);
  for (int trial = 0; trial < 100; ++trial) {
    const LatticePoint u{static_cast<std::int64_t>(s.next_below(5)), static_cast<std::int64_t>(s.next_below(5))};
    const LatticePoint w = u + LatticePoint{static_cast<std::int64_t>(s.next_below(20)), static_cast<std::int64_t>(s.next_below(20))};
    const LatticePoint v = w + LatticePoint{static_cast<std::int64_t>(s.next_below(20)), static_cast<std::int64_t>(s.next_below(20))};
    const double uv = lz(f, LineSpec::point(u), LineSpec::point(v));
    const double uw = lz(f, LineSpec::point(u), LineSpec::point(w));
    const double wv = lz(f, LineSpec::point(w), LineSpec::point(v));
    CHECK(uv >= uw + wv);
  }
}

TEST_CASE("translation covariance is bit-identical") {
  const WeightField f(1.5, 12);
  const LatticePoint shift{7, -3};
  const ShiftedField<WeightField> g{f, shift};
  const auto R = Parallelogram::diagonal(1, 9, 2.5);
  const Parallelogram Rs{R.start - shift, R.end - shift, R.halfwidth};
  for (auto kind : {RestrictionKind::none, RestrictionKind::in, RestrictionKind::out, RestrictionKind::touch}) {
    const Restriction r{kind, R};
    const Restriction rs{kind, Rs};
    const double a = lz(f, LineSpec::segment({0, 0}, 3), LineSpec::point({12, 12}), r);
    const double b = lz(g, LineSpec::segment(LatticePoint{0, 0} - shift, 3), LineSpec::point(LatticePoint{12, 12} - shift), rs);
    CHECK(a == b);
  }
}

TEST_CASE("diagonal free energies match individual queries") {
  const WeightField f(1.0, 21);
  const auto d = diagonal_free_energies(f, LineSpec::full({0, 0}), 40);
  REQUIRE(d.size() == 41);
  for (std::int64_t m : {0, 1, 7, 40})
    CHECK(d[static_cast<std::size_t>(m)] == doctest::Approx(lz(f, LineSpec::full({0, 0}), LineSpec::point(diag(m)))).epsilon(1e-14));
}

TEST_CASE("large sweeps stay finite") {
  const WeightField f(0.1, 2);
  const auto d = diagonal_free_energies(f, LineSpec::point({0, 0}), 512);
  for (double v : d) REQUIRE(std::isfinite(v));
}

TEST_CASE("line profiles") {
  SUBCASE("profile at the target level is the target itself") {
    const WeightField f(1.0, 3);
    const auto p = line_profile(f, 5, LineSpec::point({5, 5}));
    REQUIRE(p.offsets.size() == 1);
    CHECK(p.offsets[0] == 0);
    CHECK(p.logz[0].v == 0.0);
    CHECK(p.argmax_offset == 0);
  }
  SUBCASE("unit weights: path counts from the line through (1,1) to (3,3)") {
    const auto p = line_profile(ConstantField{}, 1, LineSpec::point({3, 3}));
    REQUIRE(p.offsets == std::vector<std::int64_t>{-2, -1, 0, 1, 2});
    const double counts[] = {1, 4, 6, 4, 1};
    for (int i = 0; i < 5; ++i) CHECK(p.logz[i].v == doctest::Approx(std::log(counts[i])));
    CHECK(p.argmax_offset == 0);
  }
  SUBCASE("random field: entries agree with point queries and sandwich the line-to-point value") {
    const WeightField f(1.0, 88);
    const std::int64_t r = 6, n = 20;
    const auto p = line_profile(f, r, LineSpec::point(diag(n)));
    double best = kNegInf;
    for (std::size_t i = 0; i < p.offsets.size(); ++i) {
      const LatticePoint u{r + p.offsets[i], r - p.offsets[i]};
      const double direct = lz(f, LineSpec::point(u), LineSpec::point(diag(n)));
      CHECK(std::abs(p.logz[i].v - direct) <= 1e-12 * std::max(1.0, std::abs(direct)));
      best = std::max(best, p.logz[i].v);
    }
    CHECK(p.logz[static_cast<std::size_t>(p.index_of(p.argmax_offset))].v == best);
    const double line = lz(f, LineSpec::full(diag(r)), LineSpec::point(diag(n)));
    CHECK(best <= line);
    CHECK(line <= best + std::log(static_cast<double>(p.offsets.size())));
  }
  CHECK_THROWS_AS(line_profile(ConstantField{}, 5, LineSpec::point({4, 4})), InfeasibleQuery);
}

TEST_CASE("argmax ties prefer small offsets") {
  const std::vector<std::int64_t> off{-2, -1, 0, 1, 2};
  CHECK(profile_argmax(off, std::vector<LogValue>{{1}, {3}, {2}, {3}, {1}}) == -1);
  CHECK(profile_argmax(off, std::vector<LogValue>{{5}, {3}, {2}, {3}, {5}}) == -2);
  CHECK(profile_argmax(off, std::vector<LogValue>{{5}, {3}, {5}, {3}, {5}}) == 0);
}

TEST_CASE("event scale and classification") {
  CHECK(event_scale(1) == 1);
  CHECK(event_scale(2) == 1);
  CHECK(event_scale(3) == 2);
  CHECK(event_scale(4) == 26);

  const std::int64_t r = 8;  // r^(2/3) = 4, r^(1/3) = 2
  SUBCASE("maximizer at the origin is C with zero gap") {
    ProfileResult p;
    for (std::int64_t j = -40; j <= 40; ++j) {
      p.offsets.push_back(j);
      p.logz.push_back({-std::abs(static_cast<double>(j))});
    }
    p.argmax_offset = 0;
    const auto ev = classify_event(p, r, 2.0);
    CHECK(ev.j == 1);
    CHECK(ev.gap == 0.0);
    CHECK(ev.kind == EventKind::C);
  }
  SUBCASE("maximizer beyond the window by a wide margin is B") {
    // Displacement 100 with bin width 20 * 4 gives j = 2, so the window is |o| <= 20.
    ProfileResult p;
    for (std::int64_t j = -60; j <= 60; ++j) {
      p.offsets.push_back(j);
      p.logz.push_back({j == 50 ? 0.0 : -5.0});
    }
    p.argmax_offset = 50;
    const auto ev = classify_event(p, r, 20.0);
    CHECK(ev.j == 2);
    CHECK(ev.gap >= 2.0);
    CHECK(ev.kind == EventKind::B);
  }
}
