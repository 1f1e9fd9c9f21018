// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--cli PATH] [--work DIR] [criterion ...]
//
// With no criteria listed, all nine run. Exit status is nonzero when any
// selected criterion fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "polymer/config.hpp"
#include "polymer/nested.hpp"
#include "polymer/oracle.hpp"
#include "polymer/partition.hpp"
#include "polymer/records.hpp"
#include "polymer/runner.hpp"
#include "polymer/special_functions.hpp"
#include "polymer/statistics.hpp"

using namespace polymer;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path g_work = "acceptance_runs";
std::string g_cli;

int worker_count() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Parallel map over [0, n) with a fixed stride per worker.
template <class T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& f) {
  std::vector<T> out(n);
  const int threads = worker_count();
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = static_cast<std::size_t>(w); i < n; i += static_cast<std::size_t>(threads)) out[i] = f(i);
    });
  for (auto& t : pool) t.join();
  return out;
}

std::vector<ReplicaRecord> run_experiment(const std::string& name, const std::string& json) {
  const ExperimentConfig c = parse_config_text(json);
  const fs::path dir = g_work / name;
  RunOptions opts;
  opts.threads = worker_count();
  run(c, dir, opts);
  return read_records(dir / "records.jsonl");
}

std::string base_config(std::uint64_t seed, int replicas, const std::string& experiment) {
  return R"({"mu": 1.0, "master_seed": )" + std::to_string(seed) + R"(, "replicas": )" +
         std::to_string(replicas) + R"(, "experiment": )" + experiment + "}";
}

// 1 -------------------------------------------------------------------------
Outcome oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const OracleReport r = verify_oracle(12, 200, 20240601);
  const double dt = seconds_since(t0);
  bool all_kinds = true;
  for (int k : r.per_kind) all_kinds = all_kinds && k > 0;
  return {r.passed && all_kinds && dt <= 120.0,
          "max error " + fmt("%.3e", r.max_error) + ", all five kinds " + (all_kinds ? "yes" : "no") +
              ", " + fmt("%.1f s", dt)};
}

// 2 -------------------------------------------------------------------------
Outcome algebraic_identities() {
  double worst_touch = 0.0, worst_exit = 0.0;
  int super_fail = 0;
  for (int t = 0; t < 50; ++t) {
    Substream s(hash_combine(0xa1, static_cast<std::uint64_t>(t)));
    const WeightField f(1.0, s.next_u64());
    const std::int64_t n = 16 + static_cast<std::int64_t>(s.next_below(49));
    const std::int64_t a = static_cast<std::int64_t>(s.next_below(static_cast<std::uint64_t>(n / 2)));
    const std::int64_t b = a + 1 + static_cast<std::int64_t>(s.next_below(static_cast<std::uint64_t>(n - a)));
    const double k = 0.25 * static_cast<double>(1 + s.next_below(40));
    const auto R = Parallelogram::diagonal(a, b, k);

    const auto src = s.next_below(2) ? LineSpec::full({0, 0}) : LineSpec::point({0, 0});
    const auto tgt = LineSpec::point(diag(n));
    const auto to = touch_out_decomposition(f, src, tgt, R);
    const double total = log_partition(f, {src, tgt}).v;
    worst_touch = std::max(worst_touch, std::abs(log_add_exp(to.touch.v, to.out.v) - total));

    const auto ss = LineSpec::segment(diag(a), std::floor(k));
    const auto ts = LineSpec::segment(diag(b), std::floor(k));
    const auto ie = in_exit_decomposition(f, ss, ts, R);
    const double seg = log_partition(f, {ss, ts}).v;
    worst_exit = std::max(worst_exit, std::abs(log_add_exp(ie.in.v, ie.exit.v) - seg));
  }
  Substream s(0xa2);
  const WeightField f(1.0, 0xa3);
  const auto coord = [&](std::uint64_t m) { return static_cast<std::int64_t>(s.next_below(m)); };
  for (int t = 0; t < 100; ++t) {
    const LatticePoint u{coord(10), coord(10)};
    const LatticePoint w = u + LatticePoint{coord(27), coord(27)};
    const LatticePoint v = w + LatticePoint{coord(27), coord(27)};
    const double uv = log_partition(f, {LineSpec::point(u), LineSpec::point(v)}).v;
    const double uw = log_partition(f, {LineSpec::point(u), LineSpec::point(w)}).v;
    const double wv = log_partition(f, {LineSpec::point(w), LineSpec::point(v)}).v;
    if (!(uv >= uw + wv)) ++super_fail;
  }
  return {worst_touch <= 1e-12 && worst_exit <= 1e-12 && super_fail == 0,
          "touch/out " + fmt("%.2e", worst_touch) + ", in/exit " + fmt("%.2e", worst_exit) +
              ", superadditivity violations " + std::to_string(super_fail) + "/100"};
}

// 3 -------------------------------------------------------------------------
Outcome shape_centering() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::int64_t> ns{128, 256, 512};
  const double limits[] = {0.08, 0.06, 0.05};
  const double lambda = 3.926990817;
  const auto recs = run_experiment("c3_shape", base_config(3, 200, R"({"type":"shape","n_list":[128,256,512]})"));
  bool ok = true;
  std::ostringstream os;
  double prev = INFINITY;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    auto v = collect(recs, "logZ_0_" + std::to_string(ns[i]));
    for (auto& x : v) x /= static_cast<double>(ns[i]);
    const double dev = std::abs(sample_mean(v) - lambda);
    ok = ok && dev <= limits[i] && dev < prev;
    prev = dev;
    os << "n=" << ns[i] << " |dev| " << fmt("%.4f", dev) << " (limit " << limits[i] << "); ";
  }
  const double dt = seconds_since(t0);
  ok = ok && dt <= 600.0;
  os << fmt("%.1f s", dt);
  return {ok, os.str()};
}

// 4 -------------------------------------------------------------------------
Outcome variance_scaling() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::int64_t> ns{64, 128, 256, 512, 1024};
  const auto recs = run_experiment(
      "c4_variance", base_config(4, 500, R"({"type":"variance_scaling","n_list":[64,128,256,512,1024]})"));
  std::vector<std::pair<double, double>> pts;
  std::ostringstream os;
  for (auto n : ns) {
    const auto m = estimate_moments(recs, "logZ_L0_" + std::to_string(n));
    pts.emplace_back(static_cast<double>(n), m.variance);
    os << "var(" << n << ")=" << fmt("%.2f", m.variance) << " ";
  }
  const ExponentFit fit = fit_exponent(pts);
  const double dt = seconds_since(t0);
  os << "slope " << fmt("%.3f", fit.slope) << " (+/- " << fmt("%.3f", fit.stderr_slope) << "), "
     << fmt("%.1f s", dt);
  return {fit.slope >= 0.50 && fit.slope <= 0.85 && dt <= 1800.0, os.str()};
}

// 5 -------------------------------------------------------------------------
Outcome fluctuation_collapse() {
  const std::vector<std::int64_t> ns{128, 256, 512};
  std::string grid = "[";
  for (int i = -12; i <= 12; ++i) grid += (i > -12 ? "," : "") + fmt("%.2f", 0.25 * i);
  grid += "]";
  const auto recs = run_experiment(
      "c5_tails", base_config(5, 2000, R"({"type":"tails","n_list":[128,256,512],"t_grid":)" + grid + "}"));
  const double lambda = shape_diagonal(1.0, 1.0);
  std::vector<std::vector<double>> scaled;
  bool monotone = true;
  std::vector<double> g;
  for (int i = -12; i <= 12; ++i) g.push_back(0.25 * i);
  for (auto n : ns) {
    auto v = collect(recs, "logZ_L0_" + std::to_string(n));
    const double c = lambda * static_cast<double>(n), sc = std::cbrt(static_cast<double>(n));
    for (auto& x : v) x = (x - c) / sc;
    const auto curve = tail_curve(v, 0.0, 1.0, g);
    for (std::size_t i = 1; i < curve.size(); ++i)
      monotone = monotone && curve[i].probability <= curve[i - 1].probability;
    scaled.push_back(std::move(v));
  }
  const double d1 = ks_distance(scaled[0], scaled[1]);
  const double d2 = ks_distance(scaled[1], scaled[2]);
  return {d1 <= 0.1 && d2 <= 0.1 && monotone,
          "KS(128,256) " + fmt("%.4f", d1) + ", KS(256,512) " + fmt("%.4f", d2) + ", tails nonincreasing " +
              (monotone ? "yes" : "no")};
}

// 6 -------------------------------------------------------------------------
constexpr int kCovOuter = 10000;
constexpr int kCovInner = 8;

std::vector<NestedEstimate> nested_parallel(std::int64_t r, const std::vector<std::int64_t>& ns,
                                            std::uint64_t seed) {
  const auto per = parallel_map<std::vector<double>>(kCovOuter, [&](std::size_t o) {
    return conditional_covariance_sample(1.0, r, ns, kCovInner, seed, o);
  });
  std::vector<NestedEstimate> out;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    std::vector<double> v;
    v.reserve(per.size());
    for (const auto& p : per) v.push_back(p[k]);
    out.push_back(aggregate_nested(std::move(v)));
  }
  return out;
}

Outcome covariance_exponents() {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream os;
  const std::vector<std::int64_t> ns{64, 128, 256, 512, 1024};
  const auto by_n = nested_parallel(16, ns, 6);
  std::vector<std::pair<double, double>> pts_n;
  bool ok_b = true;
  os << "(b) r=16:";
  for (std::size_t k = 0; k < ns.size(); ++k) {
    os << " " << ns[k] << ":" << fmt("%.3f", by_n[k].estimate);
    if (by_n[k].estimate > 0.0)
      pts_n.emplace_back(static_cast<double>(ns[k]), by_n[k].estimate);
    else
      ok_b = false;
  }
  double slope_b = NAN;
  if (ok_b) slope_b = fit_exponent(pts_n).slope;
  ok_b = ok_b && slope_b >= -1.0 && slope_b <= -0.4;
  os << " slope " << fmt("%.3f", slope_b) << "; ";

  const std::vector<std::int64_t> rs{8, 16, 32, 64, 128};
  std::vector<double> cov_r;
  for (auto r : rs) {
    if (r == 16)
      cov_r.push_back(by_n[3].estimate);
    else
      cov_r.push_back(nested_parallel(r, {512}, 60 + static_cast<std::uint64_t>(r)).front().estimate);
  }
  bool ok_a = true;
  std::vector<std::pair<double, double>> pts_r;
  os << "(a) n=512:";
  for (std::size_t k = 0; k < rs.size(); ++k) {
    os << " " << rs[k] << ":" << fmt("%.3f", cov_r[k]);
    ok_a = ok_a && cov_r[k] > 0.0 && (k == 0 || cov_r[k] > cov_r[k - 1]);
    if (cov_r[k] > 0.0) pts_r.emplace_back(static_cast<double>(rs[k]), cov_r[k]);
  }
  double slope_a = NAN;
  if (pts_r.size() == rs.size()) slope_a = fit_exponent(pts_r).slope;
  ok_a = ok_a && slope_a >= 1.0 && slope_a <= 1.7;
  const double dt = seconds_since(t0);
  os << " slope " << fmt("%.3f", slope_a) << "; " << kCovOuter << " outer x " << kCovInner
     << " inner per point, " << fmt("%.0f s", dt);
  return {ok_a && ok_b && dt <= 7200.0, os.str()};
}

// 7 -------------------------------------------------------------------------
Outcome total_covariance() {
  const auto nested = nested_conditional_covariance(1.0, 16, 64, 200, 50, 7);
  const auto recs = run_experiment("c7_plain", base_config(7, 10000, R"({"type":"covariance","r_list":[16],"n_list":[64]})"));
  const auto plain = estimate_covariance(recs, "logZ_L0_16", "logZ_L0_64");
  const bool overlap = nested.ci.low <= plain.ci.high && plain.ci.low <= nested.ci.high;
  return {overlap, "nested " + fmt("%.3f", nested.estimate) + " [" + fmt("%.3f", nested.ci.low) + ", " +
                       fmt("%.3f", nested.ci.high) + "], plain " + fmt("%.3f", plain.covariance) + " [" +
                       fmt("%.3f", plain.ci.low) + ", " + fmt("%.3f", plain.ci.high) + "]"};
}

// 8 -------------------------------------------------------------------------
Outcome event_trend() {
  const auto recs =
      run_experiment("c8_events", base_config(8, 5000, R"({"type":"events","r":16,"n_list":[256,512],"K_A":2})"));
  double freq[2], hw[2];
  const std::int64_t ns[2] = {256, 512};
  for (int k = 0; k < 2; ++k) {
    const auto b = collect(recs, "event_B_n" + std::to_string(ns[k]));
    const auto c = static_cast<std::size_t>(std::count(b.begin(), b.end(), 0.0));
    freq[k] = static_cast<double>(c) / static_cast<double>(b.size());
    hw[k] = wilson_interval(c, b.size()).half_width();
  }
  const double joint = std::sqrt(hw[0] * hw[0] + hw[1] * hw[1]);
  return {freq[1] <= freq[0] + joint, "sum_j freq(C_j): n=256 " + fmt("%.4f", freq[0]) + ", n=512 " +
                                          fmt("%.4f", freq[1]) + ", joint half-width " + fmt("%.4f", joint)};
}

// 9 -------------------------------------------------------------------------
int sh(const std::string& cmd) {
  const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

bool same_files(const fs::path& a, const fs::path& b) {
  for (const char* f : {"records.jsonl", "summary.csv"}) {
    if (!fs::exists(a / f) || !fs::exists(b / f)) return false;
    if (read_file(a / f) != read_file(b / f)) return false;
  }
  return true;
}

Outcome determinism() {
  if (g_cli.empty()) return {false, "no CLI path given (--cli)"};
  const fs::path dir = g_work / "c9";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ostringstream os;
  bool ok = true;

  const std::vector<std::pair<std::string, std::string>> configs{
      {"covariance", base_config(9, 100, R"({"type":"covariance","r_list":[8,16,32],"n_list":[64,128]})")},
      {"events", base_config(9, 60, R"({"type":"events","r":8,"n_list":[64],"K_A":2})")},
      {"tails", base_config(9, 60, R"({"type":"tails","n_list":[32,64],"t_grid":[-1,0,1]})")}};
  for (const auto& [name, text] : configs) {
    const fs::path cfg = dir / (name + ".json");
    write_file_atomic(cfg, text);
    const int a = sh(g_cli + " run --config " + cfg.string() + " --out " + (dir / (name + "_t1")).string() + " --threads 1");
    const int b = sh(g_cli + " run --config " + cfg.string() + " --out " + (dir / (name + "_t8")).string() + " --threads 8");
    const bool same = a == 0 && b == 0 && same_files(dir / (name + "_t1"), dir / (name + "_t8"));
    ok = ok && same;
    os << name << " threads 1 vs 8 " << (same ? "identical" : "DIFFER") << "; ";
  }

  // Kill mid-run, then resume.
  const fs::path cfg = dir / "kill.json";
  write_file_atomic(cfg, base_config(99, 400, R"({"type":"variance_scaling","n_list":[32,64,128,256]})"));
  const fs::path full = dir / "kill_full", cut = dir / "kill_cut";
  const int a = sh(g_cli + " run --config " + cfg.string() + " --out " + full.string() + " --threads 2");
  const int killed = sh("timeout -s KILL 1.5 " + g_cli + " run --config " + cfg.string() + " --out " +
                        cut.string() + " --threads 2");
  const auto partial = read_records(cut / "records.jsonl").size();
  const int resumed = sh(g_cli + " resume --out " + cut.string() + " --threads 3");
  const bool kill_ok = a == 0 && killed != 0 && partial < 400 && resumed == 0 && same_files(full, cut);
  ok = ok && kill_ok;
  os << "killed at " << partial << "/400 records, resume " << (kill_ok ? "identical" : "DIFFERS");
  return {ok, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--cli" && i + 1 < argc)
      g_cli = argv[++i];
    else if (a == "--work" && i + 1 < argc)
      g_work = argv[++i];
    else
      wanted.insert(std::atoi(argv[i]));
  }
  fs::create_directories(g_work);

  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"algebraic identities", algebraic_identities},
      {"shape centering", shape_centering},
      {"variance scaling", variance_scaling},
      {"fluctuation-scale collapse", fluctuation_collapse},
      {"time-covariance exponents", covariance_exponents},
      {"law of total covariance", total_covariance},
      {"event-frequency trend", event_trend},
      {"determinism", determinism}};

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!wanted.empty() && !wanted.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %d %s: %s (%s)\n", id, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
