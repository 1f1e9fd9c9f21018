#include "polymer/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "polymer/errors.hpp"
#include "polymer/nested.hpp"
#include "polymer/oracle.hpp"
#include "polymer/special_functions.hpp"

namespace polymer {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kBootstrapTag = 0x73756d6d617279ULL;

std::string key(const char* stem, std::int64_t m) { return stem + std::to_string(m); }

std::int64_t max_of(const std::vector<std::int64_t>& v) { return *std::max_element(v.begin(), v.end()); }

std::vector<std::int64_t> merged(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  std::set<std::int64_t> s(a.begin(), a.end());
  s.insert(b.begin(), b.end());
  return {s.begin(), s.end()};
}

double r_two_thirds(std::int64_t r) {
  const double c = std::cbrt(static_cast<double>(r));
  return c * c;
}

// ---- per-replica statistics ----

struct ReplicaVisitor {
  const ExperimentConfig& c;
  std::uint64_t index;
  ReplicaRecord& rec;

  WeightField field() const { return replica_field(c.master_seed, index, c.mu); }

  void operator()(const experiment::Oracle& e) const {
    const auto trial = oracle_trial(e.max_level, c.master_seed, static_cast<int>(index),
                                    e.unit_weights ? OracleSurrogate::unit_weights
                                                   : OracleSurrogate::none);
    rec.set("kind", static_cast<double>(trial.kind));
    rec.set("dp", trial.value);
    rec.set("enum", static_cast<double>(trial.reference));
    rec.set("agree", trial.error <= 1e-10 ? 1.0 : 0.0);
    rec.set("error", trial.error);
  }

  void operator()(const experiment::Query& e) const {
    rec.set("logZ", log_partition(field(), e.query).v);
  }

  void line_to_point(const std::vector<std::int64_t>& ms) const {
    const auto f = diagonal_free_energies(field(), LineSpec::full({0, 0}), max_of(ms));
    for (auto m : ms) rec.set(key("logZ_L0_", m), f[static_cast<std::size_t>(m)]);
  }

  void point_to_point(const WeightField& w, const std::vector<std::int64_t>& ms) const {
    const auto f = diagonal_free_energies(w, LineSpec::point({0, 0}), max_of(ms));
    for (auto m : ms) rec.set(key("logZ_0_", m), f[static_cast<std::size_t>(m)]);
  }

  void operator()(const experiment::VarianceScaling& e) const { line_to_point(e.n_list); }

  void operator()(const experiment::Covariance& e) const {
    line_to_point(merged(e.r_list, e.n_list));
  }

  void operator()(const experiment::Tails& e) const {
    line_to_point(e.n_list);
    point_to_point(field(), e.n_list);
  }

  void operator()(const experiment::Shape& e) const { point_to_point(field(), e.n_list); }

  void operator()(const experiment::Events& e) const {
    const WeightField w = field();
    const double scale = r_two_thirds(e.r);
    const LatticePoint end = diag(e.r);
    const LogValue total =
        log_partition(w, PartitionQuery{LineSpec::full({0, 0}), LineSpec::point(end)});
    for (auto n : e.n_list) {
      const ProfileResult profile = line_profile(w, e.r, LineSpec::point(diag(n)));
      const EventClass ev = classify_event(profile, e.r, e.k_a);
      const double jhat = static_cast<double>(event_scale(ev.j));
      const LogValue in = log_partition(
          w, PartitionQuery{LineSpec::full({0, 0}), LineSpec::point(end),
                            Restriction::in(Parallelogram::diagonal(0, e.r, jhat * scale))});
      rec.set(key("event_j_n", n), static_cast<double>(ev.j));
      rec.set(key("event_B_n", n), ev.kind == EventKind::B ? 1.0 : 0.0);
      rec.set(key("umax_offset_n", n), static_cast<double>(profile.argmax_offset));
      rec.set(key("gap_n", n), ev.gap);
      rec.set(key("in_gap_n", n), total.v - in.v);
      if (e.n_list.size() == 1) rec.event = ReplicaRecord::Event{ev.j, ev.kind};
    }
  }

  void operator()(const experiment::NestedCov& e) const {
    const auto cov = conditional_covariance_sample(c.mu, e.r, {e.n}, e.inner, c.master_seed, index);
    rec.set("cond_cov", cov[0]);
  }
};

// ---- summary ----

using Cell = SummaryTable::Cell;

struct Row {
  std::string statistic;
  Cell r{}, n{}, j{}, t{};
};

class Summary {
 public:
  Summary(const ExperimentConfig& c, std::span<const ReplicaRecord> recs)
      : c_(c), recs_(recs), total_(static_cast<std::int64_t>(c.replicas)) {
    table_.columns = {"statistic", "r", "n", "j", "t", "estimate",
                      "ci_low", "ci_high", "n_samples", "excluded_count"};
    boot_.seed = hash_combine(c.master_seed, kBootstrapTag);
  }

  const ExperimentConfig& config() const { return c_; }
  std::span<const ReplicaRecord> records() const { return recs_; }
  const BootstrapOptions& boot() const { return boot_; }

  void add(const Row& row, std::optional<double> est, std::optional<Interval> ci, std::int64_t used) {
    std::vector<Cell> cells{row.statistic, row.r, row.n, row.j, row.t};
    cells.push_back(est ? Cell{*est} : Cell{});
    cells.push_back(ci ? Cell{ci->low} : Cell{});
    cells.push_back(ci ? Cell{ci->high} : Cell{});
    cells.push_back(used);
    cells.push_back(total_ - used);
    table_.add_row(std::move(cells));
  }

  // Runs f, which fills est/ci; rows with too little data keep empty estimates.
  template <class Fn>
  void guarded(const Row& row, std::int64_t used, Fn&& f) {
    std::optional<double> est;
    std::optional<Interval> ci;
    bool ok = true;
    try {
      f(est, ci);
    } catch (const InsufficientData&) {
      ok = false;
    } catch (const NonpositiveData&) {
      ok = false;
    }
    if (ok)
      add(row, est, ci, used);
    else
      add(row, std::nullopt, std::nullopt, used);
  }

  std::vector<double> values(const std::string& k, std::int64_t* used) const {
    std::size_t excluded = 0;
    auto v = collect(recs_, k, &excluded);
    *used = static_cast<std::int64_t>(v.size());
    return v;
  }

  std::int64_t all_finite(const std::vector<std::string>& keys) const {
    return std::count_if(recs_.begin(), recs_.end(), [&](const ReplicaRecord& r) {
      return std::all_of(keys.begin(), keys.end(), [&](const std::string& k) { return r.get(k).has_value(); });
    });
  }

  void moments(const std::string& k, const char* mean_name, const char* var_name, Cell n) {
    std::int64_t used = 0;
    const auto v = values(k, &used);
    std::optional<MomentsEstimate> m;
    try {
      m = estimate_moments(v, boot_);
    } catch (const InsufficientData&) {
    }
    add({mean_name, {}, n, {}, {}}, m ? std::optional(m->mean) : std::nullopt,
        m ? std::optional(m->mean_ci) : std::nullopt, used);
    if (var_name)
      add({var_name, {}, n, {}, {}}, m ? std::optional(m->variance) : std::nullopt,
          m ? std::optional(m->variance_ci) : std::nullopt, used);
  }

  void fit(const Row& row, const std::vector<std::pair<double, double>>& pts,
           const std::vector<std::string>& keys) {
    if (pts.size() < 3) return;
    guarded(row, all_finite(keys), [&](auto& est, auto& ci) {
      const ExponentFit f = fit_exponent(pts);
      est = f.slope;
      const double hw = 1.959963984540054 * f.stderr_slope;
      ci = Interval{f.slope - hw, f.slope + hw};
    });
  }

  void proportion(const Row& row, const std::string& k, double equals) {
    std::int64_t used = 0;
    const auto v = values(k, &used);
    proportion(row, static_cast<std::size_t>(std::count(v.begin(), v.end(), equals)), used);
  }

  void proportion(const Row& row, std::size_t hits, std::int64_t used) {
    guarded(row, used, [&](auto& est, auto& ci) {
      ci = wilson_interval(hits, static_cast<std::size_t>(used));
      est = static_cast<double>(hits) / static_cast<double>(used);
    });
  }

  SummaryTable take() { return std::move(table_); }

 private:
  const ExperimentConfig& c_;
  std::span<const ReplicaRecord> recs_;
  std::int64_t total_;
  BootstrapOptions boot_;
  SummaryTable table_;
};

struct SummaryVisitor {
  Summary& s;

  void operator()(const experiment::Oracle&) const {
    s.proportion({"oracle_agreement"}, "agree", 1.0);
    std::int64_t used = 0;
    const auto err = s.values("error", &used);
    s.guarded({"oracle_max_error"}, used, [&](auto& est, auto&) {
      if (err.empty()) throw InsufficientData("no finite oracle errors");
      est = *std::max_element(err.begin(), err.end());
    });
  }

  void operator()(const experiment::Query&) const { s.moments("logZ", "logZ_mean", "logZ_variance", {}); }

  void operator()(const experiment::VarianceScaling& e) const {
    std::vector<std::pair<double, double>> pts;
    std::vector<std::string> keys;
    for (auto n : e.n_list) {
      const auto k = key("logZ_L0_", n);
      keys.push_back(k);
      s.moments(k, "mean_logZ_L0", "var_logZ_L0", n);
      std::int64_t used = 0;
      const auto v = s.values(k, &used);
      if (v.size() >= 2) {
        const double var = sample_covariance(v, v);
        if (var > 0.0) pts.emplace_back(static_cast<double>(n), var);
      }
    }
    s.fit({"var_exponent"}, pts, keys);
  }

  void operator()(const experiment::Covariance& e) const {
    std::map<std::int64_t, std::vector<std::pair<double, double>>> by_n, by_r;
    for (auto n : e.n_list) {
      for (auto r : e.r_list) {
        if (2 * r > n) continue;
        const auto kr = key("logZ_L0_", r), kn = key("logZ_L0_", n);
        s.guarded({"cov_logZ_L0", r, n, {}, {}}, s.all_finite({kr, kn}), [&](auto& est, auto& ci) {
          const auto c = estimate_covariance(s.records(), kr, kn, s.boot());
          est = c.covariance;
          ci = c.ci;
          if (c.covariance > 0.0) {
            by_n[n].emplace_back(static_cast<double>(r), c.covariance);
            by_r[r].emplace_back(static_cast<double>(n), c.covariance);
          }
        });
      }
    }
    const auto keys = [&](std::int64_t a, const std::vector<std::int64_t>& bs) {
      std::vector<std::string> k{key("logZ_L0_", a)};
      for (auto b : bs) k.push_back(key("logZ_L0_", b));
      return k;
    };
    for (auto n : e.n_list)
      s.fit({"cov_exponent_in_r", {}, n, {}, {}}, by_n[n], keys(n, e.r_list));
    for (auto r : e.r_list)
      s.fit({"cov_exponent_in_n", r, {}, {}, {}}, by_r[r], keys(r, e.n_list));
  }

  void operator()(const experiment::Tails& e) const {
    const double lambda = shape_diagonal(s.config().mu, 1.0);
    std::vector<double> prev;
    for (std::size_t i = 0; i < e.n_list.size(); ++i) {
      const auto n = e.n_list[i];
      const double scale = std::cbrt(static_cast<double>(n));
      const double center = lambda * static_cast<double>(n);
      std::int64_t used_l = 0, used_p = 0;
      auto line = s.values(key("logZ_L0_", n), &used_l);
      auto point = s.values(key("logZ_0_", n), &used_p);
      for (auto& v : point) v = -v;
      const auto emit = [&](const char* name, const std::vector<double>& v, double c, std::int64_t used) {
        if (v.empty()) {
          for (double t : e.t_grid) s.add({name, {}, n, {}, t}, std::nullopt, std::nullopt, used);
          return;
        }
        for (const auto& p : tail_curve(v, c, scale, e.t_grid))
          s.add({name, {}, n, {}, p.t}, p.probability, p.ci, used);
      };
      emit("tail_upper_L0", line, center, used_l);
      emit("tail_lower_0", point, -center, used_p);

      std::vector<double> scaled(line.size());
      std::transform(line.begin(), line.end(), scaled.begin(),
                     [&](double v) { return (v - center) / scale; });
      if (i > 0) {
        s.guarded({"ks_L0", e.n_list[i - 1], n, {}, {}}, std::min<std::int64_t>(used_l, static_cast<std::int64_t>(prev.size())),
                  [&](auto& est, auto&) { est = ks_distance(prev, scaled); });
      }
      prev = std::move(scaled);
    }
  }

  void operator()(const experiment::Events& e) const {
    for (auto n : e.n_list) {
      std::map<std::int64_t, std::pair<std::size_t, std::size_t>> bins;  // j -> (A, C)
      std::size_t c_total = 0;
      for (const auto& rec : s.records()) {
        const auto j = rec.get(key("event_j_n", n));
        const auto b = rec.get(key("event_B_n", n));
        if (!j || !b) continue;
        auto& bin = bins[static_cast<std::int64_t>(*j)];
        ++bin.first;
        if (*b == 0.0) {
          ++bin.second;
          ++c_total;
        }
      }
      const std::int64_t both = s.all_finite({key("event_j_n", n), key("event_B_n", n)});
      s.proportion({"freq_C", {}, n, {}, {}}, c_total, both);
      s.proportion({"freq_B", {}, n, {}, {}}, static_cast<std::size_t>(both) - c_total, both);
      for (const auto& [j, counts] : bins) {
        s.proportion({"freq_A", e.r, n, j, {}}, counts.first, both);
        s.proportion({"freq_C_j", e.r, n, j, {}}, counts.second, both);
      }
      s.moments(key("umax_offset_n", n), "umax_offset_mean", nullptr, n);
      std::int64_t used_g = 0;
      auto gaps = s.values(key("in_gap_n", n), &used_g);
      for (auto& g : gaps) g = std::pow(g, 10);
      s.guarded({"in_gap_moment10", e.r, n, {}, {}}, used_g, [&](auto& est, auto& ci) {
        ci = bootstrap_mean_ci(gaps, s.boot());
        est = sample_mean(gaps);
      });
    }
  }

  void operator()(const experiment::Shape& e) const {
    const double lambda = shape_diagonal(s.config().mu, 1.0);
    for (auto n : e.n_list) {
      std::int64_t used = 0;
      auto v = s.values(key("logZ_0_", n), &used);
      for (auto& x : v) x /= static_cast<double>(n);
      s.guarded({"shape_mean", {}, n, {}, {}}, used, [&](auto& est, auto& ci) {
        ci = bootstrap_mean_ci(v, s.boot());
        est = sample_mean(v);
      });
      s.guarded({"shape_deviation", {}, n, {}, {}}, used, [&](auto& est, auto& ci) {
        const Interval m = bootstrap_mean_ci(v, s.boot());
        ci = Interval{m.low - lambda, m.high - lambda};
        est = sample_mean(v) - lambda;
      });
    }
  }

  void operator()(const experiment::NestedCov& e) const {
    std::int64_t used = 0;
    auto v = s.values("cond_cov", &used);
    s.guarded({"nested_cov", e.r, e.n, {}, {}}, used, [&](auto& est, auto& ci) {
      const NestedEstimate n = aggregate_nested(v, s.boot());
      est = n.estimate;
      ci = n.ci;
    });
  }
};

// ---- artifacts ----

json completed_ranges(std::uint64_t done) {
  json r = json::array();
  if (done > 0) r.push_back(json::array({0, done - 1}));
  return r;
}

void write_manifest(const fs::path& dir, const ExperimentConfig& config, std::uint64_t done,
                    double wall_seconds) {
  json m;
  m["config_hash"] = config_hash(config);
  m["version"] = kVersion;
  m["completed"] = completed_ranges(done);
  m["replicas"] = config.replicas;
  m["config"] = to_json(config);
  m["wall_time_seconds"] = wall_seconds;
  write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

struct Manifest {
  std::string hash;
  std::string version;
  double wall = 0.0;
};

Manifest read_manifest(const fs::path& dir) {
  const auto path = dir / "manifest.json";
  if (!fs::exists(path)) throw IoError("no manifest.json in " + dir.string());
  try {
    const json m = json::parse(read_file(path));
    return {m.at("config_hash").get<std::string>(), m.at("version").get<std::string>(),
            m.value("wall_time_seconds", 0.0)};
  } catch (const json::exception& e) {
    throw IoError("malformed manifest.json: " + std::string(e.what()));
  }
}

class Clock {
 public:
  explicit Clock(double offset = 0.0) : offset_(offset), t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return offset_ + std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  double offset_;
  std::chrono::steady_clock::time_point t0_;
};

// Computes replicas [start, replicas) with `threads` workers, each owning a
// fixed stride of indices. The calling thread writes records in index order.
RunResult execute(const ExperimentConfig& config, const fs::path& dir, std::uint64_t start,
                  const RunOptions& opts, const Clock& clock) {
  const auto total = static_cast<std::uint64_t>(config.replicas);
  std::uint64_t stop = total;
  if (opts.stop_after) stop = std::clamp<std::uint64_t>(*opts.stop_after, start, total);

  std::ofstream out(dir / "records.jsonl", std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot open records.jsonl in " + dir.string());

  const unsigned threads = static_cast<unsigned>(std::max(1, opts.threads));
  const std::uint64_t window = 8ULL * threads + 64;

  std::mutex mu;
  std::condition_variable cv;
  std::map<std::uint64_t, ReplicaRecord> ready;
  std::uint64_t next = start;
  bool abort = false;
  std::exception_ptr failure;

  auto worker = [&](unsigned w) {
    for (std::uint64_t i = start + w; i < stop; i += threads) {
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return abort || i < next + window; });
        if (abort) return;
      }
      ReplicaRecord rec;
      try {
        rec = compute_replica(config, i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        abort = true;
        cv.notify_all();
        return;
      }
      std::lock_guard lock(mu);
      ready.emplace(i, std::move(rec));
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);

  auto last_manifest = std::chrono::steady_clock::now();
  while (true) {
    ReplicaRecord rec;
    {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return abort || next >= stop || ready.count(next); });
      if (abort || next >= stop) break;
      auto node = ready.extract(next);
      rec = std::move(node.mapped());
    }
    out << to_jsonl(rec) << '\n';
    out.flush();
    if (!out) {
      std::lock_guard lock(mu);
      abort = true;
      failure = std::make_exception_ptr(IoError("write to records.jsonl failed"));
      cv.notify_all();
      break;
    }
    {
      std::lock_guard lock(mu);
      ++next;
      cv.notify_all();
    }
    const auto now = std::chrono::steady_clock::now();
    if (now - last_manifest > std::chrono::seconds(5)) {
      write_manifest(dir, config, next, clock.seconds());
      last_manifest = now;
    }
  }
  {
    std::lock_guard lock(mu);
    abort = true;
    cv.notify_all();
  }
  for (auto& t : pool) t.join();
  out.close();
  if (failure) {
    write_manifest(dir, config, next, clock.seconds());
    std::rethrow_exception(failure);
  }

  RunResult res;
  res.computed = next - start;
  res.total = next;
  res.complete = next == total;
  if (res.complete) {
    const auto records = read_records(dir / "records.jsonl");
    if (records.size() != total) throw IoError("records.jsonl does not hold every replica");
    write_file_atomic(dir / "summary.csv", summarize(config, records).to_csv());
  }
  write_manifest(dir, config, next, clock.seconds());
  return res;
}

}  // namespace

ReplicaRecord compute_replica(const ExperimentConfig& config, std::uint64_t index) {
  ReplicaRecord rec;
  rec.replica_index = index;
  rec.derived_seed = hash_combine(config.master_seed, index);
  std::visit(ReplicaVisitor{config, index, rec}, config.experiment);
  return rec;
}

SummaryTable summarize(const ExperimentConfig& config, std::span<const ReplicaRecord> records) {
  Summary s(config, records);
  std::visit(SummaryVisitor{s}, config.experiment);
  return s.take();
}

RunResult run(const ExperimentConfig& config, const fs::path& out_dir, const RunOptions& opts) {
  validate(config);
  const Clock clock;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  for (const char* name : {"records.jsonl", "summary.csv"}) fs::remove(out_dir / name, ec);
  write_file_atomic(out_dir / "config.json", to_json(config).dump(2) + "\n");
  write_manifest(out_dir, config, 0, clock.seconds());
  {
    std::ofstream touch(out_dir / "records.jsonl", std::ios::binary | std::ios::trunc);
    if (!touch) throw IoError("cannot create records.jsonl in " + out_dir.string());
  }
  return execute(config, out_dir, 0, opts, clock);
}

RunResult resume(const fs::path& out_dir, const RunOptions& opts, const ExperimentConfig* expected) {
  const Manifest manifest = read_manifest(out_dir);
  const ExperimentConfig stored = parse_config_text(read_file(out_dir / "config.json"));
  if (config_hash(stored) != manifest.hash)
    throw ManifestMismatch("config.json does not match the manifest hash " + manifest.hash);
  if (expected && config_hash(*expected) != manifest.hash)
    throw ManifestMismatch("config hash " + config_hash(*expected) + " differs from manifest hash " +
                           manifest.hash);
  if (manifest.version != kVersion)
    throw ManifestMismatch("run was produced by " + manifest.version + ", this is " + kVersion);

  const auto records_path = out_dir / "records.jsonl";
  std::uint64_t valid = 0;
  const auto records = read_records(records_path, &valid);
  const auto total = static_cast<std::uint64_t>(stored.replicas);
  if (records.size() > total) throw IoError("records.jsonl holds more replicas than configured");
  if (records.size() == total && fs::exists(out_dir / "summary.csv") &&
      fs::file_size(records_path) == valid) {
    return {0, total, true};
  }
  std::error_code ec;
  if (fs::exists(records_path)) {
    fs::resize_file(records_path, valid, ec);
    if (ec) throw IoError("cannot truncate records.jsonl: " + ec.message());
  }
  return execute(stored, out_dir, records.size(), opts, Clock(manifest.wall));
}

int resolve_threads(std::optional<int> flag, const ExperimentConfig& config) {
  if (flag) return *flag;
  if (config.threads) return *config.threads;
  if (const char* env = std::getenv("POLYMER_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  return 1;
}

}  // namespace polymer
