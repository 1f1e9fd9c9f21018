#include "polymer/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "polymer/errors.hpp"

namespace polymer {

using nlohmann::json;

namespace experiment {

std::string type_name(const Variant& v) {
  struct Names {
    std::string operator()(const Oracle&) const { return "oracle"; }
    std::string operator()(const Query&) const { return "query"; }
    std::string operator()(const VarianceScaling&) const { return "variance_scaling"; }
    std::string operator()(const Covariance&) const { return "covariance"; }
    std::string operator()(const Tails&) const { return "tails"; }
    std::string operator()(const Events&) const { return "events"; }
    std::string operator()(const Shape&) const { return "shape"; }
    std::string operator()(const NestedCov&) const { return "nested_cov"; }
  };
  return std::visit(Names{}, v);
}

}  // namespace experiment

namespace {

constexpr std::int64_t kMaxSize = 1 << 16;

// Strict object reader: every key must be consumed, and finish() rejects
// leftovers so typos surface instead of silently taking defaults.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigInvalid(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& required(const std::string& key) {
    if (!j_.contains(key)) throw ConfigInvalid(child(key), "missing required key");
    seen_.insert(key);
    return j_.at(key);
  }
  const json* optional(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }
  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) throw ConfigInvalid(child(key), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigInvalid(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigInvalid(path, "expected a finite number");
  return d;
}

std::int64_t as_int(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  throw ConfigInvalid(path, "expected an integer");
}

std::uint64_t as_seed(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    const auto i = v.get<std::int64_t>();
    if (i < 0) throw ConfigInvalid(path, "seed must be nonnegative");
    return static_cast<std::uint64_t>(i);
  }
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigInvalid(path, "seed string must be decimal digits");
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw ConfigInvalid(path, "seed out of range");
    }
  }
  throw ConfigInvalid(path, "expected an unsigned integer or decimal string");
}

std::vector<std::int64_t> int_list(const json& v, const std::string& path, std::int64_t min,
                                   std::int64_t max) {
  if (!v.is_array() || v.empty()) throw ConfigInvalid(path, "expected a nonempty array");
  std::vector<std::int64_t> out;
  std::set<std::int64_t> seen;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const auto x = as_int(v[i], p);
    if (x < min || x > max)
      throw ConfigInvalid(p, "must lie in [" + std::to_string(min) + ", " + std::to_string(max) + "]");
    if (!seen.insert(x).second) throw ConfigInvalid(p, "duplicate value");
    out.push_back(x);
  }
  return out;
}

LatticePoint as_point(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw ConfigInvalid(path, "expected [x, y]");
  const auto x = as_int(v[0], path + "[0]");
  const auto y = as_int(v[1], path + "[1]");
  if (std::abs(x) > kMaxSize * 4 || std::abs(y) > kMaxSize * 4)
    throw ConfigInvalid(path, "coordinate out of range");
  return {x, y};
}

LineSpec as_line(const json& v, const std::string& path) {
  Fields f(v, path);
  const auto& kind = f.required("kind");
  if (!kind.is_string()) throw ConfigInvalid(f.child("kind"), "expected a string");
  const auto k = kind.get<std::string>();
  const LatticePoint anchor = as_point(f.required("anchor"), f.child("anchor"));
  LineSpec line;
  if (k == "point") {
    line = LineSpec::point(anchor);
  } else if (k == "full") {
    line = LineSpec::full(anchor);
  } else if (k == "segment" || k == "complement") {
    const double h = as_double(f.required("halfwidth"), f.child("halfwidth"));
    if (h < 0.0) throw ConfigInvalid(f.child("halfwidth"), "must be nonnegative");
    line = k == "segment" ? LineSpec::segment(anchor, h) : LineSpec::complement(anchor, h);
  } else {
    throw ConfigInvalid(f.child("kind"), "expected point, segment, complement or full");
  }
  f.finish();
  return line;
}

Restriction as_restriction(const json& v, const std::string& path) {
  Fields f(v, path);
  const auto& kind = f.required("kind");
  if (!kind.is_string()) throw ConfigInvalid(f.child("kind"), "expected a string");
  const auto k = kind.get<std::string>();
  Restriction r;
  if (k == "none") {
    f.finish();
    return r;
  }
  if (k == "in") r.kind = RestrictionKind::in;
  else if (k == "out") r.kind = RestrictionKind::out;
  else if (k == "exit") r.kind = RestrictionKind::exit;
  else if (k == "touch") r.kind = RestrictionKind::touch;
  else throw ConfigInvalid(f.child("kind"), "expected none, in, out, exit or touch");
  Fields g(f.required("region"), f.child("region"));
  r.region.start = as_point(g.required("start"), g.child("start"));
  r.region.end = as_point(g.required("end"), g.child("end"));
  r.region.halfwidth = as_double(g.required("halfwidth"), g.child("halfwidth"));
  g.finish();
  f.finish();
  const std::string rp = f.child("region");
  if (r.region.halfwidth < 0.0) throw ConfigInvalid(rp + ".halfwidth", "must be nonnegative");
  if (!dominated_by(r.region.start, r.region.end) || r.region.start == r.region.end)
    throw ConfigInvalid(rp, "start must be strictly dominated by end");
  return r;
}

void check_pairs(const std::vector<std::int64_t>& r_list, const std::vector<std::int64_t>& n_list,
                 const std::string& path) {
  for (std::size_t i = 0; i < r_list.size(); ++i) {
    const bool paired = std::any_of(n_list.begin(), n_list.end(),
                                    [&](std::int64_t n) { return 2 * r_list[i] <= n; });
    if (!paired)
      throw ConfigInvalid(path + ".r_list[" + std::to_string(i) + "]",
                          "needs some n with r <= n/2");
  }
}

experiment::Variant as_experiment(const json& v, const std::string& path, std::int64_t replicas) {
  Fields f(v, path);
  const auto& type = f.required("type");
  if (!type.is_string()) throw ConfigInvalid(f.child("type"), "expected a string");
  const auto t = type.get<std::string>();
  experiment::Variant out;

  if (t == "oracle") {
    experiment::Oracle e;
    if (auto* m = f.optional("max_level")) e.max_level = static_cast<int>(as_int(*m, f.child("max_level")));
    if (e.max_level < 1 || e.max_level > 16) throw ConfigInvalid(f.child("max_level"), "must lie in [1, 16]");
    if (auto* u = f.optional("unit_weights")) {
      if (!u->is_boolean()) throw ConfigInvalid(f.child("unit_weights"), "expected a boolean");
      e.unit_weights = u->get<bool>();
    }
    out = e;
  } else if (t == "query") {
    experiment::Query e;
    e.query.source = as_line(f.required("source"), f.child("source"));
    e.query.target = as_line(f.required("target"), f.child("target"));
    if (auto* r = f.optional("restriction")) e.query.restriction = as_restriction(*r, f.child("restriction"));
    if (!feasible(e.query.source, e.query.target))
      throw ConfigInvalid(f.child("target"), "no target member dominates a source member");
    if (!e.query.source.bounded() && !e.query.target.bounded())
      throw ConfigInvalid(f.child("target"), "source and target cannot both be unbounded");
    if (e.query.restriction.kind == RestrictionKind::exit) {
      try {
        detail::validate_exit(e.query);
      } catch (const InfeasibleQuery& err) {
        throw ConfigInvalid(f.child("restriction"), err.what());
      }
    }
    out = e;
  } else if (t == "variance_scaling") {
    out = experiment::VarianceScaling{int_list(f.required("n_list"), f.child("n_list"), 1, kMaxSize)};
  } else if (t == "covariance") {
    experiment::Covariance e;
    e.r_list = int_list(f.required("r_list"), f.child("r_list"), 1, kMaxSize);
    e.n_list = int_list(f.required("n_list"), f.child("n_list"), 2, kMaxSize);
    check_pairs(e.r_list, e.n_list, path);
    out = e;
  } else if (t == "tails") {
    experiment::Tails e;
    e.n_list = int_list(f.required("n_list"), f.child("n_list"), 1, kMaxSize);
    const auto& grid = f.required("t_grid");
    if (!grid.is_array() || grid.empty()) throw ConfigInvalid(f.child("t_grid"), "expected a nonempty array");
    for (std::size_t i = 0; i < grid.size(); ++i)
      e.t_grid.push_back(as_double(grid[i], f.child("t_grid") + "[" + std::to_string(i) + "]"));
    if (!std::is_sorted(e.t_grid.begin(), e.t_grid.end()))
      throw ConfigInvalid(f.child("t_grid"), "must be sorted ascending");
    out = e;
  } else if (t == "events") {
    experiment::Events e;
    e.r = as_int(f.required("r"), f.child("r"));
    e.n_list = int_list(f.required("n_list"), f.child("n_list"), 2, kMaxSize);
    if (auto* k = f.optional("K_A")) e.k_a = as_double(*k, f.child("K_A"));
    if (!(e.k_a > 0.0)) throw ConfigInvalid(f.child("K_A"), "must be positive");
    if (e.r < 1) throw ConfigInvalid(f.child("r"), "must be >= 1");
    for (std::size_t i = 0; i < e.n_list.size(); ++i)
      if (2 * e.r > e.n_list[i])
        throw ConfigInvalid(f.child("n_list") + "[" + std::to_string(i) + "]", "needs r <= n/2");
    out = e;
  } else if (t == "shape") {
    out = experiment::Shape{int_list(f.required("n_list"), f.child("n_list"), 1, kMaxSize)};
  } else if (t == "nested_cov") {
    experiment::NestedCov e;
    e.r = as_int(f.required("r"), f.child("r"));
    e.n = as_int(f.required("n"), f.child("n"));
    e.outer = static_cast<int>(as_int(f.required("outer"), f.child("outer")));
    e.inner = static_cast<int>(as_int(f.required("inner"), f.child("inner")));
    if (e.n > kMaxSize) throw ConfigInvalid(f.child("n"), "too large");
    if (e.r < 2 || 2 * e.r > e.n) throw ConfigInvalid(f.child("r"), "needs 2 <= r <= n/2");
    if (e.outer < 2) throw ConfigInvalid(f.child("outer"), "must be >= 2");
    if (e.inner < 2) throw ConfigInvalid(f.child("inner"), "must be >= 2");
    if (e.outer != replicas) throw ConfigInvalid(f.child("outer"), "must equal replicas");
    out = e;
  } else {
    throw ConfigInvalid(f.child("type"), "unknown experiment type '" + t + "'");
  }
  f.finish();
  return out;
}

json point_json(LatticePoint p) { return json::array({p.x, p.y}); }

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  Fields f(j, "");
  ExperimentConfig c;
  c.mu = as_double(f.required("mu"), "mu");
  if (!(c.mu > 0.0)) throw ConfigInvalid("mu", "must be positive");
  c.master_seed = as_seed(f.required("master_seed"), "master_seed");
  c.replicas = as_int(f.required("replicas"), "replicas");
  if (c.replicas < 1) throw ConfigInvalid("replicas", "must be >= 1");
  if (auto* t = f.optional("threads")) {
    const auto n = as_int(*t, "threads");
    if (n < 1 || n > 1024) throw ConfigInvalid("threads", "must lie in [1, 1024]");
    c.threads = static_cast<int>(n);
  }
  if (auto* o = f.optional("out_dir")) {
    if (!o->is_string()) throw ConfigInvalid("out_dir", "expected a string");
    c.out_dir = o->get<std::string>();
  }
  c.experiment = as_experiment(f.required("experiment"), "experiment", c.replicas);
  f.finish();
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigInvalid("<root>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const LineSpec& line) {
  static const char* kinds[] = {"point", "segment", "complement", "full"};
  json j{{"kind", kinds[static_cast<int>(line.kind)]}, {"anchor", point_json(line.anchor)}};
  if (line.kind == LineKind::segment || line.kind == LineKind::complement)
    j["halfwidth"] = line.halfwidth;
  return j;
}

json to_json(const Restriction& r) {
  static const char* kinds[] = {"none", "in", "out", "exit", "touch"};
  json j{{"kind", kinds[static_cast<int>(r.kind)]}};
  if (r.kind != RestrictionKind::none)
    j["region"] = {{"start", point_json(r.region.start)},
                   {"end", point_json(r.region.end)},
                   {"halfwidth", r.region.halfwidth}};
  return j;
}

json to_json(const ExperimentConfig& c) {
  json e;
  e["type"] = experiment::type_name(c.experiment);
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, experiment::Oracle>) {
          e["max_level"] = x.max_level;
          e["unit_weights"] = x.unit_weights;
        } else if constexpr (std::is_same_v<T, experiment::Query>) {
          e["source"] = to_json(x.query.source);
          e["target"] = to_json(x.query.target);
          e["restriction"] = to_json(x.query.restriction);
        } else if constexpr (std::is_same_v<T, experiment::VarianceScaling> ||
                             std::is_same_v<T, experiment::Shape>) {
          e["n_list"] = x.n_list;
        } else if constexpr (std::is_same_v<T, experiment::Covariance>) {
          e["r_list"] = x.r_list;
          e["n_list"] = x.n_list;
        } else if constexpr (std::is_same_v<T, experiment::Tails>) {
          e["n_list"] = x.n_list;
          e["t_grid"] = x.t_grid;
        } else if constexpr (std::is_same_v<T, experiment::Events>) {
          e["r"] = x.r;
          e["n_list"] = x.n_list;
          e["K_A"] = x.k_a;
        } else if constexpr (std::is_same_v<T, experiment::NestedCov>) {
          e["r"] = x.r;
          e["n"] = x.n;
          e["outer"] = x.outer;
          e["inner"] = x.inner;
        }
      },
      c.experiment);
  json j{{"mu", c.mu},
         {"master_seed", std::to_string(c.master_seed)},
         {"replicas", c.replicas},
         {"experiment", e}};
  if (c.threads) j["threads"] = *c.threads;
  if (c.out_dir) j["out_dir"] = *c.out_dir;
  return j;
}

void validate(const ExperimentConfig& config) { parse_config(to_json(config)); }

std::string config_hash(const ExperimentConfig& config) {
  json j = to_json(config);
  j.erase("threads");
  j.erase("out_dir");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

}  // namespace polymer
