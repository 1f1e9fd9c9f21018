#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "polymer/partition.hpp"

namespace polymer {

namespace experiment {

/// Random queries checked against path enumeration; one trial per replica.
struct Oracle {
  int max_level = 12;
  bool unit_weights = false;
};

/// One fixed partition-function query per replica field.
struct Query {
  PartitionQuery query;
};

/// Var(log Z_{L0,(n,n)}) across n.
struct VarianceScaling {
  std::vector<std::int64_t> n_list;
};

/// Cov(log Z_{L0,(r,r)}, log Z_{L0,(n,n)}) for every r <= n/2.
struct Covariance {
  std::vector<std::int64_t> r_list;
  std::vector<std::int64_t> n_list;
};

/// Right tail of the centred line-to-point and left tail of the centred
/// point-to-point free energy, both in units of n^(1/3).
struct Tails {
  std::vector<std::int64_t> n_list;
  std::vector<double> t_grid;
};

/// Maximizer displacement events on the line through (r, r).
struct Events {
  std::int64_t r = 16;
  std::vector<std::int64_t> n_list;
  double k_a = 1e9;
};

/// (1/n) log Z_{0,(n,n)} against the shape function.
struct Shape {
  std::vector<std::int64_t> n_list;
};

/// Conditional covariance given the weights at levels >= 2r; one outer
/// draw per replica, so replicas must equal outer.
struct NestedCov {
  std::int64_t r = 16;
  std::int64_t n = 64;
  int outer = 200;
  int inner = 50;
};

using Variant = std::variant<Oracle, Query, VarianceScaling, Covariance, Tails, Events, Shape,
                             NestedCov>;

/// Tag used under "type" in the config.
std::string type_name(const Variant& v);

}  // namespace experiment

struct ExperimentConfig {
  double mu = 1.0;
  std::uint64_t master_seed = 0;
  std::int64_t replicas = 1;
  std::optional<int> threads;
  experiment::Variant experiment = experiment::Oracle{};
  std::optional<std::string> out_dir;
};

/// Strict parse: unknown or missing keys and out-of-range values raise
/// ConfigInvalid naming the field path (e.g. "experiment.n_list[2]").
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text);

nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const LineSpec& line);
nlohmann::json to_json(const Restriction& restriction);

/// Re-checks the invariants parse_config enforces.
void validate(const ExperimentConfig& config);

/// FNV-1a 64 over the canonical JSON of everything that affects outputs
/// (threads and out_dir are excluded), as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace polymer
