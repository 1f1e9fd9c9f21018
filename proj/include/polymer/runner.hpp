#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "polymer/config.hpp"
#include "polymer/records.hpp"

namespace polymer {

inline constexpr const char* kVersion = "polymer-lab 1.0.0";

struct RunOptions {
  int threads = 1;
  /// Stop once this many records are on disk (used to exercise resume).
  std::optional<std::uint64_t> stop_after;
};

struct RunResult {
  std::uint64_t computed = 0;  ///< records produced by this call
  std::uint64_t total = 0;     ///< records on disk afterwards
  bool complete = false;
};

/// Statistics of replica `index`; a pure function of (config, index).
ReplicaRecord compute_replica(const ExperimentConfig& config, std::uint64_t index);

/// Summary rows for the records of a finished run.
///   columns: statistic,r,n,j,t,estimate,ci_low,ci_high,n_samples,excluded_count
SummaryTable summarize(const ExperimentConfig& config, std::span<const ReplicaRecord> records);

/// Fresh run into out_dir: config.json, records.jsonl, summary.csv, manifest.json.
/// Existing artifacts in out_dir are replaced.
RunResult run(const ExperimentConfig& config, const std::filesystem::path& out_dir,
              const RunOptions& opts = {});

/// Completes a partial run. Throws ManifestMismatch when `expected` (or the
/// stored config) hashes differently from the manifest.
RunResult resume(const std::filesystem::path& out_dir, const RunOptions& opts = {},
                 const ExperimentConfig* expected = nullptr);

/// --threads, then the config, then POLYMER_THREADS, then 1.
int resolve_threads(std::optional<int> flag, const ExperimentConfig& config);

}  // namespace polymer
