// polymer: run, resume and check directed-polymer experiments.
//
// Exit codes: 0 success, 1 failed check or runtime error, 2 invalid config
// or manifest mismatch, 3 I/O error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "polymer/config.hpp"
#include "polymer/errors.hpp"
#include "polymer/oracle.hpp"
#include "polymer/records.hpp"
#include "polymer/runner.hpp"
#include "polymer/special_functions.hpp"

namespace {

using namespace polymer;

int report(const RunResult& r, const std::string& out) {
  std::cout << "replicas on disk: " << r.total << " (" << r.computed << " computed this call)\n";
  if (r.complete) std::cout << "complete: " << out << "/summary.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse-gamma directed polymer laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config_path, out_dir;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> stop_after;

  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (overrides out_dir in the config)");
  run->add_option("--threads", threads, "Worker threads (default: config, then POLYMER_THREADS, then 1)")
      ->check(CLI::Range(1, 1024));
  run->add_option("--seed", seed, "Override master_seed");
  run->add_option("--stop-after", stop_after, "Stop once this many records are written")->group("");

  auto* res = app.add_subcommand("resume", "Complete an interrupted run");
  res->add_option("--out", out_dir, "Output directory of the run")->required();
  res->add_option("--config", config_path, "Expected config; must hash like the manifest");
  res->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 1024));
  res->add_option("--seed", seed, "Override master_seed of the expected config");

  int max_level = 12, trials = 200;
  std::uint64_t oracle_seed = 1;
  std::string surrogate = "none";
  auto* oracle = app.add_subcommand("verify-oracle", "Compare the DP with path enumeration");
  oracle->add_option("--max-level", max_level, "Largest level of any endpoint")->check(CLI::Range(1, 16));
  oracle->add_option("--trials", trials, "Number of random trials")->check(CLI::PositiveNumber);
  oracle->add_option("--seed", oracle_seed, "Trial seed");
  oracle->add_option("--surrogate", surrogate, "Weight field")->check(CLI::IsMember({"none", "unit_weights"}));

  double mu = 1.0, x = 1.0, y = 1.0;
  auto* shape = app.add_subcommand("shape", "Evaluate the shape function");
  shape->add_option("--mu", mu, "Gamma shape parameter")->check(CLI::PositiveNumber);
  shape->add_option("--x", x, "Direction x")->check(CLI::NonNegativeNumber);
  shape->add_option("--y", y, "Direction y")->check(CLI::NonNegativeNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentConfig config = parse_config_text(read_file(config_path));
      if (seed) config.master_seed = *seed;
      if (out_dir.empty()) {
        if (!config.out_dir) throw ConfigInvalid("out_dir", "missing; pass --out");
        out_dir = *config.out_dir;
      }
      RunOptions opts;
      opts.threads = resolve_threads(threads, config);
      opts.stop_after = stop_after;
      return report(polymer::run(config, out_dir, opts), out_dir);
    }
    if (*res) {
      std::optional<ExperimentConfig> expected;
      if (!config_path.empty()) {
        expected = parse_config_text(read_file(config_path));
        if (seed) expected->master_seed = *seed;
      }
      const ExperimentConfig stored = parse_config_text(read_file(std::filesystem::path(out_dir) / "config.json"));
      RunOptions opts;
      opts.threads = resolve_threads(threads, stored);
      return report(polymer::resume(out_dir, opts, expected ? &*expected : nullptr), out_dir);
    }
    if (*oracle) {
      const auto r = verify_oracle(max_level, trials, oracle_seed,
                                   surrogate == "unit_weights" ? OracleSurrogate::unit_weights
                                                               : OracleSurrogate::none);
      std::printf("trials %d  max_level %d  per kind (none,in,out,exit,touch): %d %d %d %d %d\n",
                  r.trials, r.max_level, r.per_kind[0], r.per_kind[1], r.per_kind[2], r.per_kind[3],
                  r.per_kind[4]);
      std::printf("max relative log-domain error %.3e\n", r.max_error);
      if (!r.worst_case.empty()) std::printf("worst: %s\n", r.worst_case.c_str());
      std::printf("%s\n", r.passed ? "PASS" : "FAIL");
      return r.passed ? 0 : 1;
    }
    if (*shape) {
      if (x == 0.0 && y == 0.0) throw ConfigInvalid("x", "direction must be nonzero");
      std::printf("%s\n", format_double(shape_value(mu, x, y)).c_str());
      return 0;
    }
  } catch (const ConfigInvalid& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const ManifestMismatch& e) {
    std::cerr << "manifest mismatch: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
