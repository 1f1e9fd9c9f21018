#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "polymer/partition.hpp"

namespace polymer {

/// Statistics of one disorder sample. Values keep insertion order; a value
/// of nullopt marks a non-finite result (e.g. an empty restricted ensemble).
struct ReplicaRecord {
  struct Event {
    std::int64_t j = 1;
    EventKind kind = EventKind::C;
    friend bool operator==(const Event&, const Event&) = default;
  };

  std::uint64_t replica_index = 0;
  std::uint64_t derived_seed = 0;
  std::vector<std::pair<std::string, std::optional<double>>> values;
  std::optional<Event> event;

  /// Stores v, or null when v is not finite.
  void set(std::string key, double v);
  /// Finite value under key, or nullopt when missing or null.
  std::optional<double> get(std::string_view key) const;
  bool has(std::string_view key) const;

  friend bool operator==(const ReplicaRecord&, const ReplicaRecord&) = default;
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
  bool contains(double v) const noexcept { return low <= v && v <= high; }
  double half_width() const noexcept { return 0.5 * (high - low); }
};

struct BootstrapOptions {
  int resamples = 2000;
  double level = 0.95;
  std::uint64_t seed = 0x626f6f7473747270ULL;
};

/// Finite values of `key`; `excluded` counts records where it is null or absent.
std::vector<double> collect(std::span<const ReplicaRecord> records, std::string_view key,
                            std::size_t* excluded = nullptr);

/// Bessel-corrected sample covariance (two-pass).
double sample_covariance(std::span<const double> x, std::span<const double> y);
double sample_mean(std::span<const double> x);

struct MomentsEstimate {
  double mean = 0.0;
  double variance = 0.0;
  Interval mean_ci;
  Interval variance_ci;  ///< percentile bootstrap
  std::size_t n_samples = 0;
  std::size_t excluded = 0;
};

MomentsEstimate estimate_moments(std::span<const double> values, const BootstrapOptions& opts = {});
MomentsEstimate estimate_moments(std::span<const ReplicaRecord> records, std::string_view key,
                                 const BootstrapOptions& opts = {});

struct CovarianceEstimate {
  double covariance = 0.0;
  Interval ci;  ///< paired percentile bootstrap
  std::size_t n_samples = 0;
  std::size_t excluded = 0;
};

CovarianceEstimate estimate_covariance(std::span<const double> x, std::span<const double> y,
                                       const BootstrapOptions& opts = {});
/// Uses the records where both keys are finite.
CovarianceEstimate estimate_covariance(std::span<const ReplicaRecord> records,
                                       std::string_view key_x, std::string_view key_y,
                                       const BootstrapOptions& opts = {});

/// Percentile bootstrap of the mean.
Interval bootstrap_mean_ci(std::span<const double> values, const BootstrapOptions& opts = {});

/// Wilson score interval for a binomial proportion (default 95%).
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct TailPoint {
  double t = 0.0;
  double probability = 0.0;  ///< empirical P((value - center)/scale >= t)
  Interval ci;               ///< Wilson 95%
  std::size_t exceedances = 0;
};

std::vector<TailPoint> tail_curve(std::span<const double> values, double center, double scale,
                                  std::span<const double> grid);
std::vector<TailPoint> tail_curve(std::span<const ReplicaRecord> records, std::string_view key,
                                  double center, double scale, std::span<const double> grid);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_distance(std::span<const double> a, std::span<const double> b);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::vector<std::pair<double, double>> points;  ///< (log abscissa, log ordinate)
};

/// Ordinary least squares of log(ordinate) on log(abscissa).
/// Throws NonpositiveData on any nonpositive coordinate, InsufficientData
/// below three points.
ExponentFit fit_exponent(std::span<const std::pair<double, double>> points);

}  // namespace polymer
