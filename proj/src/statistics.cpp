#include "polymer/statistics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "polymer/disorder.hpp"
#include "polymer/errors.hpp"

namespace polymer {
namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Interval percentile_interval(std::vector<double> stats, double level) {
  std::sort(stats.begin(), stats.end());
  const double tail = 0.5 * (1.0 - level);
  return {quantile_sorted(stats, tail), quantile_sorted(stats, 1.0 - tail)};
}

// Resample b draws n indices from its own substream, so every estimator that
// shares the options sees the same resamples.
template <class Fn>
void for_each_resample(std::size_t n, const BootstrapOptions& opts, Fn&& fn) {
  std::vector<std::size_t> idx(n);
  for (int b = 0; b < opts.resamples; ++b) {
    Substream s(hash_combine(opts.seed, static_cast<std::uint64_t>(b)));
    for (auto& i : idx) i = static_cast<std::size_t>(s.next_below(n));
    fn(idx);
  }
}

std::vector<double> gather(std::span<const double> v, const std::vector<std::size_t>& idx) {
  std::vector<double> out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = v[idx[k]];
  return out;
}

}  // namespace

void ReplicaRecord::set(std::string key, double v) {
  std::optional<double> value;
  if (std::isfinite(v)) value = v;
  for (auto& [k, old] : values)
    if (k == key) {
      old = value;
      return;
    }
  values.emplace_back(std::move(key), value);
}

std::optional<double> ReplicaRecord::get(std::string_view key) const {
  for (const auto& [k, v] : values)
    if (k == key) return v;
  return std::nullopt;
}

bool ReplicaRecord::has(std::string_view key) const {
  for (const auto& kv : values)
    if (kv.first == key) return true;
  return false;
}

std::vector<double> collect(std::span<const ReplicaRecord> records, std::string_view key,
                            std::size_t* excluded) {
  std::vector<double> out;
  out.reserve(records.size());
  std::size_t skipped = 0;
  for (const auto& r : records) {
    if (auto v = r.get(key))
      out.push_back(*v);
    else
      ++skipped;
  }
  if (excluded) *excluded = skipped;
  return out;
}

double sample_mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("covariance needs paired samples");
  if (x.size() < 2) throw InsufficientData("covariance needs at least two samples");
  const double mx = sample_mean(x);
  const double my = sample_mean(y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
  return s / static_cast<double>(x.size() - 1);
}

MomentsEstimate estimate_moments(std::span<const double> values, const BootstrapOptions& opts) {
  if (values.size() < 2) throw InsufficientData("moments need at least two samples");
  MomentsEstimate est;
  est.n_samples = values.size();
  est.mean = sample_mean(values);
  est.variance = sample_covariance(values, values);
  std::vector<double> means, vars;
  means.reserve(static_cast<std::size_t>(opts.resamples));
  vars.reserve(static_cast<std::size_t>(opts.resamples));
  for_each_resample(values.size(), opts, [&](const std::vector<std::size_t>& idx) {
    const auto xs = gather(values, idx);
    means.push_back(sample_mean(xs));
    vars.push_back(sample_covariance(xs, xs));
  });
  est.mean_ci = percentile_interval(std::move(means), opts.level);
  est.variance_ci = percentile_interval(std::move(vars), opts.level);
  return est;
}

MomentsEstimate estimate_moments(std::span<const ReplicaRecord> records, std::string_view key,
                                 const BootstrapOptions& opts) {
  std::size_t excluded = 0;
  const auto values = collect(records, key, &excluded);
  MomentsEstimate est = estimate_moments(values, opts);
  est.excluded = excluded;
  return est;
}

CovarianceEstimate estimate_covariance(std::span<const double> x, std::span<const double> y,
                                       const BootstrapOptions& opts) {
  if (x.size() < 2) throw InsufficientData("covariance needs at least two samples");
  CovarianceEstimate est;
  est.n_samples = x.size();
  est.covariance = sample_covariance(x, y);
  std::vector<double> covs;
  covs.reserve(static_cast<std::size_t>(opts.resamples));
  for_each_resample(x.size(), opts, [&](const std::vector<std::size_t>& idx) {
    const auto xs = gather(x, idx);
    const auto ys = gather(y, idx);
    covs.push_back(sample_covariance(xs, ys));
  });
  est.ci = percentile_interval(std::move(covs), opts.level);
  return est;
}

CovarianceEstimate estimate_covariance(std::span<const ReplicaRecord> records,
                                       std::string_view key_x, std::string_view key_y,
                                       const BootstrapOptions& opts) {
  std::vector<double> xs, ys;
  std::size_t excluded = 0;
  for (const auto& r : records) {
    const auto x = r.get(key_x);
    const auto y = r.get(key_y);
    if (x && y) {
      xs.push_back(*x);
      ys.push_back(*y);
    } else {
      ++excluded;
    }
  }
  CovarianceEstimate est = estimate_covariance(xs, ys, opts);
  est.excluded = excluded;
  return est;
}

Interval bootstrap_mean_ci(std::span<const double> values, const BootstrapOptions& opts) {
  if (values.size() < 2) throw InsufficientData("bootstrap needs at least two samples");
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(opts.resamples));
  for_each_resample(values.size(), opts, [&](const std::vector<std::size_t>& idx) {
    means.push_back(sample_mean(gather(values, idx)));
  });
  return percentile_interval(std::move(means), opts.level);
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw InsufficientData("proportion needs at least one trial");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  Interval ci{std::max(0.0, centre - half), std::min(1.0, centre + half)};
  ci.low = std::min(ci.low, p);
  ci.high = std::max(ci.high, p);
  return ci;
}

std::vector<TailPoint> tail_curve(std::span<const double> values, double center, double scale,
                                  std::span<const double> grid) {
  if (values.empty()) throw InsufficientData("tail curve needs samples");
  if (!(scale > 0.0)) throw Error("tail curve scale must be positive");
  if (!std::is_sorted(grid.begin(), grid.end())) throw Error("tail grid must be ascending");
  std::vector<double> z(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) z[i] = (values[i] - center) / scale;
  std::sort(z.begin(), z.end());
  std::vector<TailPoint> out;
  out.reserve(grid.size());
  for (double t : grid) {
    const auto first = std::lower_bound(z.begin(), z.end(), t);
    TailPoint pt;
    pt.t = t;
    pt.exceedances = static_cast<std::size_t>(z.end() - first);
    pt.probability = static_cast<double>(pt.exceedances) / static_cast<double>(z.size());
    pt.ci = wilson_interval(pt.exceedances, z.size());
    out.push_back(pt);
  }
  return out;
}

std::vector<TailPoint> tail_curve(std::span<const ReplicaRecord> records, std::string_view key,
                                  double center, double scale, std::span<const double> grid) {
  const auto values = collect(records, key);
  return tail_curve(values, center, scale, grid);
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InsufficientData("KS distance needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return best;
}

ExponentFit fit_exponent(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw InsufficientData("exponent fit needs at least three points");
  const Eigen::Index m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  ExponentFit fit;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto [a, o] = points[static_cast<std::size_t>(i)];
    if (!(a > 0.0) || !(o > 0.0)) throw NonpositiveData("log-log fit needs positive data");
    design(i, 0) = 1.0;
    design(i, 1) = std::log(a);
    rhs(i) = std::log(o);
    fit.points.emplace_back(design(i, 1), rhs(i));
  }
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(rhs);
  fit.intercept = beta(0);
  fit.slope = beta(1);
  const Eigen::VectorXd resid = rhs - design * beta;
  const double s2 = resid.squaredNorm() / static_cast<double>(m - 2);
  const Eigen::VectorXd lx = design.col(1);
  const double sxx = (lx.array() - lx.mean()).square().sum();
  fit.stderr_slope = std::sqrt(s2 / sxx);
  return fit;
}

}  // namespace polymer
