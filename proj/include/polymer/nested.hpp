#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "polymer/statistics.hpp"

namespace polymer {

// Covariance of the line-to-point free energies at (r,r) and (n,n) through
// conditioning on the weights at levels >= 2r. log Z_{L0,(r,r)} only sees
// weights below level 2r, so averaging the conditional covariance over the
// frozen band recovers the plain covariance.

/// Split field for one (outer, inner) draw: levels >= 2r are a function of
/// (master_seed, outer) only, levels < 2r of (master_seed, outer, inner).
BandSplitField<WeightField, WeightField> conditioned_field(double mu, std::int64_t r,
                                                           std::uint64_t master_seed,
                                                           std::uint64_t outer,
                                                           std::uint64_t inner);

/// Inner sample covariances for one outer draw, one per entry of n_list.
/// The pairs are (log Z_{L0,(r,r)}, log Z_{L0,(n,n)}).
std::vector<double> conditional_covariance_sample(double mu, std::int64_t r,
                                                  const std::vector<std::int64_t>& n_list,
                                                  int inner, std::uint64_t master_seed,
                                                  std::uint64_t outer);

struct NestedEstimate {
  double estimate = 0.0;
  Interval ci;  ///< percentile bootstrap over outer draws
  std::vector<double> per_outer;
};

/// Mean over outer draws of inner sample covariances from an arbitrary
/// sampler(outer, inner) -> (x, y).
NestedEstimate nested_covariance(int outer, int inner,
                                 const std::function<std::pair<double, double>(int, int)>& sampler,
                                 const BootstrapOptions& opts = {});

/// Aggregate per-outer conditional covariances into an estimate with CI.
NestedEstimate aggregate_nested(std::vector<double> per_outer, const BootstrapOptions& opts = {});

NestedEstimate nested_conditional_covariance(double mu, std::int64_t r, std::int64_t n, int outer,
                                             int inner, std::uint64_t master_seed,
                                             const BootstrapOptions& opts = {});

/// Same draws serve every n in n_list; one estimate per n.
std::vector<NestedEstimate> nested_conditional_covariance(double mu, std::int64_t r,
                                                          const std::vector<std::int64_t>& n_list,
                                                          int outer, int inner,
                                                          std::uint64_t master_seed,
                                                          const BootstrapOptions& opts = {});

}  // namespace polymer
