#include "polymer/nested.hpp"

#include <algorithm>
#include <tuple>

#include "polymer/errors.hpp"

namespace polymer {
namespace {

constexpr std::uint64_t kUpperTag = 0x7570706572ULL;  // "upper"
constexpr std::uint64_t kLowerTag = 0x6c6f776572ULL;  // "lower"

void check_args(std::int64_t r, std::int64_t n, int outer, int inner) {
  if (inner < 2 || outer < 2) throw InsufficientData("nested covariance needs outer, inner >= 2");
  if (r < 2 || 2 * r > n) throw Error("nested covariance needs 2 <= r <= n/2");
}

}  // namespace

BandSplitField<WeightField, WeightField> conditioned_field(double mu, std::int64_t r,
                                                           std::uint64_t master_seed,
                                                           std::uint64_t outer,
                                                           std::uint64_t inner) {
  const std::uint64_t outer_seed = hash_combine(master_seed, outer);
  return {WeightField(mu, hash_combine(outer_seed, kLowerTag ^ hash_combine(inner, kLowerTag))),
          WeightField(mu, hash_combine(outer_seed, kUpperTag)), 2 * r};
}

std::vector<double> conditional_covariance_sample(double mu, std::int64_t r,
                                                  const std::vector<std::int64_t>& n_list,
                                                  int inner, std::uint64_t master_seed,
                                                  std::uint64_t outer) {
  if (n_list.empty()) throw Error("nested covariance needs at least one n");
  const std::int64_t n_max = *std::max_element(n_list.begin(), n_list.end());
  for (auto n : n_list) check_args(r, n, 2, inner);

  // Every path from L0 to (n,n) crosses level 2r exactly once, so
  //   Z_{L0,n} = sum_u Z_{L0,u} * G_n(u),  u on level 2r,
  // where G_n(u) (weights of all but the last vertex from u on) only sees the
  // frozen band. One backward pass per n serves every inner draw.
  const auto frozen = conditioned_field(mu, r, master_seed, outer, 0).upper;
  std::vector<ProfileResult> profiles;
  for (auto n : n_list) profiles.push_back(line_profile(frozen, r, LineSpec::point(diag(n))));

  const LineSpec flat = LineSpec::full(diag(0));
  const LineSpec crossing = LineSpec::segment(diag(r), static_cast<double>(n_max - r));
  const detail::SweepPlan plan = detail::plan_forward(flat, crossing);
  const std::int64_t x_lo = r - (n_max - r);
  std::vector<double> lower_in(static_cast<std::size_t>(2 * (n_max - r) + 1));

  std::vector<double> xs;
  std::vector<std::vector<double>> ys(n_list.size());
  for (int i = 0; i < inner; ++i) {
    const auto lower = conditioned_field(mu, r, master_seed, outer, static_cast<std::uint64_t>(i)).lower;
    std::fill(lower_in.begin(), lower_in.end(), kLogZero<double>);
    detail::forward_sweep<false>(lower, flat, crossing, plan, nullptr, true,
                                 [&](LatticePoint p, double v) {
                                   if (p.level() == 2 * r && p.x >= x_lo && p.x - x_lo < static_cast<std::int64_t>(lower_in.size()))
                                     lower_in[static_cast<std::size_t>(p.x - x_lo)] = v;
                                 });
    xs.push_back(lower_in[static_cast<std::size_t>(r - x_lo)]);
    for (std::size_t k = 0; k < profiles.size(); ++k) {
      const ProfileResult& g = profiles[k];
      double total = kLogZero<double>;
      for (std::size_t j = 0; j < g.offsets.size(); ++j) {
        const std::int64_t x = r + g.offsets[j];
        total = log_add_exp(total, lower_in[static_cast<std::size_t>(x - x_lo)] + g.logz[j].v);
      }
      ys[k].push_back(total);
    }
  }
  std::vector<double> out;
  for (const auto& y : ys) out.push_back(sample_covariance(xs, y));
  return out;
}

NestedEstimate aggregate_nested(std::vector<double> per_outer, const BootstrapOptions& opts) {
  if (per_outer.size() < 2) throw InsufficientData("nested covariance needs outer >= 2");
  NestedEstimate est;
  est.estimate = sample_mean(per_outer);
  est.ci = bootstrap_mean_ci(per_outer, opts);
  est.per_outer = std::move(per_outer);
  return est;
}

NestedEstimate nested_covariance(int outer, int inner,
                                 const std::function<std::pair<double, double>(int, int)>& sampler,
                                 const BootstrapOptions& opts) {
  if (inner < 2 || outer < 2) throw InsufficientData("nested covariance needs outer, inner >= 2");
  std::vector<double> per_outer;
  std::vector<double> xs(static_cast<std::size_t>(inner)), ys(static_cast<std::size_t>(inner));
  for (int o = 0; o < outer; ++o) {
    for (int i = 0; i < inner; ++i)
      std::tie(xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(i)]) = sampler(o, i);
    per_outer.push_back(sample_covariance(xs, ys));
  }
  return aggregate_nested(std::move(per_outer), opts);
}

NestedEstimate nested_conditional_covariance(double mu, std::int64_t r, std::int64_t n, int outer,
                                             int inner, std::uint64_t master_seed,
                                             const BootstrapOptions& opts) {
  return nested_conditional_covariance(mu, r, std::vector<std::int64_t>{n}, outer, inner,
                                       master_seed, opts)
      .front();
}

std::vector<NestedEstimate> nested_conditional_covariance(double mu, std::int64_t r,
                                                          const std::vector<std::int64_t>& n_list,
                                                          int outer, int inner,
                                                          std::uint64_t master_seed,
                                                          const BootstrapOptions& opts) {
  for (auto n : n_list) check_args(r, n, outer, inner);
  std::vector<std::vector<double>> per_n(n_list.size());
  for (int o = 0; o < outer; ++o) {
    const auto covs =
        conditional_covariance_sample(mu, r, n_list, inner, master_seed, static_cast<std::uint64_t>(o));
    for (std::size_t k = 0; k < covs.size(); ++k) per_n[k].push_back(covs[k]);
  }
  std::vector<NestedEstimate> out;
  for (auto& v : per_n) out.push_back(aggregate_nested(std::move(v), opts));
  return out;
}

}  // namespace polymer
