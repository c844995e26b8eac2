#include "pacsw/sliced.hpp"

#include <cmath>
#include <stdexcept>

#include "pacsw/parallel.hpp"

namespace pacsw {

SwEstimate sw_estimate_with_slices(const PointCloud& mu, const PointCloud& nu,
                                   std::span<const Direction> slices, double p,
                                   const SwOptions& options) {
  if (slices.empty()) {
    throw std::invalid_argument("sw_estimate_with_slices: slice list is empty");
  }
  if (mu.dim() != nu.dim()) {
    throw std::invalid_argument("sw_estimate_with_slices: cloud dimensions differ");
  }
  for (const auto& s : slices) {
    if (s.dim() != mu.dim()) {
      throw std::invalid_argument("sw_estimate_with_slices: slice dimension mismatch");
    }
  }
  const std::size_t m = slices.size();
  std::vector<double> per_slice(m);
  parallel_for(m, options.threads, [&](std::size_t j) {
    const Projected1D pa = project(mu, slices[j]);
    const Projected1D pb = project(nu, slices[j]);
    per_slice[j] = wasserstein_1d_equal(pa, pb, p, UnequalPolicy::delegate);
  });

  double sum = 0.0;
  for (double v : per_slice) sum += v;
  const double mean = sum / static_cast<double>(m);
  double sq = 0.0;
  for (double v : per_slice) sq += (v - mean) * (v - mean);
  const double std_error =
      m > 1 ? std::sqrt(sq / static_cast<double>(m - 1)) / std::sqrt(static_cast<double>(m))
            : 0.0;

  SwEstimate out;
  out.value = mean;
  out.order_p = p;
  out.num_slices = m;
  out.std_error = std_error;
  if (options.keep_per_slice) out.per_slice = std::move(per_slice);
  return out;
}

SwEstimate sw_estimate(const PointCloud& mu, const PointCloud& nu,
                       const SliceDistribution& rho, double p, std::size_t m,
                       const RngStream& rng, const SwOptions& options) {
  if (mu.dim() != nu.dim()) {
    throw std::invalid_argument("sw_estimate: cloud dimensions differ");
  }
  if (rho.dim() != mu.dim()) {
    throw std::invalid_argument("sw_estimate: slice distribution dimension mismatch");
  }
  if (m < 1) throw std::invalid_argument("sw_estimate: m must be >= 1");
  const std::vector<Direction> slices = sample_slices(rho, m, rng);
  return sw_estimate_with_slices(mu, nu, slices, p, options);
}

}  // namespace pacsw
