#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pacsw/measures.hpp"
#include "pacsw/rng.hpp"
#include "pacsw/sphere.hpp"

namespace pacsw {

// Monte-Carlo estimate of SW_p^p: mean of per-slice 1D W_p^p values.
struct SwEstimate {
  double value = 0.0;
  double order_p = 1.0;
  std::size_t num_slices = 0;
  double std_error = 0.0;  // sample std of per-slice values / sqrt(m)
  std::optional<std::vector<double>> per_slice;
};

struct SwOptions {
  bool keep_per_slice = false;
  std::size_t threads = 1;  // 0 = hardware concurrency
};

// Samples m slices from rho, projects both clouds per slice and averages the
// 1D distances. Per-slice results land in indexed slots and are reduced
// sequentially, so the value does not depend on the worker count.
SwEstimate sw_estimate(const PointCloud& mu, const PointCloud& nu,
                       const SliceDistribution& rho, double p, std::size_t m,
                       const RngStream& rng, const SwOptions& options = {});

// Deterministic evaluation on a fixed slice set; used for paired comparisons
// (symmetry/triangle checks, train vs. test under a learned rho with common
// slices).
SwEstimate sw_estimate_with_slices(const PointCloud& mu, const PointCloud& nu,
                                   std::span<const Direction> slices, double p,
                                   const SwOptions& options = {});

}  // namespace pacsw
