#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pacsw/measures.hpp"
#include "pacsw/rng.hpp"
#include "pacsw/sphere.hpp"

namespace pacsw {

struct PacSwConfig {
  enum class Baseline { none, leave_one_out_mean };
  enum class StepRule { plain, adam };

  double lambda_exponent = 0.5;  // lambda = n^alpha unless overridden
  std::optional<double> lambda_override;
  std::size_t num_slices = 200;
  std::size_t iterations = 200;
  double learning_rate = 0.1;
  double order_p = 2.0;
  std::uint64_t seed = 0;
  Baseline baseline = Baseline::leave_one_out_mean;
  StepRule step_rule = StepRule::plain;
  std::size_t threads = 1;
};

// One record per iteration, taken at the pre-update parameters.
// objective = sw - penalty; for the KL-regularized ascent penalty = kl / lambda.
struct TraceRecord {
  double objective = 0.0;
  double sw = 0.0;
  double kl = 0.0;
  double penalty = 0.0;
  double kappa = 0.0;
  double mean_dot_init = 0.0;
};

struct OptTrace {
  std::vector<TraceRecord> records;
};

struct FitResult {
  VmfParams params;
  OptTrace trace;
  double lambda = 0.0;
};

struct PacSwObjective {
  double value = 0.0;
  double sw = 0.0;
  double kl = 0.0;
};

// sw_estimate under vMF(params) minus KL(vMF || uniform) / lambda.
PacSwObjective pacsw_objective(const PointCloud& mu, const PointCloud& nu,
                               const VmfParams& params, double lambda, double p,
                               std::size_t m, const RngStream& rng);

// Score-function (likelihood-ratio) gradient of E_{theta~vMF}[f(theta)] with an
// optional leave-one-out mean baseline. mean_tangent lives in the tangent space
// at params.mean; kappa is the natural-scale d/dkappa estimate.
struct ScoreGradient {
  std::vector<double> mean_tangent;
  double kappa = 0.0;
};
ScoreGradient vmf_score_gradient(std::span<const double> f_values,
                                 std::span<const Direction> slices,
                                 const VmfParams& params,
                                 PacSwConfig::Baseline baseline);

// Stochastic gradient of the regularized objective at `params`.
// mean_tangent omits the KL part (the KL does not depend on the mean);
// log_kappa = kappa * (score kappa-gradient - kappa A_d'(kappa) / lambda).
struct PacSwGradient {
  std::vector<double> mean_tangent;
  double log_kappa = 0.0;
};
PacSwGradient pacsw_gradient(const PointCloud& mu, const PointCloud& nu,
                             const VmfParams& params, double lambda, double p,
                             std::size_t m, const RngStream& rng,
                             PacSwConfig::Baseline baseline =
                                 PacSwConfig::Baseline::leave_one_out_mean);

// Ascent on sw - KL/lambda over vMF parameters: tangent step plus retraction
// for the mean, additive step in log kappa. Slices are resampled each
// iteration from the iteration-indexed substream.
FitResult pacsw_fit(const PointCloud& mu, const PointCloud& nu,
                    const PacSwConfig& config,
                    const std::optional<VmfParams>& init = std::nullopt);

struct MaxSwResult {
  Direction direction;
  double value = 0.0;  // W_p^p along the returned direction
};

// Projected subgradient ascent over a single direction with multiplicative
// step adaptation; best over `restarts` random starts.
MaxSwResult maxsw_fit(const PointCloud& mu, const PointCloud& nu, double p,
                      std::size_t iterations, double eta, std::size_t restarts,
                      const RngStream& rng);

// Same ascent loop as pacsw_fit with the KL term replaced by the hinge penalty
// lambda_c * max(0, E|<theta, theta'>| - c_cap), the expectation estimated over
// disjoint consecutive pairs of the iteration's slice sample.
FitResult dsw_fit(const PointCloud& mu, const PointCloud& nu,
                  const PacSwConfig& config, double lambda_c, double c_cap,
                  const std::optional<VmfParams>& init = std::nullopt);

}  // namespace pacsw
