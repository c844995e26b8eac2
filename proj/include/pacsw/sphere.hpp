#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "pacsw/geometry.hpp"
#include "pacsw/rng.hpp"

namespace pacsw {

// von Mises-Fisher parameters: mean direction and concentration kappa > 0.
struct VmfParams {
  VmfParams(Direction mean_direction, double concentration);

  Direction mean;
  double kappa;
};

// A distribution of slices on S^{d-1}: uniform, vMF, or a fixed direction set
// with equal mass.
class SliceDistribution {
 public:
  enum class Kind { uniform, vmf, dirac_set };

  static SliceDistribution uniform(std::size_t dim);
  static SliceDistribution vmf(VmfParams params);
  static SliceDistribution dirac_set(std::vector<Direction> atoms);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  const VmfParams& vmf_params() const;
  const std::vector<Direction>& atoms() const;

 private:
  SliceDistribution(Kind kind, std::size_t dim) : kind_(kind), dim_(dim) {}

  Kind kind_;
  std::size_t dim_;
  std::vector<VmfParams> vmf_;  // empty or one element
  std::vector<Direction> atoms_;
};

// log of the surface area of S^{d-1}: log(2 pi^{d/2} / Gamma(d/2)).
double log_sphere_area(std::size_t d);

// Mean-resultant Bessel ratio A_d(kappa) = I_{d/2}(kappa) / I_{d/2-1}(kappa),
// evaluated in ratio form by a continued fraction. Lies in (0, 1) and is
// increasing in kappa.
double bessel_ratio(std::size_t d, double kappa);

// d/dkappa A_d(kappa) = 1 - A^2 - (d-1) A / kappa.
double bessel_ratio_derivative(std::size_t d, double kappa);

// Ratio I_{nu+1}(x) / I_nu(x) for nu >= 0, x > 0.
double bessel_ratio_order(double nu, double x);

// log I_nu(x) for nu >= 0, x > 0. Evaluated as a series/closed-form anchor at
// the fractional part of nu plus an upward chain of continued-fraction ratios,
// so it stays in log space (no overflow for x up to ~1e5, nu up to ~5e3).
double log_bessel_i(double nu, double x);

// log C_{d/2}(kappa) = (d/2-1) log kappa - (d/2) log(2 pi) - log I_{d/2-1}(kappa).
double vmf_log_normalizer(std::size_t d, double kappa);

double vmf_log_density(const Direction& theta, const VmfParams& params);

// KL(vMF(m, kappa) || U(S^{d-1})) = kappa A_d(kappa) + log C_{d/2}(kappa)
//                                   + log Area(S^{d-1}).
// Independent of the mean, increasing in kappa, >= 0.
double kl_vmf_uniform(std::size_t d, double kappa);
double kl_vmf_uniform(const VmfParams& params);

// d/dkappa KL = kappa * A_d'(kappa).
double kl_vmf_uniform_dkappa(std::size_t d, double kappa);

// Gaussian-normalize construction; rotation-invariant law on S^{d-1}.
Direction sample_uniform_sphere(std::size_t d, RngStream& rng);

// Ulrich/Wood rejection sampler around the north pole composed with a
// Householder reflection onto the mean direction. The rejection loop is
// capped at 1e6 trials per sample; breaching the cap raises NumericError.
Direction sample_vmf(const VmfParams& params, RngStream& rng);

// m slice draws. Random kinds use the substream indexed by the draw position,
// so the result is identical for any parallel execution order; dirac_set
// cycles its atoms deterministically.
std::vector<Direction> sample_slices(const SliceDistribution& rho, std::size_t m,
                                     const RngStream& base);

}  // namespace pacsw
