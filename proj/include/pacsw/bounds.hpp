#pragma once

#include <cstddef>
#include <string>
#include <variant>

#include <json.hpp>

#include "pacsw/measures.hpp"

namespace pacsw {

// Moment assumptions on the compared measures, selecting the phi/psi forms.
struct BoundedRegime {
  double diameter = 0.0;  // diameter of the common support
};
struct SubGaussianRegime {
  double sigma2 = 0.0;  // variance proxy of mu
  double tau2 = 0.0;    // variance proxy of nu
};
struct BernsteinRegime {
  double sigma2 = 0.0;
  double b = 0.0;
  double tau2 = 0.0;
  double c = 0.0;
};
using MomentRegime = std::variant<BoundedRegime, SubGaussianRegime, BernsteinRegime>;

// The proof-side constants are existential, not explicit; they are
// configuration with default 1 and are echoed in every report.
struct BoundConstants {
  double psi_constant = 1.0;
  double bernstein_q = 0.0;  // 0 selects the default q = 2p + 2
};

struct BoundReport {
  double sw_hat = 0.0;
  double kl = 0.0;
  double lambda = 0.0;
  double delta = 0.0;
  double phi_term = 0.0;  // lambda * phi / n
  double psi_term = 0.0;
  double kl_term = 0.0;  // (kl + log(1/delta)) / lambda
  double lower_bound = 0.0;
  BoundConstants constants_used;

  nlohmann::ordered_json to_json() const;
};

// Moment-generating-function constant. Bounded: Delta^{2p}/2 for any p >= 1.
// Sub-Gaussian: sigma2 + tau2, p = 1 only. Bernstein: the lambda-dependent
// 2 sigma*^2 n^{-1} (1 - 2 b* lambda / n)^{-1}, p = 1 and lambda < n/(2 b*).
double phi_value(const MomentRegime& regime, double p, double lambda, std::size_t n);

// Sample-complexity term. Bounded: C p Delta^p n^{-1/2}. Sub-Gaussian:
// C (4 sigma*^2)^p sqrt(log n / n). Bernstein: C sigma*^{2p/q} b*^{p(q-2)/q}
// sqrt(log n / n) with q > 2p.
double psi_value(const MomentRegime& regime, double p, std::size_t n,
                 const BoundConstants& constants);

// lower_bound = sw_hat - lambda*phi/n - (kl + log(1/delta))/lambda - psi(n).
// delta in (0, 1]; delta = 1 turns the log term off.
BoundReport assemble_bound(double sw_hat, double kl, const MomentRegime& regime,
                           double p, double lambda, std::size_t n, double delta,
                           const BoundConstants& constants = {});

// Maximizer of the lambda-dependent part of the lower bound. Closed form
// sqrt(n (kl + log(1/delta)) / phi) for constant-phi regimes; golden-section
// search over (0, n/(2 b*)) for the Bernstein regime. Falls back to sqrt(n)
// when kl + log(1/delta) = 0.
double best_lambda(double kl, const MomentRegime& regime, double p, std::size_t n,
                   double delta, const BoundConstants& constants = {});

// Plug-in helpers for regime parameters; they estimate, they do not certify.
double estimate_diameter(const PointCloud& cloud);
double estimate_variance_proxy(const PointCloud& cloud, std::size_t probes = 64,
                               std::uint64_t seed = 0);

}  // namespace pacsw
