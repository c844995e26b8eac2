#include "pacsw/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "pacsw/rng.hpp"
#include "pacsw/sphere.hpp"

namespace pacsw {

namespace {

void check_common(double p, std::size_t n) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("bounds: order p must be finite and >= 1");
  }
  if (n < 1) throw std::invalid_argument("bounds: n must be >= 1");
}

void check_regime(const MomentRegime& regime) {
  std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
        if constexpr (std::is_same_v<T, BoundedRegime>) {
          if (!positive(r.diameter)) {
            throw std::invalid_argument("BoundedRegime: diameter must be finite and > 0");
          }
        } else if constexpr (std::is_same_v<T, SubGaussianRegime>) {
          if (!positive(r.sigma2) || !positive(r.tau2)) {
            throw std::invalid_argument("SubGaussianRegime: proxies must be finite and > 0");
          }
        } else {
          if (!positive(r.sigma2) || !positive(r.b) || !positive(r.tau2) || !positive(r.c)) {
            throw std::invalid_argument("BernsteinRegime: parameters must be finite and > 0");
          }
        }
      },
      regime);
}

double bernstein_q(double p, const BoundConstants& constants) {
  const double q = constants.bernstein_q > 0.0 ? constants.bernstein_q : 2.0 * p + 2.0;
  if (!(q > 2.0 * p)) {
    throw std::invalid_argument("bounds: Bernstein q must satisfy q > 2p");
  }
  return q;
}

}  // namespace

double phi_value(const MomentRegime& regime, double p, double lambda, std::size_t n) {
  check_common(p, n);
  check_regime(regime);
  if (!(lambda > 0.0)) throw std::invalid_argument("phi_value: lambda must be > 0");
  if (const auto* bounded = std::get_if<BoundedRegime>(&regime)) {
    return 0.5 * std::pow(bounded->diameter, 2.0 * p);
  }
  if (p != 1.0) {
    throw std::invalid_argument("phi_value: phi undefined for p > 1 under this regime");
  }
  if (const auto* subg = std::get_if<SubGaussianRegime>(&regime)) {
    return subg->sigma2 + subg->tau2;
  }
  const auto& bern = std::get<BernsteinRegime>(regime);
  const double sigma2_star = std::max(bern.sigma2, bern.tau2);
  const double b_star = std::max(bern.b, bern.c);
  const double nd = static_cast<double>(n);
  if (!(lambda < nd / (2.0 * b_star))) {
    throw std::invalid_argument("phi_value: Bernstein regime requires lambda < n/(2 b*)");
  }
  return 2.0 * sigma2_star / nd / (1.0 - 2.0 * b_star * lambda / nd);
}

double psi_value(const MomentRegime& regime, double p, std::size_t n,
                 const BoundConstants& constants) {
  check_common(p, n);
  check_regime(regime);
  if (n < 2) throw std::invalid_argument("psi_value: n must be >= 2");
  const double nd = static_cast<double>(n);
  const double c = constants.psi_constant;
  if (const auto* bounded = std::get_if<BoundedRegime>(&regime)) {
    return c * p * std::pow(bounded->diameter, p) / std::sqrt(nd);
  }
  const double log_factor = std::sqrt(std::log(nd)) / std::sqrt(nd);
  if (const auto* subg = std::get_if<SubGaussianRegime>(&regime)) {
    const double sigma2_star = std::max(subg->sigma2, subg->tau2);
    return c * std::pow(4.0 * sigma2_star, p) * log_factor;
  }
  const auto& bern = std::get<BernsteinRegime>(regime);
  const double q = bernstein_q(p, constants);
  const double sigma_star = std::sqrt(std::max(bern.sigma2, bern.tau2));
  const double b_star = std::max(bern.b, bern.c);
  return c * std::pow(sigma_star, 2.0 * p / q) * std::pow(b_star, p * (q - 2.0) / q) *
         log_factor;
}

BoundReport assemble_bound(double sw_hat, double kl, const MomentRegime& regime,
                           double p, double lambda, std::size_t n, double delta,
                           const BoundConstants& constants) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("assemble_bound: delta must lie in (0, 1]");
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("assemble_bound: lambda must be > 0");
  if (!(kl >= 0.0)) throw std::invalid_argument("assemble_bound: kl must be >= 0");
  BoundReport report;
  report.sw_hat = sw_hat;
  report.kl = kl;
  report.lambda = lambda;
  report.delta = delta;
  report.phi_term = lambda * phi_value(regime, p, lambda, n) / static_cast<double>(n);
  report.psi_term = psi_value(regime, p, n, constants);
  report.kl_term = (kl + std::log(1.0 / delta)) / lambda;
  report.lower_bound = sw_hat - report.phi_term - report.kl_term - report.psi_term;
  report.constants_used = constants;
  if (std::holds_alternative<BernsteinRegime>(regime) &&
      report.constants_used.bernstein_q == 0.0) {
    report.constants_used.bernstein_q = 2.0 * p + 2.0;
  }
  return report;
}

double best_lambda(double kl, const MomentRegime& regime, double p, std::size_t n,
                   double delta, const BoundConstants& constants) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("best_lambda: delta must lie in (0, 1]");
  }
  if (!(kl >= 0.0)) throw std::invalid_argument("best_lambda: kl must be >= 0");
  check_regime(regime);
  check_common(p, n);
  const double nd = static_cast<double>(n);
  const double budget = kl + std::log(1.0 / delta);
  if (budget == 0.0) return std::sqrt(nd);

  if (!std::holds_alternative<BernsteinRegime>(regime)) {
    const double phi = phi_value(regime, p, 1.0, n);  // lambda-independent here
    return std::sqrt(nd * budget / phi);
  }

  // Bernstein: golden-section maximum of the lambda-dependent part over the
  // admissible interval (0, n/(2 b*)).
  const auto& bern = std::get<BernsteinRegime>(regime);
  const double b_star = std::max(bern.b, bern.c);
  const double hi_limit = nd / (2.0 * b_star);
  auto objective = [&](double lambda) {
    return -lambda * phi_value(regime, p, lambda, n) / nd - budget / lambda;
  };
  const double gr = 0.6180339887498948482;
  double lo = hi_limit * 1e-12;
  double hi = hi_limit * (1.0 - 1e-12);
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int it = 0; it < 400 && (hi - lo) > 1e-14 * hi_limit; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = objective(x1);
    }
  }
  return 0.5 * (lo + hi);
}

nlohmann::ordered_json BoundReport::to_json() const {
  nlohmann::ordered_json j;
  j["sw_hat"] = sw_hat;
  j["kl"] = kl;
  j["lambda"] = lambda;
  j["delta"] = delta;
  j["phi_term"] = phi_term;
  j["psi_term"] = psi_term;
  j["kl_term"] = kl_term;
  j["lower_bound"] = lower_bound;
  nlohmann::ordered_json c;
  c["psi_constant"] = constants_used.psi_constant;
  if (constants_used.bernstein_q > 0.0) c["bernstein_q"] = constants_used.bernstein_q;
  j["constants_used"] = c;
  return j;
}

double estimate_diameter(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  const std::size_t d = cloud.dim();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = cloud.point(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = cloud.point(j);
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = a[k] - b[k];
        s += diff * diff;
      }
      if (s > best) best = s;
    }
  }
  return std::sqrt(best);
}

double estimate_variance_proxy(const PointCloud& cloud, std::size_t probes,
                               std::uint64_t seed) {
  const std::size_t n = cloud.size();
  const std::size_t d = cloud.dim();
  RngStream rng(seed);
  double best = 0.0;
  for (std::size_t t = 0; t < probes; ++t) {
    RngStream sub = rng.substream(t);
    const Direction theta = sample_uniform_sphere(d, sub);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += theta.dot(cloud.point(i)) * cloud.weights()[i];
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = theta.dot(cloud.point(i)) - mean;
      var += v * v * cloud.weights()[i];
    }
    if (var > best) best = var;
  }
  return best;
}

}  // namespace pacsw
