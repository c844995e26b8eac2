#include "pacsw/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pacsw/error.hpp"
#include "pacsw/parallel.hpp"
#include "pacsw/sliced.hpp"

namespace pacsw {

namespace {

constexpr double kLogKappaMin = -18.420680743952367;  // kappa = 1e-8
constexpr double kLogKappaMax = 11.512925464970229;   // kappa = 1e5

void validate_config(const PacSwConfig& config) {
  if (config.iterations < 1) {
    throw std::invalid_argument("fit: iterations must be >= 1");
  }
  if (config.num_slices < 1) {
    throw std::invalid_argument("fit: num_slices must be >= 1");
  }
  if (config.baseline == PacSwConfig::Baseline::leave_one_out_mean &&
      config.num_slices < 2) {
    throw std::invalid_argument("fit: leave-one-out baseline needs num_slices >= 2");
  }
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    throw std::invalid_argument("fit: learning_rate must be finite and >= 0");
  }
  if (!(config.order_p >= 1.0)) {
    throw std::invalid_argument("fit: order p must be >= 1");
  }
  if (!(config.lambda_exponent > 0.0) || !(config.lambda_exponent < 1.0)) {
    throw std::invalid_argument("fit: lambda exponent must lie in (0, 1)");
  }
  if (config.lambda_override && !(*config.lambda_override > 0.0)) {
    throw std::invalid_argument("fit: lambda override must be > 0");
  }
}

double resolve_lambda(const PacSwConfig& config, const PointCloud& mu,
                      const PointCloud& nu) {
  if (config.lambda_override) return *config.lambda_override;
  const double n = static_cast<double>(std::min(mu.size(), nu.size()));
  return std::pow(n, config.lambda_exponent);
}

std::vector<double> per_slice_distances(const PointCloud& mu, const PointCloud& nu,
                                        std::span<const Direction> slices, double p,
                                        std::size_t threads) {
  std::vector<double> w(slices.size());
  parallel_for(slices.size(), threads, [&](std::size_t j) {
    const Projected1D pa = project(mu, slices[j]);
    const Projected1D pb = project(nu, slices[j]);
    w[j] = wasserstein_1d_equal(pa, pb, p, UnequalPolicy::delegate);
  });
  return w;
}

// First-order moment stepper; Adam keeps per-coordinate state for the mean
// plus a scalar for log kappa.
struct Stepper {
  PacSwConfig::StepRule rule;
  double eta;
  std::size_t t = 0;
  std::vector<double> m1_mean, m2_mean;
  double m1_lk = 0.0, m2_lk = 0.0;

  Stepper(PacSwConfig::StepRule rule_, double eta_, std::size_t dim)
      : rule(rule_), eta(eta_), m1_mean(dim, 0.0), m2_mean(dim, 0.0) {}

  void apply(std::vector<double>& mean_update, double& log_kappa_update,
             std::span<const double> g_mean, double g_lk) {
    ++t;
    if (rule == PacSwConfig::StepRule::plain) {
      for (std::size_t i = 0; i < g_mean.size(); ++i) mean_update[i] = eta * g_mean[i];
      log_kappa_update = eta * g_lk;
      return;
    }
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t i = 0; i < g_mean.size(); ++i) {
      m1_mean[i] = b1 * m1_mean[i] + (1.0 - b1) * g_mean[i];
      m2_mean[i] = b2 * m2_mean[i] + (1.0 - b2) * g_mean[i] * g_mean[i];
      mean_update[i] = eta * (m1_mean[i] / c1) / (std::sqrt(m2_mean[i] / c2) + eps);
    }
    m1_lk = b1 * m1_lk + (1.0 - b1) * g_lk;
    m2_lk = b2 * m2_lk + (1.0 - b2) * g_lk * g_lk;
    log_kappa_update = eta * (m1_lk / c1) / (std::sqrt(m2_lk / c2) + eps);
  }
};

VmfParams default_init(std::size_t dim, const RngStream& root) {
  RngStream sub = root.substream(0x696e6974);  // "init"
  return VmfParams(sample_uniform_sphere(dim, sub), 1.0);
}

Direction retract(const Direction& mean, std::span<const double> update) {
  std::vector<double> v = mean.coords();
  double n2 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] += update[i];
    n2 += v[i] * v[i];
  }
  if (!(n2 > 1e-24) || !std::isfinite(n2)) return mean;
  return Direction::normalized(std::move(v));
}

enum class FitMode { pac_bayes, dsw };

FitResult run_fit(const PointCloud& mu, const PointCloud& nu,
                  const PacSwConfig& config, const std::optional<VmfParams>& init,
                  FitMode mode, double lambda_c, double c_cap) {
  if (mu.dim() != nu.dim()) {
    throw std::invalid_argument("fit: cloud dimensions differ");
  }
  validate_config(config);
  if (mode == FitMode::dsw) {
    if (!(lambda_c >= 0.0)) throw std::invalid_argument("dsw_fit: lambda_c must be >= 0");
    if (!(c_cap > 0.0 && c_cap <= 1.0)) {
      throw std::invalid_argument("dsw_fit: c_cap must lie in (0, 1]");
    }
    if (config.num_slices < 2) {
      throw std::invalid_argument("dsw_fit: num_slices must be >= 2 for pair estimates");
    }
  }

  const std::size_t d = mu.dim();
  const RngStream root(config.seed);
  VmfParams params = init ? *init : default_init(d, root);
  if (params.mean.dim() != d) {
    throw std::invalid_argument("fit: init mean dimension mismatch");
  }
  const Direction init_mean = params.mean;
  const double lambda = resolve_lambda(config, mu, nu);
  const std::size_t m = config.num_slices;

  Stepper stepper(config.step_rule, config.learning_rate, d);
  OptTrace trace;
  trace.records.reserve(config.iterations);
  std::vector<double> mean_update(d, 0.0);

  for (std::size_t t = 0; t < config.iterations; ++t) {
    const RngStream iter_rng = root.substream(t);
    const auto slices = sample_slices(SliceDistribution::vmf(params), m, iter_rng);
    const auto w = per_slice_distances(mu, nu, slices, config.order_p, config.threads);
    const double sw = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(m);

    const double a_ratio = bessel_ratio(d, params.kappa);
    const ScoreGradient sw_grad = vmf_score_gradient(w, slices, params, config.baseline);

    double kl = 0.0;
    double penalty = 0.0;
    std::vector<double> g_mean = sw_grad.mean_tangent;
    double g_kappa = sw_grad.kappa;

    if (mode == FitMode::pac_bayes) {
      kl = kl_vmf_uniform(d, params.kappa);
      penalty = kl / lambda;
      g_kappa -= kl_vmf_uniform_dkappa(d, params.kappa) / lambda;
    } else {
      // Hinge penalty on the pairwise-similarity estimate over disjoint
      // consecutive slice pairs.
      const std::size_t pairs = m / 2;
      std::vector<double> gvals(pairs);
      for (std::size_t i = 0; i < pairs; ++i) {
        gvals[i] = std::abs(slices[2 * i].dot(slices[2 * i + 1]));
      }
      const double e_hat =
          std::accumulate(gvals.begin(), gvals.end(), 0.0) / static_cast<double>(pairs);
      const double hinge = std::max(0.0, e_hat - c_cap);
      penalty = lambda_c * hinge;
      if (hinge > 0.0 && lambda_c > 0.0) {
        const double gsum = std::accumulate(gvals.begin(), gvals.end(), 0.0);
        std::vector<double> pen_mean(d, 0.0);
        double pen_kappa = 0.0;
        for (std::size_t i = 0; i < pairs; ++i) {
          double coef = gvals[i];
          if (config.baseline == PacSwConfig::Baseline::leave_one_out_mean && pairs > 1) {
            coef -= (gsum - gvals[i]) / static_cast<double>(pairs - 1);
          }
          for (const std::size_t idx : {2 * i, 2 * i + 1}) {
            const double dm = params.mean.dot(slices[idx]);
            for (std::size_t k = 0; k < d; ++k) {
              pen_mean[k] += coef * params.kappa * (slices[idx][k] - dm * params.mean[k]);
            }
            pen_kappa += coef * (dm - a_ratio);
          }
        }
        for (std::size_t k = 0; k < d; ++k) {
          g_mean[k] -= lambda_c * pen_mean[k] / static_cast<double>(pairs);
        }
        g_kappa -= lambda_c * pen_kappa / static_cast<double>(pairs);
      }
    }

    const double objective = sw - penalty;
    if (!std::isfinite(objective)) {
      throw NumericError("fit: non-finite objective at iteration " + std::to_string(t));
    }
    trace.records.push_back({objective, sw, kl, penalty, params.kappa,
                             params.mean.dot(init_mean)});

    const double g_log_kappa = params.kappa * g_kappa;
    double log_kappa_update = 0.0;
    stepper.apply(mean_update, log_kappa_update, g_mean, g_log_kappa);
    const Direction new_mean = retract(params.mean, mean_update);
    const double new_log_kappa = std::clamp(std::log(params.kappa) + log_kappa_update,
                                            kLogKappaMin, kLogKappaMax);
    params = VmfParams(new_mean, std::exp(new_log_kappa));
  }

  return {params, std::move(trace), lambda};
}

}  // namespace

ScoreGradient vmf_score_gradient(std::span<const double> f_values,
                                 std::span<const Direction> slices,
                                 const VmfParams& params,
                                 PacSwConfig::Baseline baseline) {
  if (f_values.size() != slices.size() || f_values.empty()) {
    throw std::invalid_argument("vmf_score_gradient: values and slices must match");
  }
  const std::size_t m = f_values.size();
  if (baseline == PacSwConfig::Baseline::leave_one_out_mean && m < 2) {
    throw std::invalid_argument("vmf_score_gradient: leave-one-out baseline needs m >= 2");
  }
  const std::size_t d = params.mean.dim();
  const double a_ratio = bessel_ratio(d, params.kappa);
  const double sum = std::accumulate(f_values.begin(), f_values.end(), 0.0);

  ScoreGradient grad;
  grad.mean_tangent.assign(d, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double coef = f_values[j];
    if (baseline == PacSwConfig::Baseline::leave_one_out_mean) {
      coef -= (sum - f_values[j]) / static_cast<double>(m - 1);
    }
    const double dm = params.mean.dot(slices[j]);
    for (std::size_t k = 0; k < d; ++k) {
      grad.mean_tangent[k] += coef * params.kappa * (slices[j][k] - dm * params.mean[k]);
    }
    grad.kappa += coef * (dm - a_ratio);
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  for (double& g : grad.mean_tangent) g *= inv_m;
  grad.kappa *= inv_m;
  return grad;
}

PacSwObjective pacsw_objective(const PointCloud& mu, const PointCloud& nu,
                               const VmfParams& params, double lambda, double p,
                               std::size_t m, const RngStream& rng) {
  if (!(lambda > 0.0)) throw std::invalid_argument("pacsw_objective: lambda must be > 0");
  const SwEstimate est = sw_estimate(mu, nu, SliceDistribution::vmf(params), p, m, rng);
  const double kl = kl_vmf_uniform(params);
  return {est.value - kl / lambda, est.value, kl};
}

PacSwGradient pacsw_gradient(const PointCloud& mu, const PointCloud& nu,
                             const VmfParams& params, double lambda, double p,
                             std::size_t m, const RngStream& rng,
                             PacSwConfig::Baseline baseline) {
  if (!(lambda > 0.0)) throw std::invalid_argument("pacsw_gradient: lambda must be > 0");
  if (mu.dim() != nu.dim() || params.mean.dim() != mu.dim()) {
    throw std::invalid_argument("pacsw_gradient: dimension mismatch");
  }
  const auto slices = sample_slices(SliceDistribution::vmf(params), m, rng);
  const auto w = per_slice_distances(mu, nu, slices, p, 1);
  const ScoreGradient sg = vmf_score_gradient(w, slices, params, baseline);
  const std::size_t d = mu.dim();
  const double g_kappa = sg.kappa - kl_vmf_uniform_dkappa(d, params.kappa) / lambda;
  return {sg.mean_tangent, params.kappa * g_kappa};
}

FitResult pacsw_fit(const PointCloud& mu, const PointCloud& nu,
                    const PacSwConfig& config, const std::optional<VmfParams>& init) {
  return run_fit(mu, nu, config, init, FitMode::pac_bayes, 0.0, 1.0);
}

FitResult dsw_fit(const PointCloud& mu, const PointCloud& nu,
                  const PacSwConfig& config, double lambda_c, double c_cap,
                  const std::optional<VmfParams>& init) {
  return run_fit(mu, nu, config, init, FitMode::dsw, lambda_c, c_cap);
}

namespace {

struct ProjectionEval {
  double value = 0.0;
  std::vector<std::size_t> order_mu, order_nu;
  std::vector<double> proj_mu, proj_nu;
};

double abs_pow_deriv_base(double s, double p) {
  // |s|^{p-1} sign(s); subgradient 0 at s = 0 for p = 1.
  if (s == 0.0) return 0.0;
  const double a = std::abs(s);
  const double mag = (p == 1.0) ? 1.0 : (p == 2.0 ? a : std::pow(a, p - 1.0));
  return s > 0.0 ? mag : -mag;
}

ProjectionEval eval_direction(const PointCloud& mu, const PointCloud& nu,
                              const Direction& theta, double p, bool want_orders) {
  ProjectionEval ev;
  const std::size_t n = mu.size();
  ev.proj_mu = project(mu, theta).values;
  ev.proj_nu = project(nu, theta).values;
  ev.order_mu.resize(n);
  ev.order_nu.resize(n);
  std::iota(ev.order_mu.begin(), ev.order_mu.end(), std::size_t{0});
  std::iota(ev.order_nu.begin(), ev.order_nu.end(), std::size_t{0});
  std::stable_sort(ev.order_mu.begin(), ev.order_mu.end(),
                   [&](std::size_t a, std::size_t b) { return ev.proj_mu[a] < ev.proj_mu[b]; });
  std::stable_sort(ev.order_nu.begin(), ev.order_nu.end(),
                   [&](std::size_t a, std::size_t b) { return ev.proj_nu[a] < ev.proj_nu[b]; });
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = ev.proj_mu[ev.order_mu[i]] - ev.proj_nu[ev.order_nu[i]];
    const double a = std::abs(s);
    sum += (p == 1.0) ? a : (p == 2.0 ? a * a : std::pow(a, p));
  }
  ev.value = sum / static_cast<double>(n);
  if (!want_orders) {
    ev.order_mu.clear();
    ev.order_nu.clear();
  }
  return ev;
}

}  // namespace

MaxSwResult maxsw_fit(const PointCloud& mu, const PointCloud& nu, double p,
                      std::size_t iterations, double eta, std::size_t restarts,
                      const RngStream& rng) {
  if (mu.dim() != nu.dim()) throw std::invalid_argument("maxsw_fit: dimensions differ");
  if (mu.size() != nu.size() || !mu.has_uniform_weights() || !nu.has_uniform_weights()) {
    throw std::invalid_argument(
        "maxsw_fit: clouds must have equal size and uniform weights");
  }
  if (iterations < 1 || restarts < 1) {
    throw std::invalid_argument("maxsw_fit: iterations and restarts must be >= 1");
  }
  if (!(eta > 0.0)) throw std::invalid_argument("maxsw_fit: eta must be > 0");
  if (!(p >= 1.0)) throw std::invalid_argument("maxsw_fit: p must be >= 1");

  const std::size_t n = mu.size();
  const std::size_t d = mu.dim();
  double best_value = -1.0;
  std::vector<double> best_theta;

  for (std::size_t r = 0; r < restarts; ++r) {
    RngStream sub = rng.substream(r);
    Direction theta = sample_uniform_sphere(d, sub);
    ProjectionEval ev = eval_direction(mu, nu, theta, p, true);
    double step = eta;

    for (std::size_t t = 0; t < iterations; ++t) {
      // Subgradient under the current sorted matching.
      std::vector<double> g(d, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = ev.order_mu[i];
        const std::size_t b = ev.order_nu[i];
        const double s = ev.proj_mu[a] - ev.proj_nu[b];
        const double coef = p * abs_pow_deriv_base(s, p) / static_cast<double>(n);
        if (coef == 0.0) continue;
        const auto xa = mu.point(a);
        const auto yb = nu.point(b);
        for (std::size_t k = 0; k < d; ++k) g[k] += coef * (xa[k] - yb[k]);
      }
      const double gt_dot = dot(g, theta.coords());
      double gn2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        g[k] -= gt_dot * theta[k];
        gn2 += g[k] * g[k];
      }
      const double gn = std::sqrt(gn2);
      if (!(gn > 1e-14)) break;

      std::vector<double> cand = theta.coords();
      for (std::size_t k = 0; k < d; ++k) cand[k] += step * g[k] / gn;
      Direction cand_dir = Direction::normalized(std::move(cand));
      ProjectionEval cand_ev = eval_direction(mu, nu, cand_dir, p, true);
      if (cand_ev.value > ev.value) {
        theta = std::move(cand_dir);
        ev = std::move(cand_ev);
        step = std::min(step * 1.3, 1.0);
      } else {
        step *= 0.5;
        if (step < 1e-12) break;
      }
    }
    if (ev.value > best_value) {
      best_value = ev.value;
      best_theta = theta.coords();
    }
  }
  return {Direction(std::move(best_theta)), best_value};
}

}  // namespace pacsw
