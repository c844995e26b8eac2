#include "pacsw/sphere.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pacsw/error.hpp"

namespace pacsw {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_kappa(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("vMF: kappa must be finite and > 0");
  }
}

// Series for log I_nu(x) via log-sum-exp; accurate for small/moderate x.
double log_bessel_series(double nu, double x) {
  const double lx = std::log(x / 2.0);
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(64);
  for (int k = 0;; ++k) {
    const double t = 2.0 * k * lx - std::lgamma(k + 1.0) - std::lgamma(nu + k + 1.0);
    terms.push_back(t);
    if (t > max_term) max_term = t;
    if (k > x / 2.0 && t < max_term - 60.0) break;
    if (k > 4000) break;
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - max_term);
  return nu * lx + max_term + std::log(sum);
}

// Asymptotic expansion of log I_nu(x) for large x (truncated at the smallest
// term); adequate for x > 40 and the small orders used as anchors.
double log_bessel_asymptotic(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  double prev = std::numeric_limits<double>::max();
  for (int k = 1; k <= 40; ++k) {
    const double f = -(mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * x);
    term *= f;
    if (std::abs(term) >= prev) break;  // divergence onset
    sum += term;
    prev = std::abs(term);
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return x - 0.5 * std::log(2.0 * kPi * x) + std::log(sum);
}

// log I_{1/2}(x) = 0.5 log(2/(pi x)) + log sinh x, stable at both ends.
double log_bessel_half(double x) {
  const double log_sinh = x + std::log(-std::expm1(-2.0 * x)) - std::log(2.0);
  return 0.5 * (std::log(2.0) - std::log(kPi) - std::log(x)) + log_sinh;
}

double log_bessel_anchor(double nu0, double x) {
  if (nu0 == 0.5) return log_bessel_half(x);
  if (x <= 40.0) return log_bessel_series(nu0, x);
  return log_bessel_asymptotic(nu0, x);
}

}  // namespace

double log_sphere_area(std::size_t d) {
  if (d < 1) throw std::invalid_argument("log_sphere_area: d must be >= 1");
  const double half_d = 0.5 * static_cast<double>(d);
  return std::log(2.0) + half_d * std::log(kPi) - std::lgamma(half_d);
}

double bessel_ratio_order(double nu, double x) {
  if (!(nu >= 0.0)) throw std::invalid_argument("bessel_ratio_order: nu must be >= 0");
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument("bessel_ratio_order: x must be finite and > 0");
  }
  // Gauss continued fraction for I_{nu+1}/I_nu = 1/(b1 + 1/(b2 + ...)),
  // b_k = 2(nu + k)/x, evaluated by the modified Lentz scheme.
  const double tiny = 1e-300;
  double f = tiny;
  double c = f;
  double d = 0.0;
  const std::size_t max_iter =
      static_cast<std::size_t>(2e6 + 10.0 * (x + nu));
  for (std::size_t k = 1; k <= max_iter; ++k) {
    const double b = 2.0 * (nu + static_cast<double>(k)) / x;
    d = b + d;
    if (d == 0.0) d = tiny;
    c = b + 1.0 / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 5e-16) return f;
  }
  throw NumericError("bessel_ratio_order: continued fraction did not converge");
}

double bessel_ratio(std::size_t d, double kappa) {
  if (d < 2) throw std::invalid_argument("bessel_ratio: d must be >= 2");
  check_kappa(kappa);
  return bessel_ratio_order(0.5 * static_cast<double>(d) - 1.0, kappa);
}

double bessel_ratio_derivative(std::size_t d, double kappa) {
  const double a = bessel_ratio(d, kappa);
  return 1.0 - a * a - (static_cast<double>(d) - 1.0) * a / kappa;
}

double log_bessel_i(double nu, double x) {
  if (!(nu >= 0.0)) throw std::invalid_argument("log_bessel_i: nu must be >= 0");
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument("log_bessel_i: x must be finite and > 0");
  }
  const double steps_f = std::floor(nu);
  const int steps = static_cast<int>(steps_f);
  const double nu0 = nu - steps_f;
  double acc = log_bessel_anchor(nu0, x);
  if (steps == 0) return acc;
  // One continued fraction at the top order, then the stable downward
  // recurrence r_{q-1} = 1/(2q/x + r_q) yields every intermediate ratio.
  std::vector<double> ratios(steps);
  double r = bessel_ratio_order(nu - 1.0, x);  // I_nu / I_{nu-1}
  ratios[steps - 1] = r;
  for (int k = steps - 1; k >= 1; --k) {
    const double q = nu0 + static_cast<double>(k);
    r = 1.0 / (2.0 * q / x + r);
    ratios[k - 1] = r;
  }
  for (int k = 0; k < steps; ++k) acc += std::log(ratios[k]);
  return acc;
}

double vmf_log_normalizer(std::size_t d, double kappa) {
  if (d < 2) throw std::invalid_argument("vmf_log_normalizer: d must be >= 2");
  check_kappa(kappa);
  const double half_d = 0.5 * static_cast<double>(d);
  return (half_d - 1.0) * std::log(kappa) - half_d * kLog2Pi -
         log_bessel_i(half_d - 1.0, kappa);
}

VmfParams::VmfParams(Direction mean_direction, double concentration)
    : mean(std::move(mean_direction)), kappa(concentration) {
  check_kappa(kappa);
}

double vmf_log_density(const Direction& theta, const VmfParams& params) {
  if (theta.dim() != params.mean.dim()) {
    throw std::invalid_argument("vmf_log_density: dimension mismatch");
  }
  return vmf_log_normalizer(theta.dim(), params.kappa) +
         params.kappa * params.mean.dot(theta);
}

double kl_vmf_uniform(std::size_t d, double kappa) {
  if (d < 2) throw std::invalid_argument("kl_vmf_uniform: d must be >= 2");
  check_kappa(kappa);
  return kappa * bessel_ratio(d, kappa) + vmf_log_normalizer(d, kappa) +
         log_sphere_area(d);
}

double kl_vmf_uniform(const VmfParams& params) {
  return kl_vmf_uniform(params.mean.dim(), params.kappa);
}

double kl_vmf_uniform_dkappa(std::size_t d, double kappa) {
  return kappa * bessel_ratio_derivative(d, kappa);
}

Direction sample_uniform_sphere(std::size_t d, RngStream& rng) {
  if (d < 2) throw std::invalid_argument("sample_uniform_sphere: d must be >= 2");
  std::vector<double> v(d);
  while (true) {
    double n2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      v[i] = rng.gaussian();
      n2 += v[i] * v[i];
    }
    if (n2 > 1e-280) break;  // astronomically rare
  }
  return Direction::normalized(std::move(v));
}

namespace {

// Marsaglia-Tsang; the alpha < 1 case boosts through alpha + 1.
double sample_gamma(double alpha, RngStream& rng) {
  if (alpha < 1.0) {
    const double u = rng.uniform_open();
    return sample_gamma(alpha + 1.0, rng) * std::pow(u, 1.0 / alpha);
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x;
    double v;
    do {
      x = rng.gaussian();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_beta_symmetric(double alpha, RngStream& rng) {
  const double x = sample_gamma(alpha, rng);
  const double y = sample_gamma(alpha, rng);
  return x / (x + y);
}

}  // namespace

Direction sample_vmf(const VmfParams& params, RngStream& rng) {
  const std::size_t d = params.mean.dim();
  const double kappa = params.kappa;
  const double dm1 = static_cast<double>(d) - 1.0;

  // Tangent weight w = <theta, north pole> by Ulrich/Wood rejection.
  const double b = dm1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + dm1 * std::log(1.0 - x0 * x0);
  double w = 0.0;
  bool accepted = false;
  for (std::size_t trial = 0; trial < 1000000; ++trial) {
    const double z = sample_beta_symmetric(0.5 * dm1, rng);
    const double u = rng.uniform_open();
    w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) {
      accepted = true;
      break;
    }
  }
  if (!accepted) {
    throw NumericError("sample_vmf: rejection sampler exceeded the trial cap");
  }
  if (w > 1.0) w = 1.0;
  if (w < -1.0) w = -1.0;

  // Uniform direction in the orthogonal complement of the north pole e_d.
  std::vector<double> theta(d, 0.0);
  const double tangent = std::sqrt(std::max(0.0, 1.0 - w * w));
  if (d == 2) {
    theta[0] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * tangent;
  } else {
    std::vector<double> v(d - 1);
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (std::size_t i = 0; i + 1 < d; ++i) {
        v[i] = rng.gaussian();
        n2 += v[i] * v[i];
      }
    } while (n2 <= 1e-280);
    const double inv = 1.0 / std::sqrt(n2);
    for (std::size_t i = 0; i + 1 < d; ++i) theta[i] = tangent * v[i] * inv;
  }
  theta[d - 1] = w;

  // Householder reflection taking e_d to the mean direction.
  std::vector<double> u(d);
  double un2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    u[i] = (i == d - 1 ? 1.0 : 0.0) - params.mean[i];
    un2 += u[i] * u[i];
  }
  if (un2 > 1e-24) {
    double proj = 0.0;
    for (std::size_t i = 0; i < d; ++i) proj += u[i] * theta[i];
    const double f = 2.0 * proj / un2;
    for (std::size_t i = 0; i < d; ++i) theta[i] -= f * u[i];
  }
  return Direction::normalized(std::move(theta));
}

SliceDistribution SliceDistribution::uniform(std::size_t dim) {
  if (dim < 2) throw std::invalid_argument("SliceDistribution: dimension must be >= 2");
  return SliceDistribution(Kind::uniform, dim);
}

SliceDistribution SliceDistribution::vmf(VmfParams params) {
  SliceDistribution out(Kind::vmf, params.mean.dim());
  out.vmf_.push_back(std::move(params));
  return out;
}

SliceDistribution SliceDistribution::dirac_set(std::vector<Direction> atoms) {
  if (atoms.empty()) {
    throw std::invalid_argument("SliceDistribution: dirac_set needs at least one atom");
  }
  const std::size_t dim = atoms.front().dim();
  for (const auto& a : atoms) {
    if (a.dim() != dim) {
      throw std::invalid_argument("SliceDistribution: atoms must share a dimension");
    }
  }
  SliceDistribution out(Kind::dirac_set, dim);
  out.atoms_ = std::move(atoms);
  return out;
}

const VmfParams& SliceDistribution::vmf_params() const {
  if (kind_ != Kind::vmf) throw std::logic_error("SliceDistribution: not a vMF");
  return vmf_.front();
}

const std::vector<Direction>& SliceDistribution::atoms() const {
  if (kind_ != Kind::dirac_set) throw std::logic_error("SliceDistribution: not a dirac_set");
  return atoms_;
}

std::vector<Direction> sample_slices(const SliceDistribution& rho, std::size_t m,
                                     const RngStream& base) {
  if (m < 1) throw std::invalid_argument("sample_slices: m must be >= 1");
  std::vector<Direction> out;
  out.reserve(m);
  switch (rho.kind()) {
    case SliceDistribution::Kind::dirac_set: {
      const auto& atoms = rho.atoms();
      for (std::size_t j = 0; j < m; ++j) out.push_back(atoms[j % atoms.size()]);
      break;
    }
    case SliceDistribution::Kind::uniform: {
      for (std::size_t j = 0; j < m; ++j) {
        RngStream sub = base.substream(j);
        out.push_back(sample_uniform_sphere(rho.dim(), sub));
      }
      break;
    }
    case SliceDistribution::Kind::vmf: {
      for (std::size_t j = 0; j < m; ++j) {
        RngStream sub = base.substream(j);
        out.push_back(sample_vmf(rho.vmf_params(), sub));
      }
      break;
    }
  }
  return out;
}

}  // namespace pacsw
