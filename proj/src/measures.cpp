#include "pacsw/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pacsw {

namespace {

double abs_pow(double x, double p) {
  const double a = std::abs(x);
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  if (p == 3.0) return a * a * a;
  return std::pow(a, p);
}

void check_order(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("wasserstein_1d: order p must be finite and >= 1");
  }
}

struct Atom {
  double value;
  double weight;
};

// Neumaier-compensated sum; the plain loop drifts past the 1e-12 invariant
// gate around n ~ 1e5.
double compensated_sum(const std::vector<double>& values) {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

std::vector<Atom> sorted_atoms(const Projected1D& x) {
  std::vector<Atom> atoms(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) atoms[i] = {x.values[i], x.weights[i]};
  if (!x.sorted) {
    std::stable_sort(atoms.begin(), atoms.end(),
                     [](const Atom& a, const Atom& b) { return a.value < b.value; });
  }
  return atoms;
}

}  // namespace

PointCloud::PointCloud(std::vector<double> points, std::size_t dim)
    : points_(std::move(points)), d_(dim) {
  if (d_ == 0 || points_.empty() || points_.size() % d_ != 0) {
    throw std::invalid_argument("PointCloud: points must form n x d with n,d >= 1");
  }
  n_ = points_.size() / d_;
  weights_.assign(n_, 1.0 / static_cast<double>(n_));
  validate();
}

PointCloud::PointCloud(std::vector<double> points, std::size_t dim,
                       std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)), d_(dim) {
  if (d_ == 0 || points_.empty() || points_.size() % d_ != 0) {
    throw std::invalid_argument("PointCloud: points must form n x d with n,d >= 1");
  }
  n_ = points_.size() / d_;
  if (weights_.size() != n_) {
    throw std::invalid_argument("PointCloud: weight count must match point count");
  }
  validate();
}

void PointCloud::validate() const {
  for (double v : points_) {
    if (!std::isfinite(v)) throw std::invalid_argument("PointCloud: non-finite coordinate");
  }
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("PointCloud: weights must be finite and > 0");
    }
  }
  if (std::abs(compensated_sum(weights_) - 1.0) > 1e-12) {
    throw std::invalid_argument("PointCloud: weights must sum to 1");
  }
}

bool PointCloud::has_uniform_weights(double tol) const {
  const double u = 1.0 / static_cast<double>(n_);
  for (double w : weights_) {
    if (std::abs(w - u) > tol) return false;
  }
  return true;
}

PointCloud translated(const PointCloud& cloud, std::span<const double> shift) {
  if (shift.size() != cloud.dim()) {
    throw std::invalid_argument("translated: shift dimension mismatch");
  }
  std::vector<double> pts = cloud.flat();
  const std::size_t d = cloud.dim();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) pts[i * d + k] += shift[k];
  }
  return {std::move(pts), d, cloud.weights()};
}

PointCloud scaled(const PointCloud& cloud, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw std::invalid_argument("scaled: factor must be finite and > 0");
  }
  std::vector<double> pts = cloud.flat();
  for (double& v : pts) v *= factor;
  return {std::move(pts), cloud.dim(), cloud.weights()};
}

Projected1D Projected1D::make(std::vector<double> values, std::vector<double> weights,
                              bool sorted) {
  if (values.empty() || values.size() != weights.size()) {
    throw std::invalid_argument("Projected1D: values and weights must match and be nonempty");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("Projected1D: weights must be finite and >= 0");
    }
  }
  if (std::abs(compensated_sum(weights) - 1.0) > 1e-12) {
    throw std::invalid_argument("Projected1D: weights must sum to 1");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("Projected1D: non-finite value");
  }
  if (sorted && !std::is_sorted(values.begin(), values.end())) {
    throw std::invalid_argument("Projected1D: sorted flag set on unsorted values");
  }
  Projected1D out;
  out.values = std::move(values);
  out.weights = std::move(weights);
  out.sorted = sorted;
  return out;
}

Projected1D Projected1D::uniform(std::vector<double> values) {
  const std::size_t n = values.size();
  if (n == 0) throw std::invalid_argument("Projected1D: empty values");
  return make(std::move(values), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

bool Projected1D::has_uniform_weights(double tol) const {
  const double u = 1.0 / static_cast<double>(size());
  for (double w : weights) {
    if (std::abs(w - u) > tol) return false;
  }
  return true;
}

void Projected1D::sort_in_place() {
  if (sorted) return;
  auto atoms = sorted_atoms(*this);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    values[i] = atoms[i].value;
    weights[i] = atoms[i].weight;
  }
  sorted = true;
}

Projected1D project(const PointCloud& cloud, const Direction& theta) {
  if (theta.dim() != cloud.dim()) {
    throw std::invalid_argument("project: direction dimension must match the cloud");
  }
  const std::size_t n = cloud.size();
  const std::size_t d = cloud.dim();
  const double* pts = cloud.flat().data();
  const double* t = theta.coords().data();
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    const double* row = pts + i * d;
    for (std::size_t k = 0; k < d; ++k) s += t[k] * row[k];
    values[i] = s;
  }
  Projected1D out;
  out.values = std::move(values);
  out.weights = cloud.weights();
  out.sorted = false;
  return out;
}

double wasserstein_1d_equal(const Projected1D& a, const Projected1D& b, double p,
                            UnequalPolicy policy) {
  check_order(p);
  if (a.size() != b.size() || !a.has_uniform_weights() || !b.has_uniform_weights()) {
    if (policy == UnequalPolicy::error) {
      throw std::invalid_argument(
          "wasserstein_1d_equal: inputs must have equal size and uniform weights");
    }
    return wasserstein_1d_general(a, b, p);
  }
  const std::size_t n = a.size();
  std::vector<double> av = a.values;
  std::vector<double> bv = b.values;
  if (!a.sorted) std::stable_sort(av.begin(), av.end());
  if (!b.sorted) std::stable_sort(bv.begin(), bv.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += abs_pow(av[i] - bv[i], p);
  return sum / static_cast<double>(n);
}

double wasserstein_1d_general(const Projected1D& a, const Projected1D& b, double p) {
  check_order(p);
  const auto atoms_a = sorted_atoms(a);
  const auto atoms_b = sorted_atoms(b);
  // Sweep the union of cumulative-weight breakpoints; each segment pairs one
  // quantile of a with one quantile of b.
  std::size_t i = 0;
  std::size_t j = 0;
  double ra = atoms_a[0].weight;
  double rb = atoms_b[0].weight;
  double cost = 0.0;
  while (true) {
    const double seg = std::min(ra, rb);
    if (seg > 0.0) cost += seg * abs_pow(atoms_a[i].value - atoms_b[j].value, p);
    ra -= seg;
    rb -= seg;
    if (ra <= 0.0) {
      ++i;
      if (i >= atoms_a.size()) break;
      ra = atoms_a[i].weight;
    }
    if (rb <= 0.0) {
      ++j;
      if (j >= atoms_b.size()) break;
      rb = atoms_b[j].weight;
    }
  }
  return cost;
}

double p_root(double w_pow_p, double p) {
  check_order(p);
  if (w_pow_p < 0.0) throw std::invalid_argument("p_root: negative distance");
  if (p == 1.0) return w_pow_p;
  if (p == 2.0) return std::sqrt(w_pow_p);
  return std::pow(w_pow_p, 1.0 / p);
}

}  // namespace pacsw
