#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pacsw/geometry.hpp"

namespace pacsw {

// An empirical measure: n points in R^d with positive weights summing to one.
// Points are stored row-major; the default constructor assigns weight 1/n.
class PointCloud {
 public:
  PointCloud(std::vector<double> points, std::size_t dim);
  PointCloud(std::vector<double> points, std::size_t dim, std::vector<double> weights);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }
  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * d_, d_};
  }
  const std::vector<double>& flat() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  bool has_uniform_weights(double tol = 1e-12) const;

 private:
  void validate() const;

  std::vector<double> points_;
  std::vector<double> weights_;
  std::size_t n_ = 0;
  std::size_t d_ = 0;
};

PointCloud translated(const PointCloud& cloud, std::span<const double> shift);
PointCloud scaled(const PointCloud& cloud, double factor);

// A one-dimensional projection of an empirical measure.
struct Projected1D {
  std::vector<double> values;
  std::vector<double> weights;
  bool sorted = false;

  static Projected1D make(std::vector<double> values, std::vector<double> weights,
                          bool sorted = false);
  static Projected1D uniform(std::vector<double> values);

  std::size_t size() const { return values.size(); }
  bool has_uniform_weights(double tol = 1e-12) const;
  // Stable sort by value, weights carried along.
  void sort_in_place();
};

Projected1D project(const PointCloud& cloud, const Direction& theta);

enum class UnequalPolicy { delegate, error };

// W_p^p between two projections with equal size and uniform weights, by
// matching order statistics. Inputs that violate the precondition are either
// delegated to the quantile-sweep routine or rejected, per `policy`.
double wasserstein_1d_equal(const Projected1D& a, const Projected1D& b, double p,
                            UnequalPolicy policy = UnequalPolicy::delegate);

// W_p^p between arbitrary weighted projections via the merged-quantile sweep.
double wasserstein_1d_general(const Projected1D& a, const Projected1D& b, double p);

// Convenience accessor: W_p from a W_p^p value.
double p_root(double w_pow_p, double p);

}  // namespace pacsw
