#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pacsw {

// A unit vector on S^{d-1}, d >= 2. The constructor validates the norm; use
// normalized() to build one from an arbitrary nonzero vector.
class Direction {
 public:
  explicit Direction(std::vector<double> coords);

  static Direction normalized(std::vector<double> coords);

  std::size_t dim() const { return coords_.size(); }
  const std::vector<double>& coords() const { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }

  double dot(const Direction& other) const;
  double dot(std::span<const double> v) const;

 private:
  struct unchecked_tag {};
  Direction(std::vector<double> coords, unchecked_tag) : coords_(std::move(coords)) {}
  std::vector<double> coords_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

}  // namespace pacsw
