#include "pacsw/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace pacsw {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Direction::Direction(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) {
    throw std::invalid_argument("Direction: dimension must be >= 2");
  }
  const double n = norm(coords_);
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-10) {
    throw std::invalid_argument("Direction: coordinates must have unit norm");
  }
}

Direction Direction::normalized(std::vector<double> coords) {
  if (coords.size() < 2) {
    throw std::invalid_argument("Direction: dimension must be >= 2");
  }
  const double n = norm(coords);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("Direction: cannot normalize a zero or non-finite vector");
  }
  for (double& c : coords) c /= n;
  return Direction(std::move(coords), unchecked_tag{});
}

double Direction::dot(const Direction& other) const {
  if (other.dim() != dim()) {
    throw std::invalid_argument("Direction: dimension mismatch");
  }
  return pacsw::dot(coords_, other.coords_);
}

double Direction::dot(std::span<const double> v) const {
  if (v.size() != dim()) {
    throw std::invalid_argument("Direction: dimension mismatch");
  }
  return pacsw::dot(coords_, v);
}

}  // namespace pacsw
