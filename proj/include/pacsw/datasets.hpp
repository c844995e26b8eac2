#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>

#include "pacsw/measures.hpp"

namespace pacsw {

// Synthetic generators for the benchmark families: two i.i.d. samples from a
// uniform cube, or a Gaussian pair N(0, Sigma) vs N(gamma*1, Sigma).
struct SyntheticSpec {
  enum class Kind { uniform_cube, gaussian };
  enum class Covariance { identity, random_psd };

  Kind kind = Kind::gaussian;
  double side = 1.0;         // uniform_cube: [0, side]^d
  double mean_shift = 0.0;   // gaussian: nu shifted by mean_shift along the all-ones vector
  Covariance covariance = Covariance::identity;
  std::uint64_t covariance_seed = 0;
  std::size_t dim = 2;
  std::size_t sample_size = 1;
  std::uint64_t seed = 0;
};

// Deterministic per seed; random_psd uses Sigma = A A^T / d with standard
// normal A drawn from covariance_seed, shared by both clouds.
std::pair<PointCloud, PointCloud> generate(const SyntheticSpec& spec);

// Comma-separated reals, one point per row, uniform weights. Rejects ragged
// rows, non-numeric fields and non-finite values with the offending line.
PointCloud load_csv(const std::string& path);

// IDX ubyte pair (images magic 0x00000803, labels 0x00000801, big-endian).
// Filters by label, flattens each image row-major and scales the pixels.
std::map<int, PointCloud> load_idx_images(const std::string& images_path,
                                          const std::string& labels_path,
                                          const std::set<int>& classes,
                                          double flatten_scale = 1.0 / 255.0);

}  // namespace pacsw
