#include "pacsw/datasets.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pacsw/error.hpp"
#include "pacsw/rng.hpp"

namespace pacsw {

namespace {

std::vector<double> random_psd_factor(std::size_t d, std::uint64_t seed) {
  // A with i.i.d. standard normal entries; Sigma = A A^T / d.
  RngStream rng = RngStream(seed).substream(0x505344);  // "PSD"
  std::vector<double> a(d * d);
  for (double& v : a) v = rng.gaussian();
  return a;
}

void check_spec(const SyntheticSpec& spec) {
  if (spec.dim < 1) throw std::invalid_argument("SyntheticSpec: dim must be >= 1");
  if (spec.sample_size < 1) throw std::invalid_argument("SyntheticSpec: n must be >= 1");
  if (spec.kind == SyntheticSpec::Kind::uniform_cube && !(spec.side > 0.0)) {
    throw std::invalid_argument("SyntheticSpec: side must be > 0");
  }
  if (spec.kind == SyntheticSpec::Kind::gaussian && !(spec.mean_shift >= 0.0)) {
    throw std::invalid_argument("SyntheticSpec: mean shift must be >= 0");
  }
}

std::vector<double> gaussian_cloud(const SyntheticSpec& spec, RngStream rng,
                                   const std::vector<double>& factor, double shift) {
  const std::size_t n = spec.sample_size;
  const std::size_t d = spec.dim;
  std::vector<double> pts(n * d);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<double> z(d);
  for (std::size_t i = 0; i < n; ++i) {
    if (factor.empty()) {
      for (std::size_t k = 0; k < d; ++k) pts[i * d + k] = rng.gaussian() + shift;
    } else {
      for (std::size_t k = 0; k < d; ++k) z[k] = rng.gaussian();
      for (std::size_t k = 0; k < d; ++k) {
        double s = 0.0;
        const double* row = factor.data() + k * d;
        for (std::size_t l = 0; l < d; ++l) s += row[l] * z[l];
        pts[i * d + k] = s * inv_sqrt_d + shift;
      }
    }
  }
  return pts;
}

std::uint32_t read_be_u32(std::ifstream& in, const std::string& path, std::size_t offset) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) {
    throw DataError(path + ": truncated header at offset " + std::to_string(offset));
  }
  return (static_cast<std::uint32_t>(buf[0]) << 24) |
         (static_cast<std::uint32_t>(buf[1]) << 16) |
         (static_cast<std::uint32_t>(buf[2]) << 8) | static_cast<std::uint32_t>(buf[3]);
}

}  // namespace

std::pair<PointCloud, PointCloud> generate(const SyntheticSpec& spec) {
  check_spec(spec);
  const RngStream root(spec.seed);
  const std::size_t n = spec.sample_size;
  const std::size_t d = spec.dim;

  if (spec.kind == SyntheticSpec::Kind::uniform_cube) {
    auto draw = [&](std::uint64_t which) {
      RngStream rng = root.substream(which);
      std::vector<double> pts(n * d);
      for (double& v : pts) v = spec.side * rng.uniform();
      return pts;
    };
    return {PointCloud(draw(0), d), PointCloud(draw(1), d)};
  }

  std::vector<double> factor;
  if (spec.covariance == SyntheticSpec::Covariance::random_psd) {
    factor = random_psd_factor(d, spec.covariance_seed);
  }
  std::vector<double> mu_pts = gaussian_cloud(spec, root.substream(0), factor, 0.0);
  std::vector<double> nu_pts =
      gaussian_cloud(spec, root.substream(1), factor, spec.mean_shift);
  return {PointCloud(std::move(mu_pts), d), PointCloud(std::move(nu_pts), d)};
}

PointCloud load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  std::vector<double> values;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      // allow a trailing blank line only
      if (in.peek() == EOF) break;
      throw DataError(path + ": line " + std::to_string(line_no) + ": empty row");
    }
    std::size_t fields = 0;
    const char* cur = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      const char* comma = static_cast<const char*>(memchr(cur, ',', end - cur));
      const char* stop = comma ? comma : end;
      double v = 0.0;
      const auto res = std::from_chars(cur, stop, v);
      if (res.ec != std::errc{} || res.ptr != stop) {
        throw DataError(path + ": line " + std::to_string(line_no) +
                        ": invalid numeric field");
      }
      if (!std::isfinite(v)) {
        throw DataError(path + ": line " + std::to_string(line_no) +
                        ": non-finite value");
      }
      values.push_back(v);
      ++fields;
      if (!comma) break;
      cur = comma + 1;
    }
    if (dim == 0) {
      dim = fields;
    } else if (fields != dim) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": expected " +
                      std::to_string(dim) + " fields, got " + std::to_string(fields));
    }
  }
  if (values.empty()) throw DataError(path + ": empty file");
  return PointCloud(std::move(values), dim);
}

std::map<int, PointCloud> load_idx_images(const std::string& images_path,
                                          const std::string& labels_path,
                                          const std::set<int>& classes,
                                          double flatten_scale) {
  if (classes.empty()) throw std::invalid_argument("load_idx_images: no classes requested");
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw DataError(images_path + ": cannot open file");
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw DataError(labels_path + ": cannot open file");

  const std::uint32_t img_magic = read_be_u32(img, images_path, 0);
  if (img_magic != 0x00000803u) {
    throw DataError(images_path + ": unexpected magic at offset 0 (want 0x00000803)");
  }
  const std::uint32_t count = read_be_u32(img, images_path, 4);
  const std::uint32_t rows = read_be_u32(img, images_path, 8);
  const std::uint32_t cols = read_be_u32(img, images_path, 12);

  const std::uint32_t lab_magic = read_be_u32(lab, labels_path, 0);
  if (lab_magic != 0x00000801u) {
    throw DataError(labels_path + ": unexpected magic at offset 0 (want 0x00000801)");
  }
  const std::uint32_t lab_count = read_be_u32(lab, labels_path, 4);
  if (lab_count != count) {
    throw DataError(labels_path + ": label count " + std::to_string(lab_count) +
                    " does not match image count " + std::to_string(count));
  }

  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> image(pixels);
  std::vector<unsigned char> labels(count);
  if (!lab.read(reinterpret_cast<char*>(labels.data()), labels.size())) {
    throw DataError(labels_path + ": truncated payload at offset 8");
  }

  std::map<int, std::vector<double>> flat;
  for (int cls : classes) flat[cls] = {};
  for (std::uint32_t i = 0; i < count; ++i) {
    if (!img.read(reinterpret_cast<char*>(image.data()), image.size())) {
      throw DataError(images_path + ": truncated payload at offset " +
                      std::to_string(16 + static_cast<std::size_t>(i) * pixels));
    }
    const int cls = labels[i];
    auto it = flat.find(cls);
    if (it == flat.end()) continue;
    for (std::size_t k = 0; k < pixels; ++k) {
      it->second.push_back(flatten_scale * static_cast<double>(image[k]));
    }
  }

  std::map<int, PointCloud> out;
  for (auto& [cls, data] : flat) {
    if (data.empty()) {
      throw DataError(images_path + ": no samples with label " + std::to_string(cls));
    }
    out.emplace(cls, PointCloud(std::move(data), pixels));
  }
  return out;
}

}  // namespace pacsw
