#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "pacsw/datasets.hpp"
#include "pacsw/error.hpp"
#include "pacsw/rng.hpp"
#include "pacsw/sliced.hpp"

using namespace pacsw;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("pacsw_test_" + name);
}

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

void write_be_u32(std::ofstream& out, std::uint32_t v) {
  const unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

// Minimal IDX pair: `images` are count x rows x cols bytes.
void write_idx_fixture(const std::filesystem::path& images,
                       const std::filesystem::path& labels,
                       const std::vector<std::vector<unsigned char>>& pixels,
                       const std::vector<unsigned char>& label_values,
                       std::uint32_t rows, std::uint32_t cols,
                       std::uint32_t images_magic = 0x00000803u) {
  std::ofstream img(images, std::ios::binary);
  write_be_u32(img, images_magic);
  write_be_u32(img, static_cast<std::uint32_t>(pixels.size()));
  write_be_u32(img, rows);
  write_be_u32(img, cols);
  for (const auto& p : pixels) img.write(reinterpret_cast<const char*>(p.data()), p.size());
  std::ofstream lab(labels, std::ios::binary);
  write_be_u32(lab, 0x00000801u);
  write_be_u32(lab, static_cast<std::uint32_t>(label_values.size()));
  lab.write(reinterpret_cast<const char*>(label_values.data()), label_values.size());
}

}  // namespace

TEST_CASE("synthetic generation is deterministic and shaped correctly") {
  SyntheticSpec spec;
  spec.kind = SyntheticSpec::Kind::uniform_cube;
  spec.side = 5.0;
  spec.dim = 4;
  spec.sample_size = 200;
  spec.seed = 17;
  auto [mu1, nu1] = generate(spec);
  auto [mu2, nu2] = generate(spec);
  CHECK(mu1.flat() == mu2.flat());
  CHECK(nu1.flat() == nu2.flat());
  CHECK(mu1.size() == 200);
  CHECK(mu1.dim() == 4);
  // the two clouds are independent draws, not copies
  CHECK(mu1.flat() != nu1.flat());

  // cube geometry bounds every pairwise distance by side * sqrt(d)
  double max_sq = 0.0;
  for (std::size_t i = 0; i < mu1.size(); ++i) {
    for (std::size_t j = 0; j < nu1.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 4; ++k) {
        const double diff = mu1.point(i)[k] - nu1.point(j)[k];
        s += diff * diff;
      }
      max_sq = std::max(max_sq, s);
    }
  }
  CHECK(std::sqrt(max_sq) <= 5.0 * 2.0);
  for (double v : mu1.flat()) {
    CHECK(v >= 0.0);
    CHECK(v <= 5.0);
  }
}

TEST_CASE("gaussian family matches its advertised moments") {
  SyntheticSpec spec;
  spec.kind = SyntheticSpec::Kind::gaussian;
  spec.mean_shift = 4.0;
  spec.covariance = SyntheticSpec::Covariance::identity;
  spec.dim = 2;
  spec.sample_size = 4000;
  spec.seed = 5;
  auto [mu, nu] = generate(spec);
  for (std::size_t k = 0; k < 2; ++k) {
    double mean_mu = 0.0;
    double mean_nu = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      mean_mu += mu.point(i)[k];
      mean_nu += nu.point(i)[k];
    }
    mean_mu /= static_cast<double>(mu.size());
    mean_nu /= static_cast<double>(nu.size());
    // CLT: 3 sigma / sqrt(n) ~ 0.047
    CHECK(std::abs(mean_nu - mean_mu - 4.0) <= 0.1);
  }
}

TEST_CASE("matched-law clouds drift together as n grows") {
  auto sw_at = [](std::size_t n) {
    SyntheticSpec spec;
    spec.kind = SyntheticSpec::Kind::gaussian;
    spec.mean_shift = 0.0;
    spec.covariance = SyntheticSpec::Covariance::random_psd;
    spec.covariance_seed = 3;
    spec.dim = 3;
    spec.sample_size = n;
    spec.seed = 11;
    auto [mu, nu] = generate(spec);
    return sw_estimate(mu, nu, SliceDistribution::uniform(3), 1.0, 200, RngStream(1)).value;
  };
  CHECK(sw_at(4000) < sw_at(40));
}

TEST_CASE("random psd covariance is shared and deterministic") {
  SyntheticSpec spec;
  spec.kind = SyntheticSpec::Kind::gaussian;
  spec.covariance = SyntheticSpec::Covariance::random_psd;
  spec.covariance_seed = 9;
  spec.dim = 6;
  spec.sample_size = 50;
  spec.seed = 1;
  auto [mu1, nu1] = generate(spec);
  auto [mu2, nu2] = generate(spec);
  CHECK(mu1.flat() == mu2.flat());
  spec.covariance_seed = 10;
  auto [mu3, nu3] = generate(spec);
  CHECK(mu1.flat() != mu3.flat());
}

TEST_CASE("csv loading") {
  const auto path = temp_file("points.csv");
  write_text(path, "1,2\n3,4\n");
  const auto cloud = load_csv(path.string());
  CHECK(cloud.size() == 2);
  CHECK(cloud.dim() == 2);
  CHECK(cloud.point(1)[1] == 4.0);

  write_text(path, "1,2\r\n3,4\r\n");
  CHECK(load_csv(path.string()).point(1)[0] == 3.0);

  write_text(path, "1,2\n3\n");
  CHECK_THROWS_WITH_AS(load_csv(path.string()),
                       doctest::Contains("line 2"), DataError);

  write_text(path, "1,2\n3,abc\n");
  CHECK_THROWS_AS(load_csv(path.string()), DataError);

  write_text(path, "1,2\n3,nan\n");
  CHECK_THROWS_AS(load_csv(path.string()), DataError);

  write_text(path, "");
  CHECK_THROWS_AS(load_csv(path.string()), DataError);

  CHECK_THROWS_AS(load_csv("/definitely/not/here.csv"), DataError);

  std::string big;
  for (int i = 0; i < 100000; ++i) big += std::to_string(i) + ",1\n";
  write_text(path, big);
  CHECK(load_csv(path.string()).size() == 100000);
  std::filesystem::remove(path);
}

TEST_CASE("idx loading") {
  const auto images = temp_file("images.idx");
  const auto labels = temp_file("labels.idx");
  const std::vector<std::vector<unsigned char>> pixels = {{0, 51, 102, 255},
                                                          {10, 20, 30, 40}};
  write_idx_fixture(images, labels, pixels, {4, 5}, 2, 2);

  const auto by_class = load_idx_images(images.string(), labels.string(), {4, 5});
  CHECK(by_class.size() == 2);
  const auto& coats = by_class.at(4);
  CHECK(coats.size() == 1);
  CHECK(coats.dim() == 4);
  // round-trip at scale 1/255
  CHECK(coats.point(0)[1] == doctest::Approx(51.0 / 255.0).epsilon(1e-15));
  CHECK(coats.point(0)[3] == doctest::Approx(1.0).epsilon(1e-15));
  for (double v : by_class.at(5).flat()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  // exact pixel round-trip at unit scale
  const auto raw = load_idx_images(images.string(), labels.string(), {5}, 1.0);
  CHECK(raw.at(5).point(0)[0] == 10.0);
  CHECK(raw.at(5).point(0)[3] == 40.0);

  // wrong magic
  write_idx_fixture(images, labels, pixels, {4, 5}, 2, 2, 0x00000802u);
  CHECK_THROWS_WITH_AS(load_idx_images(images.string(), labels.string(), {4}),
                       doctest::Contains("magic"), DataError);

  // truncated payload names the offset
  write_idx_fixture(images, labels, pixels, {4, 5}, 2, 2);
  std::filesystem::resize_file(images, 18);
  CHECK_THROWS_WITH_AS(load_idx_images(images.string(), labels.string(), {4}),
                       doctest::Contains("offset"), DataError);

  // count mismatch
  write_idx_fixture(images, labels, pixels, {4}, 2, 2);
  CHECK_THROWS_AS(load_idx_images(images.string(), labels.string(), {4}), DataError);

  // missing class
  write_idx_fixture(images, labels, pixels, {4, 4}, 2, 2);
  CHECK_THROWS_AS(load_idx_images(images.string(), labels.string(), {4, 5}), DataError);

  std::filesystem::remove(images);
  std::filesystem::remove(labels);
}
