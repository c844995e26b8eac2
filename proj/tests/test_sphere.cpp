#include <doctest.h>

#include <cmath>
#include <vector>

#include "pacsw/error.hpp"
#include "pacsw/rng.hpp"
#include "pacsw/sphere.hpp"
#include "support/oracles.hpp"

using namespace pacsw;

namespace {
constexpr double kPi = 3.14159265358979323846;

Direction e_axis(std::size_t d, std::size_t axis) {
  std::vector<double> v(d, 0.0);
  v[axis] = 1.0;
  return Direction(std::move(v));
}
}  // namespace

TEST_CASE("bessel ratio closed forms and limits") {
  // d=3 reduces to coth(kappa) - 1/kappa
  const double expected = 1.0 / std::tanh(1.0) - 1.0;
  CHECK(bessel_ratio(3, 1.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(bessel_ratio(3, 1.0) == doctest::Approx(0.313035285499).epsilon(1e-9));

  // small-kappa series A_d ~ kappa/d
  CHECK(bessel_ratio(3, 1e-4) == doctest::Approx(1e-4 / 3.0).epsilon(1e-9));

  // large-kappa asymptote A_d ~ 1 - (d-1)/(2 kappa)
  CHECK(bessel_ratio(3, 100.0) == doctest::Approx(0.99).epsilon(1e-3));

  CHECK_THROWS_AS(bessel_ratio(3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(bessel_ratio(3, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(bessel_ratio(1, 1.0), std::invalid_argument);
}

TEST_CASE("bessel ratio against the series oracle") {
  for (std::size_t d : {2, 3, 4, 5, 10, 21, 100}) {
    for (double kappa : {0.01, 0.5, 1.0, 5.0, 30.0, 200.0, 2000.0, 10000.0}) {
      const double nu = 0.5 * static_cast<double>(d) - 1.0;
      const double ref = oracles::bessel_ratio_series(nu, kappa);
      CHECK(bessel_ratio(d, kappa) == doctest::Approx(ref).epsilon(1e-10));
    }
  }
}

TEST_CASE("bessel ratio is monotone in kappa and within (0,1)") {
  for (std::size_t d : {2, 3, 7}) {
    double prev = 0.0;
    for (double kappa = 0.25; kappa < 300.0; kappa *= 2.2) {
      const double a = bessel_ratio(d, kappa);
      CHECK(a > prev);
      CHECK(a < 1.0);
      prev = a;
    }
  }
}

TEST_CASE("log bessel against the series oracle") {
  for (double nu : {0.0, 0.5, 1.0, 2.5, 17.0, 391.0}) {
    for (double x : {0.05, 1.0, 10.0, 80.0, 1000.0}) {
      const double ref = oracles::log_bessel_series(nu, x);
      CHECK(log_bessel_i(nu, x) == doctest::Approx(ref).epsilon(1e-11));
    }
  }
}

TEST_CASE("log-space evaluation does not overflow at extreme arguments") {
  CHECK(std::isfinite(vmf_log_normalizer(10000, 1e5)));
  CHECK(std::isfinite(log_bessel_i(4999.0, 1e5)));
  const auto m = e_axis(10000, 0);
  CHECK(std::isfinite(vmf_log_density(m, VmfParams(m, 1e5))));
}

TEST_CASE("vmf log density closed form at d=3") {
  const auto m = e_axis(3, 2);
  const VmfParams params(m, 1.0);
  // log kappa - log(4 pi) - log sinh(kappa) + kappa at theta = m
  const double expected = 0.0 - std::log(4.0 * kPi) - std::log(std::sinh(1.0)) + 1.0;
  CHECK(vmf_log_density(m, params) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(-1.69246360854).epsilon(1e-9));
  CHECK_THROWS_AS(vmf_log_density(e_axis(4, 0), params), std::invalid_argument);
}

TEST_CASE("vmf density integrates to one (quadrature, d=2,3)") {
  for (double kappa : {0.5, 1.0, 10.0}) {
    {
      const auto m = e_axis(2, 0);
      const VmfParams params(m, kappa);
      auto f = [&](double phi) {
        return std::exp(vmf_log_density(Direction({std::cos(phi), std::sin(phi)}), params));
      };
      CHECK(oracles::simpson(f, 0.0, 2.0 * kPi, 20000) == doctest::Approx(1.0).epsilon(1e-8));
    }
    {
      const auto m = e_axis(3, 2);
      const VmfParams params(m, kappa);
      auto f = [&](double phi) {
        const Direction theta({std::sin(phi), 0.0, std::cos(phi)});
        return 2.0 * kPi * std::sin(phi) * std::exp(vmf_log_density(theta, params));
      };
      CHECK(oracles::simpson(f, 0.0, kPi, 20000) == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("vmf density tends to the uniform one as kappa -> 0") {
  const auto m = e_axis(3, 0);
  const VmfParams params(m, 1e-8);
  for (double phi : {0.0, 1.0, 2.5}) {
    const Direction theta({std::cos(phi), std::sin(phi), 0.0});
    CHECK(vmf_log_density(theta, params) ==
          doctest::Approx(-log_sphere_area(3)).epsilon(1e-7));
  }
}

TEST_CASE("kl closed form, limits and symmetry") {
  const double a31 = 1.0 / std::tanh(1.0) - 1.0;
  const double expected = a31 - std::log(std::sinh(1.0));  // d=3, kappa=1
  CHECK(kl_vmf_uniform(3, 1.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(kl_vmf_uniform(3, 1.0) == doctest::Approx(0.151596).epsilon(1e-5));

  CHECK(kl_vmf_uniform(3, 1e-6) <= 1e-10);
  CHECK(kl_vmf_uniform(3, 1e-6) >= -1e-12);

  // independent of the mean direction
  const VmfParams p1(e_axis(4, 0), 2.5);
  const VmfParams p2(Direction::normalized({1.0, -1.0, 0.5, 2.0}), 2.5);
  CHECK(kl_vmf_uniform(p1) == kl_vmf_uniform(p2));

  // strictly increasing in kappa
  for (std::size_t d : {2, 3, 8}) {
    double prev = -1.0;
    for (double kappa = 0.1; kappa < 500.0; kappa *= 3.0) {
      const double kl = kl_vmf_uniform(d, kappa);
      CHECK(kl > prev);
      CHECK(kl >= 0.0);
      prev = kl;
    }
  }
}

TEST_CASE("kl derivative matches central differences") {
  for (std::size_t d : {3, 7}) {
    for (double kappa : {0.5, 1.0, 5.0, 50.0}) {
      const double h = kappa * 1e-5;
      const double fd =
          (kl_vmf_uniform(d, kappa + h) - kl_vmf_uniform(d, kappa - h)) / (2.0 * h);
      CHECK(kl_vmf_uniform_dkappa(d, kappa) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("uniform sphere sampler") {
  RngStream rng(2024);
  // unit norm and determinism
  RngStream a = rng.substream(5);
  RngStream b = rng.substream(5);
  const Direction da = sample_uniform_sphere(3, a);
  const Direction db = sample_uniform_sphere(3, b);
  CHECK(da.coords() == db.coords());
  double n2 = 0.0;
  for (double c : da.coords()) n2 += c * c;
  CHECK(std::abs(std::sqrt(n2) - 1.0) <= 1e-10);
  CHECK_THROWS_AS(sample_uniform_sphere(1, rng), std::invalid_argument);

  // empirical first moment vanishes
  const std::size_t N = 100000;
  std::vector<double> mean(3, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    RngStream sub = rng.substream(i);
    const Direction theta = sample_uniform_sphere(3, sub);
    for (int k = 0; k < 3; ++k) mean[k] += theta[k];
  }
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(mean[k] / static_cast<double>(N)) <= 0.02);
  }
}

TEST_CASE("vmf sampler concentration at large kappa") {
  const auto m = Direction::normalized({1.0, 2.0, -0.5});
  const VmfParams params(m, 1e4);
  RngStream rng(77);
  std::size_t hits = 0;
  const std::size_t N = 10000;
  for (std::size_t i = 0; i < N; ++i) {
    RngStream sub = rng.substream(i);
    if (sample_vmf(params, sub).dot(m) > 0.99) ++hits;
  }
  CHECK(static_cast<double>(hits) / static_cast<double>(N) >= 0.99);
}

TEST_CASE("vmf sampler mean resultant identity") {
  // E[theta] = A_d(kappa) m, cross-checked against the ratio oracle.
  struct Case {
    std::size_t d;
    double kappa;
  };
  for (const Case c : {Case{3, 1.0}, Case{5, 2.0}}) {
    std::vector<double> mvec(c.d, 0.0);
    mvec[0] = 3.0;
    mvec[c.d - 1] = -1.5;
    const Direction m = Direction::normalized(mvec);
    const VmfParams params(m, c.kappa);
    const double a_ref =
        oracles::bessel_ratio_series(0.5 * static_cast<double>(c.d) - 1.0, c.kappa);
    RngStream rng(31 + c.d);
    const std::size_t N = 200000;
    std::vector<double> mean(c.d, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      RngStream sub = rng.substream(i);
      const Direction theta = sample_vmf(params, sub);
      for (std::size_t k = 0; k < c.d; ++k) mean[k] += theta[k];
    }
    double resultant = 0.0;
    for (std::size_t k = 0; k < c.d; ++k) {
      mean[k] /= static_cast<double>(N);
      CHECK(std::abs(mean[k] - a_ref * m[k]) <= 0.01);
      resultant += mean[k] * mean[k];
    }
    CHECK(std::sqrt(resultant) == doctest::Approx(a_ref).epsilon(0.03));
  }
}

TEST_CASE("vmf sampler degenerates to uniform as kappa -> 0") {
  const auto m = e_axis(3, 1);
  const VmfParams params(m, 1e-6);
  RngStream rng(911);
  const std::size_t N = 100000;
  std::vector<double> mean(3, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    RngStream sub = rng.substream(i);
    const Direction theta = sample_vmf(params, sub);
    for (int k = 0; k < 3; ++k) mean[k] += theta[k];
  }
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(mean[k] / static_cast<double>(N)) <= 0.02);
  }
}

TEST_CASE("vmf sampler works at d=2") {
  const auto m = Direction::normalized({0.6, -0.8});
  const VmfParams params(m, 8.0);
  RngStream rng(5);
  const std::size_t N = 50000;
  double mean_dot = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    RngStream sub = rng.substream(i);
    mean_dot += sample_vmf(params, sub).dot(m);
  }
  mean_dot /= static_cast<double>(N);
  const double a_ref = oracles::bessel_ratio_series(0.0, 8.0);
  CHECK(mean_dot == doctest::Approx(a_ref).epsilon(0.02));
}

TEST_CASE("sample_slices contract") {
  const auto e1 = e_axis(3, 0);
  const auto rho = SliceDistribution::dirac_set({e1});
  RngStream rng(1);
  const auto dirs = sample_slices(rho, 5, rng);
  CHECK(dirs.size() == 5);
  for (const auto& d : dirs) CHECK(d.coords() == e1.coords());

  // determinism for the random kinds
  const auto uni = SliceDistribution::uniform(3);
  const auto s1 = sample_slices(uni, 2, RngStream(9).substream(4));
  const auto s2 = sample_slices(uni, 2, RngStream(9).substream(4));
  CHECK(s1[0].coords() == s2[0].coords());
  CHECK(s1[1].coords() == s2[1].coords());

  // substreams are pure functions of the draw index, not of consumption order
  RngStream base(9);
  RngStream probe = base.substream(4);
  probe.next_u32();
  const auto s3 = sample_slices(uni, 2, base.substream(4));
  CHECK(s3[0].coords() == s1[0].coords());

  // vMF slices concentrate around the mean
  const auto m = Direction::normalized({1.0, 1.0, 1.0});
  const auto vmf_rho = SliceDistribution::vmf(VmfParams(m, 50.0));
  const auto vs = sample_slices(vmf_rho, 100, RngStream(123));
  double mean_dot = 0.0;
  for (const auto& theta : vs) mean_dot += theta.dot(m);
  CHECK(mean_dot / 100.0 >= 0.95);

  CHECK_THROWS_AS(sample_slices(uni, 0, rng), std::invalid_argument);
}

TEST_CASE("slice distribution validation") {
  CHECK_THROWS_AS(SliceDistribution::dirac_set({}), std::invalid_argument);
  CHECK_THROWS_AS(SliceDistribution::dirac_set({e_axis(2, 0), e_axis(3, 0)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(VmfParams(e_axis(3, 0), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(VmfParams(e_axis(3, 0), -2.0), std::invalid_argument);
  CHECK_THROWS_AS(Direction({0.5, 0.5}), std::invalid_argument);
}
