#include <doctest.h>

#include <cmath>
#include <vector>

#include "pacsw/bounds.hpp"
#include "pacsw/rng.hpp"
#include "pacsw/sliced.hpp"
#include "pacsw/datasets.hpp"

using namespace pacsw;

TEST_CASE("phi closed forms") {
  CHECK(phi_value(BoundedRegime{2.0}, 1.0, 1.0, 10) == 2.0);
  CHECK(phi_value(BoundedRegime{1.0}, 2.0, 1.0, 10) == 0.5);
  CHECK(phi_value(SubGaussianRegime{1.0, 3.0}, 1.0, 1.0, 10) == 4.0);
  CHECK(phi_value(BernsteinRegime{1.0, 1.0, 0.5, 0.25}, 1.0, 1.0, 4) == 1.0);

  CHECK_THROWS_AS(phi_value(SubGaussianRegime{1.0, 1.0}, 2.0, 1.0, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(phi_value(BernsteinRegime{1.0, 1.0, 1.0, 1.0}, 1.0, 2.0, 4),
                  std::invalid_argument);  // lambda >= n/(2 b*)
  CHECK_THROWS_AS(phi_value(BoundedRegime{0.0}, 1.0, 1.0, 10), std::invalid_argument);
}

TEST_CASE("psi closed forms") {
  CHECK(psi_value(BoundedRegime{1.0}, 1.0, 100, {}) == doctest::Approx(0.1).epsilon(1e-15));
  const double v = psi_value(SubGaussianRegime{1.0, 0.5}, 1.0, 1000, {});
  CHECK(v == doctest::Approx(4.0 * std::sqrt(std::log(1000.0) / 1000.0)).epsilon(1e-12));

  // Bounded: quadrupling n exactly halves psi
  const double r_bounded = psi_value(BoundedRegime{1.0}, 1.0, 100, {}) /
                           psi_value(BoundedRegime{1.0}, 1.0, 400, {});
  CHECK(r_bounded == doctest::Approx(2.0).epsilon(1e-12));
  // log-factor regimes approach the factor 2 rate for large n
  const double r_subg = psi_value(SubGaussianRegime{1.0, 1.0}, 1.0, 1000000, {}) /
                        psi_value(SubGaussianRegime{1.0, 1.0}, 1.0, 4000000, {});
  CHECK(r_subg >= 1.9);
  const double r_bern = psi_value(BernsteinRegime{1.0, 1.0, 1.0, 1.0}, 1.0, 1000000, {}) /
                        psi_value(BernsteinRegime{1.0, 1.0, 1.0, 1.0}, 1.0, 4000000, {});
  CHECK(r_bern >= 1.9);

  CHECK_THROWS_AS(psi_value(BoundedRegime{1.0}, 1.0, 1, {}), std::invalid_argument);
  // q must exceed 2p
  CHECK_THROWS_AS(psi_value(BernsteinRegime{1.0, 1.0, 1.0, 1.0}, 1.0, 100, {1.0, 2.0}),
                  std::invalid_argument);
}

TEST_CASE("assemble_bound hand example") {
  const auto report =
      assemble_bound(1.0, 0.0, BoundedRegime{1.0}, 1.0, 10.0, 100, 1.0, {1.0, 0.0});
  CHECK(report.phi_term == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(report.kl_term == 0.0);
  CHECK(report.psi_term == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(report.lower_bound == doctest::Approx(0.85).epsilon(1e-15));
  // decomposition identity
  CHECK(report.lower_bound + report.phi_term + report.kl_term + report.psi_term ==
        doctest::Approx(report.sw_hat).epsilon(1e-12));
}

TEST_CASE("lambda sweep has an interior maximizer") {
  std::vector<double> lambdas;
  std::vector<double> bounds;
  for (double l = 0.5; l <= 4000.0; l *= 1.3) {
    lambdas.push_back(l);
    bounds.push_back(
        assemble_bound(1.0, 2.0, BoundedRegime{1.0}, 1.0, l, 400, 0.05, {}).lower_bound);
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (bounds[i] > bounds[best]) best = i;
  }
  CHECK(best > 0);
  CHECK(best + 1 < bounds.size());
  // closed-form maximizer beats (or ties) every grid point
  const double star = best_lambda(2.0, BoundedRegime{1.0}, 1.0, 400, 0.05, {});
  const double at_star =
      assemble_bound(1.0, 2.0, BoundedRegime{1.0}, 1.0, star, 400, 0.05, {}).lower_bound;
  for (double b : bounds) CHECK(at_star >= b - 1e-12);
}

TEST_CASE("bound monotonicity") {
  const auto base = assemble_bound(1.0, 1.0, BoundedRegime{1.0}, 1.0, 10.0, 100, 0.05, {});
  const auto more_kl =
      assemble_bound(1.0, 2.0, BoundedRegime{1.0}, 1.0, 10.0, 100, 0.05, {});
  CHECK(more_kl.lower_bound < base.lower_bound);
  const auto smaller_delta =
      assemble_bound(1.0, 1.0, BoundedRegime{1.0}, 1.0, 10.0, 100, 0.01, {});
  CHECK(smaller_delta.lower_bound < base.lower_bound);
  const auto more_n = assemble_bound(1.0, 1.0, BoundedRegime{1.0}, 1.0, 10.0, 400, 0.05, {});
  CHECK(more_n.lower_bound > base.lower_bound);
  // kl -> infinity drives the bound to -infinity
  const auto degenerate =
      assemble_bound(1.0, 1e12, BoundedRegime{1.0}, 1.0, 10.0, 100, 0.05, {});
  CHECK(degenerate.lower_bound < -1e9);
}

TEST_CASE("best_lambda arithmetic") {
  // phi = 1 needs Delta^2/2 = 1, i.e. Delta = sqrt(2)
  const double lam = best_lambda(1.0, BoundedRegime{std::sqrt(2.0)}, 1.0, 100, 1.0, {});
  CHECK(lam == doctest::Approx(10.0).epsilon(1e-12));
  const double lam2 = best_lambda(2.0, BoundedRegime{std::sqrt(2.0)}, 1.0, 100, 1.0, {});
  CHECK(lam2 == doctest::Approx(10.0 * std::sqrt(2.0)).epsilon(1e-12));
  // zero budget falls back to sqrt(n)
  CHECK(best_lambda(0.0, BoundedRegime{1.0}, 1.0, 64, 1.0, {}) == doctest::Approx(8.0));
  // Bernstein stays inside the admissible interval and beats a grid
  const BernsteinRegime bern{1.0, 2.0, 1.5, 0.5};
  const double lb = best_lambda(1.0, bern, 1.0, 100, 0.05, {});
  CHECK(lb > 0.0);
  CHECK(lb < 100.0 / (2.0 * 2.0));
  auto value = [&](double l) {
    return assemble_bound(0.0, 1.0, bern, 1.0, l, 100, 0.05, {}).lower_bound;
  };
  for (double l = 0.5; l < 24.9; l += 0.5) CHECK(value(lb) >= value(l) - 1e-9);
}

TEST_CASE("report serialization uses the exact field names") {
  const auto report =
      assemble_bound(1.5, 0.3, BernsteinRegime{1.0, 1.0, 1.0, 1.0}, 1.0, 3.0, 100, 0.05,
                     {2.0, 4.0});
  const auto j = report.to_json();
  for (const char* key : {"sw_hat", "kl", "lambda", "delta", "phi_term", "psi_term",
                          "kl_term", "lower_bound", "constants_used"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["sw_hat"] == 1.5);
  CHECK(j["constants_used"]["psi_constant"] == 2.0);
  CHECK(j["constants_used"]["bernstein_q"] == 4.0);
  // defaulted q is echoed
  const auto def =
      assemble_bound(1.5, 0.3, BernsteinRegime{1.0, 1.0, 1.0, 1.0}, 1.0, 3.0, 100, 0.05, {});
  CHECK(def.to_json()["constants_used"]["bernstein_q"] == 4.0);
}

TEST_CASE("validation of inputs") {
  CHECK_THROWS_AS(assemble_bound(1.0, -0.1, BoundedRegime{1.0}, 1.0, 1.0, 100, 0.05, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(assemble_bound(1.0, 0.0, BoundedRegime{1.0}, 1.0, 0.0, 100, 0.05, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(assemble_bound(1.0, 0.0, BoundedRegime{1.0}, 1.0, 1.0, 100, 1.5, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(assemble_bound(1.0, 0.0, BoundedRegime{1.0}, 1.0, 1.0, 100, 0.0, {}),
                  std::invalid_argument);
}

TEST_CASE("desk-scale validity study on a bounded shifted pair") {
  // Fixed rho; fresh sample pairs per run. The lower bound must sit below a
  // population reference in all but ~delta of the runs (here: with huge slack).
  const std::size_t d = 3;
  const double side = 2.0;
  const double gamma = 1.0;
  const double delta = 0.05;
  const std::size_t n = 200;
  const VmfParams rho_params(Direction::normalized({1.0, 1.0, 1.0}), 3.0);
  const auto rho = SliceDistribution::vmf(rho_params);
  const double kl = kl_vmf_uniform(rho_params);
  const double diameter = (side + gamma) * std::sqrt(static_cast<double>(d));

  // population reference: pure translation, so per-slice W_1 = gamma |<theta, 1>|
  const auto ref_slices = sample_slices(rho, 100000, RngStream(4242));
  const std::vector<double> ones(d, 1.0);
  double reference = 0.0;
  for (const auto& theta : ref_slices) reference += std::abs(gamma * theta.dot(ones));
  reference /= static_cast<double>(ref_slices.size());

  std::size_t violations = 0;
  const std::size_t runs = 200;
  for (std::size_t r = 0; r < runs; ++r) {
    SyntheticSpec spec;
    spec.kind = SyntheticSpec::Kind::uniform_cube;
    spec.side = side;
    spec.dim = d;
    spec.sample_size = n;
    spec.seed = 9000 + r;
    auto [mu, nu_raw] = generate(spec);
    const auto nu = translated(nu_raw, ones);  // shift by gamma = 1 along each axis
    const double sw_hat =
        sw_estimate(mu, nu, rho, 1.0, 128, RngStream(77).substream(r)).value;
    const auto report = assemble_bound(sw_hat, kl, BoundedRegime{diameter}, 1.0,
                                       std::sqrt(static_cast<double>(n)), n, delta, {});
    if (report.lower_bound > reference) ++violations;
  }
  CHECK(static_cast<double>(violations) / static_cast<double>(runs) <= delta + 0.05);
}

TEST_CASE("plug-in regime estimators") {
  // diameter of a known square
  PointCloud square({0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0}, 2);
  CHECK(estimate_diameter(square) == doctest::Approx(std::sqrt(2.0)));
  // projected variance of an elongated cloud is close to its top eigenvalue
  RngStream rng(55);
  std::vector<double> pts(2000);
  for (std::size_t i = 0; i < 1000; ++i) {
    pts[2 * i] = 3.0 * rng.gaussian();
    pts[2 * i + 1] = 0.1 * rng.gaussian();
  }
  PointCloud elongated(std::move(pts), 2);
  const double proxy = estimate_variance_proxy(elongated, 256, 1);
  CHECK(proxy == doctest::Approx(9.0).epsilon(0.25));
}
