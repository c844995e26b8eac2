#include "pacsw/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "pacsw/adaptive.hpp"
#include "pacsw/bounds.hpp"
#include "pacsw/datasets.hpp"
#include "pacsw/error.hpp"
#include "pacsw/parallel.hpp"
#include "pacsw/sliced.hpp"

#ifndef PACSW_GIT_DESC
#define PACSW_GIT_DESC "unknown"
#endif

namespace pacsw {

namespace {

constexpr std::uint64_t kTagConvergence = 0x636f6e76;     // "conv"
constexpr std::uint64_t kTagDiscrimination = 0x64697363;  // "disc"
constexpr std::uint64_t kTagClassPair = 0x636c7370;       // "clsp"
constexpr std::uint64_t kTagBound = 0x626f756e;           // "boun"

std::string kind_name(ExperimentConfig::Kind kind) {
  switch (kind) {
    case ExperimentConfig::Kind::convergence: return "convergence";
    case ExperimentConfig::Kind::discrimination: return "discrimination";
    case ExperimentConfig::Kind::class_pair: return "class_pair";
    case ExperimentConfig::Kind::bound_validity: return "bound_validity";
  }
  return "unknown";
}

ExperimentConfig::Kind kind_from_name(const std::string& name) {
  if (name == "convergence") return ExperimentConfig::Kind::convergence;
  if (name == "discrimination") return ExperimentConfig::Kind::discrimination;
  if (name == "class_pair") return ExperimentConfig::Kind::class_pair;
  if (name == "bound_validity") return ExperimentConfig::Kind::bound_validity;
  throw DataError("config: unknown experiment kind '" + name + "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Stats {
  double median, p10, p90, mean;
};

Stats aggregate(std::vector<double> values) {
  Stats s{};
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  s.median = percentile(values, 0.5);
  s.p10 = percentile(values, 0.1);
  s.p90 = percentile(std::move(values), 0.9);
  return s;
}

CurvePoint make_point(const ExperimentConfig& config, std::string method,
                      std::string statistic, std::size_t n, std::size_t d, double gamma,
                      double kappa, const std::vector<double>& values) {
  const Stats s = aggregate(values);
  CurvePoint pt;
  pt.experiment = kind_name(config.kind);
  pt.family = config.family;
  pt.method = std::move(method);
  pt.statistic = std::move(statistic);
  pt.n = n;
  pt.d = d;
  pt.gamma = gamma;
  pt.kappa = kappa;
  pt.replicates = values.size();
  pt.median = s.median;
  pt.p10 = s.p10;
  pt.p90 = s.p90;
  pt.mean = s.mean;
  return pt;
}

void sort_points(std::vector<CurvePoint>& pts) {
  std::stable_sort(pts.begin(), pts.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return std::tie(a.experiment, a.family, a.method, a.statistic, a.n, a.d, a.gamma,
                    a.kappa) < std::tie(b.experiment, b.family, b.method, b.statistic,
                                        b.n, b.d, b.gamma, b.kappa);
  });
}

std::uint64_t draw_seed(const RngStream& stream, std::uint64_t slot) {
  RngStream s = stream.substream(slot);
  return s.next_u64();
}

// Train/test pairs for the synthetic families. The Gaussian family shares one
// random PSD covariance between train and test; uniform_shift translates the
// second cloud by gamma along the all-ones direction.
struct PairSet {
  PointCloud train_mu, train_nu, test_mu, test_nu;
};

PairSet make_pairs(const ExperimentConfig& config, std::size_t d, double gamma,
                   std::size_t train_n, std::size_t test_n, const RngStream& task_rng) {
  if (config.family == "gaussian") {
    SyntheticSpec spec;
    spec.kind = SyntheticSpec::Kind::gaussian;
    spec.mean_shift = gamma;
    spec.covariance = SyntheticSpec::Covariance::random_psd;
    spec.covariance_seed = draw_seed(task_rng, 0);
    spec.dim = d;
    spec.sample_size = train_n;
    spec.seed = draw_seed(task_rng, 1);
    auto train = generate(spec);
    spec.sample_size = test_n;
    spec.seed = draw_seed(task_rng, 2);
    auto test = generate(spec);
    return {std::move(train.first), std::move(train.second), std::move(test.first),
            std::move(test.second)};
  }
  if (config.family == "uniform_shift") {
    SyntheticSpec spec;
    spec.kind = SyntheticSpec::Kind::uniform_cube;
    spec.side = config.side;
    spec.dim = d;
    spec.sample_size = train_n;
    spec.seed = draw_seed(task_rng, 1);
    auto train = generate(spec);
    spec.sample_size = test_n;
    spec.seed = draw_seed(task_rng, 2);
    auto test = generate(spec);
    const std::vector<double> shift(d, gamma);
    return {std::move(train.first), translated(train.second, shift),
            std::move(test.first), translated(test.second, shift)};
  }
  throw DataError("config: family '" + config.family +
                  "' is not valid for this experiment");
}

PacSwConfig fit_config(const ExperimentConfig& config, double learning_rate,
                       std::uint64_t seed) {
  PacSwConfig c;
  c.lambda_exponent = config.lambda_exponent;
  c.num_slices = config.num_slices;
  c.iterations = config.iterations;
  c.learning_rate = learning_rate;
  c.order_p = config.p;
  c.seed = seed;
  c.baseline = PacSwConfig::Baseline::leave_one_out_mean;
  c.step_rule = config.adam ? PacSwConfig::StepRule::adam : PacSwConfig::StepRule::plain;
  c.threads = 1;
  return c;
}

struct LearnedMethod {
  SliceDistribution rho;
  std::optional<FitResult> fit;
};

LearnedMethod learn_method(const std::string& method, const ExperimentConfig& config,
                           const PointCloud& mu, const PointCloud& nu,
                           const RngStream& method_rng) {
  const std::size_t d = mu.dim();
  if (method == "sw_uniform") {
    return {SliceDistribution::uniform(d), std::nullopt};
  }
  if (method == "maxsw") {
    const auto res = maxsw_fit(mu, nu, config.p, config.iterations, config.maxsw_eta,
                               config.maxsw_restarts, method_rng.substream(0));
    return {SliceDistribution::dirac_set({res.direction}), std::nullopt};
  }
  if (method != "pacsw" && method != "dsw") {
    throw DataError("config: unknown method '" + method + "'");
  }
  // Learning rate selected by the final train objective.
  std::optional<FitResult> best;
  for (std::size_t li = 0; li < config.learning_rates.size(); ++li) {
    const auto cfg =
        fit_config(config, config.learning_rates[li], draw_seed(method_rng, 10 + li));
    FitResult fit = method == "pacsw"
                        ? pacsw_fit(mu, nu, cfg)
                        : dsw_fit(mu, nu, cfg, config.dsw_lambda_c, config.dsw_c_cap);
    if (!best || fit.trace.records.back().objective > best->trace.records.back().objective) {
      best = std::move(fit);
    }
  }
  SliceDistribution rho = SliceDistribution::vmf(best->params);
  return {std::move(rho), std::move(best)};
}

double dsw_penalty_on(const std::vector<Direction>& slices, double lambda_c, double c_cap) {
  const std::size_t pairs = slices.size() / 2;
  if (pairs == 0) return 0.0;
  double e = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    e += std::abs(slices[2 * i].dot(slices[2 * i + 1]));
  }
  e /= static_cast<double>(pairs);
  return lambda_c * std::max(0.0, e - c_cap);
}

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument("config: " + what);
}

}  // namespace

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

std::vector<CurvePoint> run_convergence(const ExperimentConfig& config) {
  require(!config.n_grid.empty(), "convergence needs a nonempty n grid");
  require(!config.d_grid.empty(), "convergence needs a nonempty d grid");
  require(!config.kappa_grid.empty(), "convergence needs a nonempty kappa grid");
  require(config.replicates >= 1, "replicates must be >= 1");
  require(config.family == "uniform" || config.family == "gaussian",
          "convergence family must be 'uniform' or 'gaussian'");

  struct Coord {
    std::size_t d, n;
    double kappa;
  };
  std::vector<Coord> coords;
  for (std::size_t d : config.d_grid)
    for (double kappa : config.kappa_grid)
      for (std::size_t n : config.n_grid) coords.push_back({d, n, kappa});

  const std::size_t R = config.replicates;
  std::vector<double> values(coords.size() * R);
  const RngStream root = RngStream(config.seed).substream(kTagConvergence);

  parallel_for(values.size(), config.threads, [&](std::size_t task) {
    const Coord& c = coords[task / R];
    const RngStream task_rng = root.substream(task);

    SyntheticSpec spec;
    spec.dim = c.d;
    spec.sample_size = c.n;
    spec.seed = draw_seed(task_rng, 0);
    if (config.family == "uniform") {
      spec.kind = SyntheticSpec::Kind::uniform_cube;
      spec.side = config.side;
    } else {
      spec.kind = SyntheticSpec::Kind::gaussian;
      spec.mean_shift = 0.0;
      spec.covariance = SyntheticSpec::Covariance::random_psd;
      spec.covariance_seed = draw_seed(task_rng, 1);
    }
    auto [mu, nu] = generate(spec);
    if (spec.kind == SyntheticSpec::Kind::gaussian) {
      // Undo the generator's 1/d covariance normalization: this benchmark
      // wants Sigma = A A^T, whose projected variance grows with d.
      const double f = std::sqrt(static_cast<double>(c.d));
      mu = scaled(mu, f);
      nu = scaled(nu, f);
    }

    RngStream mean_rng = task_rng.substream(2);
    const Direction mean = sample_uniform_sphere(c.d, mean_rng);
    const auto est = sw_estimate(mu, nu, SliceDistribution::vmf({mean, c.kappa}),
                                 config.p, config.num_slices, task_rng.substream(3));
    values[task] = est.value;
  });

  std::vector<CurvePoint> points;
  for (std::size_t ci = 0; ci < coords.size(); ++ci) {
    const std::vector<double> reps(values.begin() + ci * R, values.begin() + (ci + 1) * R);
    points.push_back(make_point(config, "sw", "sw_error", coords[ci].n, coords[ci].d, 0.0,
                                coords[ci].kappa, reps));
  }
  sort_points(points);
  return points;
}

std::vector<CurvePoint> run_discrimination(const ExperimentConfig& config) {
  require(!config.d_grid.empty(), "discrimination needs a nonempty d grid");
  require(!config.gamma_grid.empty(), "discrimination needs a nonempty gamma grid");
  require(!config.methods.empty(), "discrimination needs at least one method");
  require(config.replicates >= 1, "replicates must be >= 1");

  struct Coord {
    std::size_t d;
    double gamma;
  };
  std::vector<Coord> coords;
  for (std::size_t d : config.d_grid)
    for (double gamma : config.gamma_grid) coords.push_back({d, gamma});

  const std::size_t R = config.replicates;
  const std::size_t M = config.methods.size();
  // statistics per task and method: train_sw, test_sw, train_objective
  std::vector<double> train_sw(coords.size() * R * M);
  std::vector<double> test_sw(coords.size() * R * M);
  std::vector<double> train_obj(coords.size() * R * M);
  const RngStream root = RngStream(config.seed).substream(kTagDiscrimination);

  parallel_for(coords.size() * R, config.threads, [&](std::size_t task) {
    const Coord& c = coords[task / R];
    const RngStream task_rng = root.substream(task);
    const PairSet pairs =
        make_pairs(config, c.d, c.gamma, config.train_n, config.test_n, task_rng);

    for (std::size_t mi = 0; mi < M; ++mi) {
      const std::string& method = config.methods[mi];
      const RngStream method_rng = task_rng.substream(100 + mi);
      const LearnedMethod learned =
          learn_method(method, config, pairs.train_mu, pairs.train_nu, method_rng);

      const auto slices =
          sample_slices(learned.rho, config.eval_slices, method_rng.substream(1));
      const double tr =
          sw_estimate_with_slices(pairs.train_mu, pairs.train_nu, slices, config.p).value;
      const double te =
          sw_estimate_with_slices(pairs.test_mu, pairs.test_nu, slices, config.p).value;

      double objective = tr;
      if (method == "pacsw") {
        objective = tr - kl_vmf_uniform(learned.fit->params) / learned.fit->lambda;
      } else if (method == "dsw") {
        objective = tr - dsw_penalty_on(slices, config.dsw_lambda_c, config.dsw_c_cap);
      }
      const std::size_t slot = task * M + mi;
      train_sw[slot] = tr;
      test_sw[slot] = te;
      train_obj[slot] = objective;
    }
  });

  std::vector<CurvePoint> points;
  for (std::size_t ci = 0; ci < coords.size(); ++ci) {
    for (std::size_t mi = 0; mi < M; ++mi) {
      std::vector<double> tr(R), te(R), ob(R);
      for (std::size_t r = 0; r < R; ++r) {
        const std::size_t slot = (ci * R + r) * M + mi;
        tr[r] = train_sw[slot];
        te[r] = test_sw[slot];
        ob[r] = train_obj[slot];
      }
      const auto& c = coords[ci];
      points.push_back(make_point(config, config.methods[mi], "train_sw", config.train_n,
                                  c.d, c.gamma, 0.0, tr));
      points.push_back(make_point(config, config.methods[mi], "test_sw", config.test_n,
                                  c.d, c.gamma, 0.0, te));
      points.push_back(make_point(config, config.methods[mi], "train_objective",
                                  config.train_n, c.d, c.gamma, 0.0, ob));
    }
  }
  sort_points(points);
  return points;
}

std::vector<CurvePoint> run_bound_validity(const ExperimentConfig& config) {
  require(!config.d_grid.empty(), "bound_validity needs a nonempty d grid");
  require(!config.gamma_grid.empty(), "bound_validity needs a nonempty gamma grid");
  require(config.replicates >= 1, "replicates must be >= 1");
  require(config.family == "uniform_shift", "bound_validity runs on family 'uniform_shift'");

  struct Coord {
    std::size_t d;
    double gamma;
  };
  std::vector<Coord> coords;
  for (std::size_t d : config.d_grid)
    for (double gamma : config.gamma_grid) coords.push_back({d, gamma});

  const std::size_t R = config.replicates;
  std::vector<double> lower(coords.size() * R);
  std::vector<double> reference(coords.size() * R);
  std::vector<double> valid(coords.size() * R);
  const RngStream root = RngStream(config.seed).substream(kTagBound);

  parallel_for(coords.size() * R, config.threads, [&](std::size_t task) {
    const Coord& c = coords[task / R];
    const RngStream task_rng = root.substream(task);
    const PairSet pairs =
        make_pairs(config, c.d, c.gamma, config.train_n, config.test_n, task_rng);

    const RngStream method_rng = task_rng.substream(100);
    const LearnedMethod learned =
        learn_method("pacsw", config, pairs.train_mu, pairs.train_nu, method_rng);
    const auto slices =
        sample_slices(learned.rho, config.eval_slices, method_rng.substream(1));
    const double sw_hat =
        sw_estimate_with_slices(pairs.train_mu, pairs.train_nu, slices, config.p).value;
    const double kl = kl_vmf_uniform(learned.fit->params);

    const double diameter =
        (config.side + c.gamma) * std::sqrt(static_cast<double>(c.d));
    const BoundReport report = assemble_bound(
        sw_hat, kl, BoundedRegime{diameter}, config.p, learned.fit->lambda,
        config.train_n, config.delta, BoundConstants{config.psi_constant, 0.0});

    // Population reference: the shifted-cube pair differs by a pure
    // translation, so the per-slice distance is |gamma <theta, 1>|^p exactly;
    // only the slice average is Monte-Carlo.
    const auto ref_slices =
        sample_slices(learned.rho, config.reference_slices, task_rng.substream(7));
    const std::vector<double> ones(c.d, 1.0);
    double ref = 0.0;
    for (const auto& theta : ref_slices) {
      const double shift = std::abs(c.gamma * theta.dot(ones));
      ref += config.p == 1.0 ? shift
                             : (config.p == 2.0 ? shift * shift : std::pow(shift, config.p));
    }
    ref /= static_cast<double>(ref_slices.size());

    lower[task] = report.lower_bound;
    reference[task] = ref;
    valid[task] = report.lower_bound <= ref ? 1.0 : 0.0;
  });

  std::vector<CurvePoint> points;
  for (std::size_t ci = 0; ci < coords.size(); ++ci) {
    std::vector<double> lo(R), re(R), va(R);
    for (std::size_t r = 0; r < R; ++r) {
      lo[r] = lower[ci * R + r];
      re[r] = reference[ci * R + r];
      va[r] = valid[ci * R + r];
    }
    const auto& c = coords[ci];
    points.push_back(make_point(config, "pacsw", "lower_bound", config.train_n, c.d,
                                c.gamma, 0.0, lo));
    points.push_back(make_point(config, "pacsw", "reference_sw", config.train_n, c.d,
                                c.gamma, 0.0, re));
    points.push_back(
        make_point(config, "pacsw", "bound_valid", config.train_n, c.d, c.gamma, 0.0, va));
  }
  sort_points(points);
  return points;
}

std::vector<CurvePoint> run_class_pair(const ExperimentConfig& config) {
  require(!config.n_grid.empty(), "class_pair needs a nonempty n grid");
  require(!config.methods.empty(), "class_pair needs at least one method");
  require(config.classes.size() == 2, "class_pair needs exactly two classes");
  require(config.replicates >= 1, "replicates must be >= 1");
  if (config.idx_images.empty() || config.idx_labels.empty()) {
    throw DataError(
        "class_pair: supply idx_images and idx_labels paths in the config (IDX ubyte "
        "files are not downloaded automatically)");
  }

  const std::set<int> wanted(config.classes.begin(), config.classes.end());
  const auto by_class = load_idx_images(config.idx_images, config.idx_labels, wanted);
  const PointCloud& cloud_a = by_class.at(config.classes[0]);
  const PointCloud& cloud_b = by_class.at(config.classes[1]);

  auto subsample = [](const PointCloud& cloud, std::size_t train_n, std::size_t test_n,
                      RngStream rng) {
    const std::size_t total = cloud.size();
    if (train_n > total) {
      throw DataError("class_pair: requested n=" + std::to_string(train_n) +
                      " exceeds the " + std::to_string(total) + " available samples");
    }
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i + 1 < total; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(
                                    rng.uniform() * static_cast<double>(total - i));
      std::swap(idx[i], idx[std::min(j, total - 1)]);
    }
    const std::size_t held = std::min(test_n, total - train_n);
    if (held == 0) {
      throw DataError("class_pair: no held-out samples left after drawing n=" +
                      std::to_string(train_n));
    }
    const std::size_t d = cloud.dim();
    auto take = [&](std::size_t from, std::size_t count) {
      std::vector<double> pts(count * d);
      for (std::size_t i = 0; i < count; ++i) {
        const auto row = cloud.point(idx[from + i]);
        std::copy(row.begin(), row.end(), pts.begin() + i * d);
      }
      return PointCloud(std::move(pts), d);
    };
    return std::pair<PointCloud, PointCloud>(take(0, train_n), take(train_n, held));
  };

  const std::size_t R = config.replicates;
  const std::size_t M = config.methods.size();
  std::vector<double> train_sw(config.n_grid.size() * R * M);
  std::vector<double> test_sw(config.n_grid.size() * R * M);
  const RngStream root = RngStream(config.seed).substream(kTagClassPair);

  parallel_for(config.n_grid.size() * R, config.threads, [&](std::size_t task) {
    const std::size_t n = config.n_grid[task / R];
    const RngStream task_rng = root.substream(task);
    auto [train_a, test_a] = subsample(cloud_a, n, config.test_n, task_rng.substream(0));
    auto [train_b, test_b] = subsample(cloud_b, n, config.test_n, task_rng.substream(1));

    for (std::size_t mi = 0; mi < M; ++mi) {
      const RngStream method_rng = task_rng.substream(100 + mi);
      const LearnedMethod learned =
          learn_method(config.methods[mi], config, train_a, train_b, method_rng);
      const auto slices =
          sample_slices(learned.rho, config.eval_slices, method_rng.substream(1));
      const std::size_t slot = task * M + mi;
      train_sw[slot] = sw_estimate_with_slices(train_a, train_b, slices, config.p).value;
      test_sw[slot] = sw_estimate_with_slices(test_a, test_b, slices, config.p).value;
    }
  });

  std::vector<CurvePoint> points;
  for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
    for (std::size_t mi = 0; mi < M; ++mi) {
      std::vector<double> tr(R), te(R);
      for (std::size_t r = 0; r < R; ++r) {
        const std::size_t slot = (ni * R + r) * M + mi;
        tr[r] = train_sw[slot];
        te[r] = test_sw[slot];
      }
      points.push_back(make_point(config, config.methods[mi], "train_sw",
                                  config.n_grid[ni], cloud_a.dim(), 0.0, 0.0, tr));
      points.push_back(make_point(config, config.methods[mi], "test_sw",
                                  config.n_grid[ni], cloud_a.dim(), 0.0, 0.0, te));
    }
  }
  sort_points(points);
  return points;
}

std::vector<CurvePoint> run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentConfig::Kind::convergence: return run_convergence(config);
    case ExperimentConfig::Kind::discrimination: return run_discrimination(config);
    case ExperimentConfig::Kind::class_pair: return run_class_pair(config);
    case ExperimentConfig::Kind::bound_validity: return run_bound_validity(config);
  }
  throw std::logic_error("run_experiment: unreachable");
}

std::string curves_to_csv(const std::vector<CurvePoint>& points) {
  std::string out =
      "experiment,family,method,statistic,n,d,gamma,kappa,replicates,median,p10,p90,mean\n";
  for (const auto& p : points) {
    out += p.experiment + ',' + p.family + ',' + p.method + ',' + p.statistic + ',';
    out += std::to_string(p.n) + ',' + std::to_string(p.d) + ',';
    out += format_double(p.gamma) + ',' + format_double(p.kappa) + ',';
    out += std::to_string(p.replicates) + ',';
    out += format_double(p.median) + ',' + format_double(p.p10) + ',';
    out += format_double(p.p90) + ',' + format_double(p.mean) + '\n';
  }
  return out;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.kind = kind_from_name(j.at("experiment").get<std::string>());
  auto opt = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  opt("family", c.family);
  opt("side", c.side);
  opt("n_grid", c.n_grid);
  opt("d_grid", c.d_grid);
  opt("gamma_grid", c.gamma_grid);
  opt("kappa_grid", c.kappa_grid);
  opt("methods", c.methods);
  opt("replicates", c.replicates);
  opt("seed", c.seed);
  opt("p", c.p);
  opt("num_slices", c.num_slices);
  opt("train_n", c.train_n);
  opt("test_n", c.test_n);
  opt("eval_slices", c.eval_slices);
  opt("iterations", c.iterations);
  opt("learning_rates", c.learning_rates);
  opt("lambda_exponent", c.lambda_exponent);
  opt("adam", c.adam);
  opt("dsw_lambda_c", c.dsw_lambda_c);
  opt("dsw_c_cap", c.dsw_c_cap);
  opt("maxsw_restarts", c.maxsw_restarts);
  opt("maxsw_eta", c.maxsw_eta);
  opt("delta", c.delta);
  opt("psi_constant", c.psi_constant);
  opt("reference_slices", c.reference_slices);
  opt("idx_images", c.idx_images);
  opt("idx_labels", c.idx_labels);
  opt("classes", c.classes);
  opt("output_csv", c.output_csv);
  opt("output_manifest", c.output_manifest);
  opt("threads", c.threads);
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open config file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
  try {
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": invalid config: " + e.what());
  }
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = kind_name(kind);
  j["family"] = family;
  j["side"] = side;
  j["n_grid"] = n_grid;
  j["d_grid"] = d_grid;
  j["gamma_grid"] = gamma_grid;
  j["kappa_grid"] = kappa_grid;
  j["methods"] = methods;
  j["replicates"] = replicates;
  j["seed"] = seed;
  j["p"] = p;
  j["num_slices"] = num_slices;
  j["train_n"] = train_n;
  j["test_n"] = test_n;
  j["eval_slices"] = eval_slices;
  j["iterations"] = iterations;
  j["learning_rates"] = learning_rates;
  j["lambda_exponent"] = lambda_exponent;
  j["adam"] = adam;
  j["dsw_lambda_c"] = dsw_lambda_c;
  j["dsw_c_cap"] = dsw_c_cap;
  j["maxsw_restarts"] = maxsw_restarts;
  j["maxsw_eta"] = maxsw_eta;
  j["delta"] = delta;
  j["psi_constant"] = psi_constant;
  j["reference_slices"] = reference_slices;
  j["idx_images"] = idx_images;
  j["idx_labels"] = idx_labels;
  j["classes"] = classes;
  j["output_csv"] = output_csv;
  j["output_manifest"] = output_manifest;
  // The worker count is an execution knob, never an output-affecting one; it
  // is deliberately left out so outputs stay byte-identical across it.
  return j;
}

nlohmann::ordered_json manifest_for(const ExperimentConfig& config) {
  nlohmann::ordered_json m;
  m["version"] = version_string();
  m["experiment"] = kind_name(config.kind);
  m["seed"] = config.seed;
  m["config"] = config.to_json();
  return m;
}

void write_outputs(const ExperimentConfig& config, const std::vector<CurvePoint>& points) {
  if (config.output_csv.empty()) {
    throw std::invalid_argument("write_outputs: output_csv path is empty");
  }
  {
    std::ofstream out(config.output_csv, std::ios::binary);
    if (!out) throw DataError(config.output_csv + ": cannot open for writing");
    out << curves_to_csv(points);
  }
  const std::string manifest_path = config.output_manifest.empty()
                                        ? config.output_csv + ".manifest.json"
                                        : config.output_manifest;
  std::ofstream out(manifest_path, std::ios::binary);
  if (!out) throw DataError(manifest_path + ": cannot open for writing");
  out << manifest_for(config).dump(2) << '\n';
}

std::string version_string() { return std::string("pacsw 0.1.0 (") + PACSW_GIT_DESC + ")"; }

}  // namespace pacsw
