// Command-line front end: one-shot distance estimates, slice-distribution
// fits, bound assembly, and config-driven experiment runs. Exit codes:
// 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pacsw/adaptive.hpp"
#include "pacsw/bounds.hpp"
#include "pacsw/datasets.hpp"
#include "pacsw/error.hpp"
#include "pacsw/harness.hpp"
#include "pacsw/sliced.hpp"

using nlohmann::ordered_json;
using namespace pacsw;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::string output = "json";  // json | csv
  std::string out_path;         // empty: stdout
};

ordered_json base_manifest(const std::string& command, const GlobalOptions& global) {
  ordered_json m;
  m["version"] = version_string();
  m["command"] = command;
  m["seed"] = global.seed;
  m["output"] = global.output;
  return m;
}

void emit(const GlobalOptions& global, const ordered_json& manifest,
          const ordered_json& result, const std::string& csv_body) {
  std::string payload;
  if (global.output == "json") {
    ordered_json doc = result;
    doc["manifest"] = manifest;
    payload = doc.dump(2) + "\n";
  } else {
    payload = csv_body;
    if (global.out_path.empty()) payload += "# manifest: " + manifest.dump() + "\n";
  }
  if (global.out_path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream out(global.out_path, std::ios::binary);
  if (!out) throw DataError(global.out_path + ": cannot open for writing");
  out << payload;
  std::ofstream mout(global.out_path + ".manifest.json", std::ios::binary);
  if (!mout) throw DataError(global.out_path + ".manifest.json: cannot open for writing");
  mout << manifest.dump(2) << "\n";
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Direction parse_direction(const std::vector<double>& coords) {
  if (coords.size() < 2) throw CLI::ValidationError("direction needs at least 2 coordinates");
  return Direction::normalized(coords);
}

// Options shared by the fit-style subcommands.
struct FitCliOptions {
  std::string mu_path, nu_path;
  double p = 2.0;
  std::size_t slices = 200;
  std::size_t iterations = 200;
  double learning_rate = 0.1;
  double lambda_exponent = 0.5;
  double lambda_override = 0.0;  // 0: use n^alpha
  bool adam = false;
  std::string baseline = "loo";
  std::string trace_out;
};

void add_fit_options(CLI::App* cmd, FitCliOptions& opt) {
  cmd->add_option("--mu", opt.mu_path, "CSV with one point per row")->required();
  cmd->add_option("--nu", opt.nu_path, "CSV with one point per row")->required();
  cmd->add_option("--p", opt.p, "transport order (>= 1)");
  cmd->add_option("--slices", opt.slices, "Monte-Carlo slices per iteration");
  cmd->add_option("--iterations", opt.iterations, "ascent iterations");
  cmd->add_option("--learning-rate", opt.learning_rate, "step size");
  cmd->add_option("--lambda-exponent", opt.lambda_exponent,
                  "lambda = n^alpha when --lambda is not given");
  cmd->add_option("--lambda", opt.lambda_override, "fixed lambda (> 0)");
  cmd->add_flag("--adam", opt.adam, "adaptive-moment steps instead of plain ascent");
  cmd->add_option("--baseline", opt.baseline, "score baseline: loo | none")
      ->check(CLI::IsMember({"loo", "none"}));
  cmd->add_option("--trace-out", opt.trace_out, "write the per-iteration trace CSV here");
}

PacSwConfig to_config(const FitCliOptions& opt, const GlobalOptions& global) {
  PacSwConfig c;
  c.lambda_exponent = opt.lambda_exponent;
  if (opt.lambda_override > 0.0) c.lambda_override = opt.lambda_override;
  c.num_slices = opt.slices;
  c.iterations = opt.iterations;
  c.learning_rate = opt.learning_rate;
  c.order_p = opt.p;
  c.seed = global.seed;
  c.baseline = opt.baseline == "none" ? PacSwConfig::Baseline::none
                                      : PacSwConfig::Baseline::leave_one_out_mean;
  c.step_rule = opt.adam ? PacSwConfig::StepRule::adam : PacSwConfig::StepRule::plain;
  c.threads = global.threads;
  return c;
}

ordered_json fit_manifest(const std::string& command, const GlobalOptions& global,
                          const FitCliOptions& opt) {
  ordered_json m = base_manifest(command, global);
  m["mu"] = opt.mu_path;
  m["nu"] = opt.nu_path;
  m["p"] = opt.p;
  m["slices"] = opt.slices;
  m["iterations"] = opt.iterations;
  m["learning_rate"] = opt.learning_rate;
  m["lambda_exponent"] = opt.lambda_exponent;
  if (opt.lambda_override > 0.0) m["lambda"] = opt.lambda_override;
  m["adam"] = opt.adam;
  m["baseline"] = opt.baseline;
  return m;
}

void write_trace(const std::string& path, const OptTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << "iteration,objective,sw,kl,penalty,kappa,mean_dot_init\n";
  for (std::size_t t = 0; t < trace.records.size(); ++t) {
    const auto& r = trace.records[t];
    out << t << ',' << fmt(r.objective) << ',' << fmt(r.sw) << ',' << fmt(r.kl) << ','
        << fmt(r.penalty) << ',' << fmt(r.kappa) << ',' << fmt(r.mean_dot_init) << '\n';
  }
}

ordered_json fit_result_json(const FitResult& fit) {
  ordered_json j;
  j["kappa"] = fit.params.kappa;
  j["mean"] = fit.params.mean.coords();
  j["lambda"] = fit.lambda;
  const auto& last = fit.trace.records.back();
  j["final_objective"] = last.objective;
  j["final_sw"] = last.sw;
  j["final_kl"] = last.kl;
  j["final_penalty"] = last.penalty;
  j["iterations"] = fit.trace.records.size();
  return j;
}

std::string fit_result_csv(const FitResult& fit) {
  std::string csv = "kappa,lambda,final_objective,final_sw,final_kl,final_penalty\n";
  const auto& last = fit.trace.records.back();
  csv += fmt(fit.params.kappa) + ',' + fmt(fit.lambda) + ',' + fmt(last.objective) + ',' +
         fmt(last.sw) + ',' + fmt(last.kl) + ',' + fmt(last.penalty) + '\n';
  return csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive sliced-Wasserstein distances with generalization bounds"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "root RNG seed")->capture_default_str();
  app.add_option("--threads", global.threads, "worker threads (0 = hardware)");
  app.add_option("--output", global.output, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", global.out_path, "write results to this file instead of stdout");

  // ---- sw ----------------------------------------------------------------
  auto* sw_cmd = app.add_subcommand("sw", "one-shot SW_p^p estimate between two CSV clouds");
  sw_cmd->fallthrough();
  struct {
    std::string mu_path, nu_path;
    double p = 2.0;
    std::size_t slices = 1000;
    std::string rho = "uniform";
    std::vector<double> vmf_mean;
    double vmf_kappa = 1.0;
    std::string dirac_file;
  } sw_opt;
  sw_cmd->add_option("--mu", sw_opt.mu_path)->required();
  sw_cmd->add_option("--nu", sw_opt.nu_path)->required();
  sw_cmd->add_option("--p", sw_opt.p, "transport order");
  sw_cmd->add_option("--slices", sw_opt.slices, "Monte-Carlo slices");
  sw_cmd->add_option("--rho", sw_opt.rho, "slice distribution")
      ->check(CLI::IsMember({"uniform", "vmf", "dirac"}));
  sw_cmd->add_option("--vmf-mean", sw_opt.vmf_mean,
                     "vMF mean direction (comma-separated coordinates)")
      ->delimiter(',');
  sw_cmd->add_option("--vmf-kappa", sw_opt.vmf_kappa, "vMF concentration");
  sw_cmd->add_option("--dirac-file", sw_opt.dirac_file,
                     "CSV of fixed directions (one per row)");
  sw_cmd->callback([&]() {
    const PointCloud mu = load_csv(sw_opt.mu_path);
    const PointCloud nu = load_csv(sw_opt.nu_path);
    std::optional<SliceDistribution> rho;
    if (sw_opt.rho == "uniform") {
      rho = SliceDistribution::uniform(mu.dim());
    } else if (sw_opt.rho == "vmf") {
      rho = SliceDistribution::vmf(
          VmfParams(parse_direction(sw_opt.vmf_mean), sw_opt.vmf_kappa));
    } else {
      if (sw_opt.dirac_file.empty()) {
        throw CLI::ValidationError("--rho dirac requires --dirac-file");
      }
      const PointCloud dirs = load_csv(sw_opt.dirac_file);
      std::vector<Direction> atoms;
      for (std::size_t i = 0; i < dirs.size(); ++i) {
        const auto row = dirs.point(i);
        atoms.push_back(Direction::normalized({row.begin(), row.end()}));
      }
      rho = SliceDistribution::dirac_set(std::move(atoms));
    }
    SwOptions options;
    options.threads = global.threads;
    const SwEstimate est =
        sw_estimate(mu, nu, *rho, sw_opt.p, sw_opt.slices, RngStream(global.seed), options);

    ordered_json manifest = base_manifest("sw", global);
    manifest["mu"] = sw_opt.mu_path;
    manifest["nu"] = sw_opt.nu_path;
    manifest["p"] = sw_opt.p;
    manifest["slices"] = sw_opt.slices;
    manifest["rho"] = sw_opt.rho;
    if (sw_opt.rho == "vmf") {
      manifest["vmf_kappa"] = sw_opt.vmf_kappa;
      manifest["vmf_mean"] = sw_opt.vmf_mean;
    }
    if (!sw_opt.dirac_file.empty()) manifest["dirac_file"] = sw_opt.dirac_file;

    ordered_json result;
    result["value"] = est.value;
    result["std_error"] = est.std_error;
    result["p"] = est.order_p;
    result["num_slices"] = est.num_slices;
    const std::string csv = "value,std_error,p,num_slices\n" + fmt(est.value) + ',' +
                            fmt(est.std_error) + ',' + fmt(est.order_p) + ',' +
                            std::to_string(est.num_slices) + '\n';
    emit(global, manifest, result, csv);
  });

  // ---- maxsw -------------------------------------------------------------
  auto* maxsw_cmd = app.add_subcommand("maxsw", "max-SW direction by projected ascent");
  maxsw_cmd->fallthrough();
  struct {
    std::string mu_path, nu_path;
    double p = 2.0;
    std::size_t iterations = 300;
    double eta = 0.2;
    std::size_t restarts = 5;
  } mx_opt;
  maxsw_cmd->add_option("--mu", mx_opt.mu_path)->required();
  maxsw_cmd->add_option("--nu", mx_opt.nu_path)->required();
  maxsw_cmd->add_option("--p", mx_opt.p, "transport order");
  maxsw_cmd->add_option("--iterations", mx_opt.iterations);
  maxsw_cmd->add_option("--eta", mx_opt.eta, "initial step size");
  maxsw_cmd->add_option("--restarts", mx_opt.restarts);
  maxsw_cmd->callback([&]() {
    const PointCloud mu = load_csv(mx_opt.mu_path);
    const PointCloud nu = load_csv(mx_opt.nu_path);
    const auto res = maxsw_fit(mu, nu, mx_opt.p, mx_opt.iterations, mx_opt.eta,
                               mx_opt.restarts, RngStream(global.seed));
    ordered_json manifest = base_manifest("maxsw", global);
    manifest["mu"] = mx_opt.mu_path;
    manifest["nu"] = mx_opt.nu_path;
    manifest["p"] = mx_opt.p;
    manifest["iterations"] = mx_opt.iterations;
    manifest["eta"] = mx_opt.eta;
    manifest["restarts"] = mx_opt.restarts;
    ordered_json result;
    result["value"] = res.value;
    result["direction"] = res.direction.coords();
    std::string csv = "value\n" + fmt(res.value) + '\n';
    emit(global, manifest, result, csv);
  });

  // ---- pacsw / dsw -------------------------------------------------------
  auto* pacsw_cmd =
      app.add_subcommand("pacsw", "fit a vMF slice distribution by bound ascent");
  pacsw_cmd->fallthrough();
  FitCliOptions pac_opt;
  add_fit_options(pacsw_cmd, pac_opt);
  pacsw_cmd->callback([&]() {
    const PointCloud mu = load_csv(pac_opt.mu_path);
    const PointCloud nu = load_csv(pac_opt.nu_path);
    const auto fit = pacsw_fit(mu, nu, to_config(pac_opt, global));
    if (!pac_opt.trace_out.empty()) write_trace(pac_opt.trace_out, fit.trace);
    emit(global, fit_manifest("pacsw", global, pac_opt), fit_result_json(fit),
         fit_result_csv(fit));
  });

  auto* dsw_cmd =
      app.add_subcommand("dsw", "fit a vMF slice distribution with a diversity penalty");
  dsw_cmd->fallthrough();
  FitCliOptions dsw_opt;
  double dsw_lambda_c = 10.0;
  double dsw_c_cap = 0.5;
  add_fit_options(dsw_cmd, dsw_opt);
  dsw_cmd->add_option("--lambda-c", dsw_lambda_c, "penalty weight (>= 0)");
  dsw_cmd->add_option("--c-cap", dsw_c_cap, "similarity cap in (0, 1]");
  dsw_cmd->callback([&]() {
    const PointCloud mu = load_csv(dsw_opt.mu_path);
    const PointCloud nu = load_csv(dsw_opt.nu_path);
    const auto fit = dsw_fit(mu, nu, to_config(dsw_opt, global), dsw_lambda_c, dsw_c_cap);
    if (!dsw_opt.trace_out.empty()) write_trace(dsw_opt.trace_out, fit.trace);
    ordered_json manifest = fit_manifest("dsw", global, dsw_opt);
    manifest["lambda_c"] = dsw_lambda_c;
    manifest["c_cap"] = dsw_c_cap;
    emit(global, manifest, fit_result_json(fit), fit_result_csv(fit));
  });

  // ---- bound -------------------------------------------------------------
  auto* bound_cmd = app.add_subcommand("bound", "assemble a generalization lower bound");
  bound_cmd->fallthrough();
  struct {
    double sw_hat = 0.0;
    double kl = 0.0;
    std::string regime = "bounded";
    double diameter = 0.0;
    double sigma2 = 0.0, tau2 = 0.0;
    double bern_b = 0.0, bern_c = 0.0;
    double p = 1.0;
    std::size_t n = 0;
    double lambda = 0.0;
    bool auto_lambda = false;
    double delta = 0.05;
    double psi_constant = 1.0;
    double q = 0.0;
  } b_opt;
  bound_cmd->add_option("--sw-hat", b_opt.sw_hat, "empirical SW_p^p estimate")->required();
  bound_cmd->add_option("--kl", b_opt.kl, "KL(rho || rho_0)")->required();
  bound_cmd->add_option("--regime", b_opt.regime)
      ->check(CLI::IsMember({"bounded", "subgaussian", "bernstein"}));
  bound_cmd->add_option("--diameter", b_opt.diameter, "support diameter (bounded regime)");
  bound_cmd->add_option("--sigma2", b_opt.sigma2, "variance proxy of mu");
  bound_cmd->add_option("--tau2", b_opt.tau2, "variance proxy of nu");
  bound_cmd->add_option("--b", b_opt.bern_b, "Bernstein scale of mu");
  bound_cmd->add_option("--c", b_opt.bern_c, "Bernstein scale of nu");
  bound_cmd->add_option("--p", b_opt.p, "transport order");
  bound_cmd->add_option("--n", b_opt.n, "sample size")->required();
  bound_cmd->add_option("--lambda", b_opt.lambda, "bound parameter (> 0)");
  bound_cmd->add_flag("--auto-lambda", b_opt.auto_lambda,
                      "use the bound-maximizing lambda instead of --lambda");
  bound_cmd->add_option("--delta", b_opt.delta, "confidence level in (0, 1]");
  bound_cmd->add_option("--psi-constant", b_opt.psi_constant,
                        "unnamed constant in the psi term");
  bound_cmd->add_option("--q", b_opt.q, "Bernstein moment order (> 2p)");
  bound_cmd->callback([&]() {
    MomentRegime regime = BoundedRegime{b_opt.diameter};
    if (b_opt.regime == "subgaussian") {
      regime = SubGaussianRegime{b_opt.sigma2, b_opt.tau2};
    } else if (b_opt.regime == "bernstein") {
      regime = BernsteinRegime{b_opt.sigma2, b_opt.bern_b, b_opt.tau2, b_opt.bern_c};
    }
    const BoundConstants constants{b_opt.psi_constant, b_opt.q};
    double lambda = b_opt.lambda;
    if (b_opt.auto_lambda) {
      lambda = best_lambda(b_opt.kl, regime, b_opt.p, b_opt.n, b_opt.delta, constants);
    }
    if (!(lambda > 0.0)) {
      throw CLI::ValidationError("bound: supply --lambda > 0 or --auto-lambda");
    }
    const BoundReport report = assemble_bound(b_opt.sw_hat, b_opt.kl, regime, b_opt.p,
                                              lambda, b_opt.n, b_opt.delta, constants);
    ordered_json manifest = base_manifest("bound", global);
    manifest["regime"] = b_opt.regime;
    manifest["p"] = b_opt.p;
    manifest["n"] = b_opt.n;
    manifest["auto_lambda"] = b_opt.auto_lambda;
    const auto result = report.to_json();
    std::string csv = "lower_bound,sw_hat,phi_term,kl_term,psi_term,lambda,delta\n";
    csv += fmt(report.lower_bound) + ',' + fmt(report.sw_hat) + ',' + fmt(report.phi_term) +
           ',' + fmt(report.kl_term) + ',' + fmt(report.psi_term) + ',' +
           fmt(report.lambda) + ',' + fmt(report.delta) + '\n';
    emit(global, manifest, result, csv);
  });

  // ---- experiment ----------------------------------------------------------
  auto* exp_cmd = app.add_subcommand("experiment", "run an experiment config file");
  exp_cmd->fallthrough();
  struct {
    std::string config_path;
    std::string output_csv;
    std::string output_manifest;
  } e_opt;
  exp_cmd->add_option("--config", e_opt.config_path, "JSON experiment config")->required();
  exp_cmd->add_option("--output-csv", e_opt.output_csv, "override the config output path");
  exp_cmd->add_option("--output-manifest", e_opt.output_manifest,
                      "override the manifest path");
  exp_cmd->callback([&]() {
    ExperimentConfig config = ExperimentConfig::from_file(e_opt.config_path);
    if (app.count("--seed") > 0) config.seed = global.seed;
    if (app.count("--threads") > 0) config.threads = global.threads;
    if (!e_opt.output_csv.empty()) config.output_csv = e_opt.output_csv;
    if (!e_opt.output_manifest.empty()) config.output_manifest = e_opt.output_manifest;
    const auto points = run_experiment(config);
    if (config.output_csv.empty()) {
      std::cout << curves_to_csv(points);
      std::cout << "# manifest: " << manifest_for(config).dump() << "\n";
    } else {
      write_outputs(config, points);
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
