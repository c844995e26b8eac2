#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace pacsw {

// Declarative experiment description; serialized verbatim into the manifest.
struct ExperimentConfig {
  enum class Kind { convergence, discrimination, class_pair, bound_validity };

  Kind kind = Kind::convergence;
  std::string family = "gaussian";  // "uniform" | "gaussian" | "uniform_shift"
  double side = 5.0;

  std::vector<std::size_t> n_grid;
  std::vector<std::size_t> d_grid;
  std::vector<double> gamma_grid;
  std::vector<double> kappa_grid;
  std::vector<std::string> methods;  // sw_uniform, pacsw, dsw, maxsw

  std::size_t replicates = 10;
  std::uint64_t seed = 0;

  double p = 1.0;
  std::size_t num_slices = 1000;
  std::size_t train_n = 500;
  std::size_t test_n = 2000;
  std::size_t eval_slices = 500;

  std::size_t iterations = 200;
  std::vector<double> learning_rates = {1e-3, 1e-2, 1e-1, 1.0};
  double lambda_exponent = 0.5;
  bool adam = true;
  double dsw_lambda_c = 10.0;
  double dsw_c_cap = 0.5;
  std::size_t maxsw_restarts = 5;
  double maxsw_eta = 0.1;

  double delta = 0.05;
  double psi_constant = 1.0;
  std::size_t reference_slices = 100000;

  std::string idx_images;
  std::string idx_labels;
  std::vector<int> classes = {4, 5};

  std::string output_csv;
  std::string output_manifest;
  std::size_t threads = 0;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
  nlohmann::ordered_json to_json() const;
};

// One aggregated curve coordinate: replicate statistics of one scalar.
struct CurvePoint {
  std::string experiment;
  std::string family;
  std::string method;
  std::string statistic;
  std::size_t n = 0;
  std::size_t d = 0;
  double gamma = 0.0;
  double kappa = 0.0;
  std::size_t replicates = 0;
  double median = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  double mean = 0.0;
};

std::vector<CurvePoint> run_convergence(const ExperimentConfig& config);
std::vector<CurvePoint> run_discrimination(const ExperimentConfig& config);
std::vector<CurvePoint> run_class_pair(const ExperimentConfig& config);
std::vector<CurvePoint> run_bound_validity(const ExperimentConfig& config);
std::vector<CurvePoint> run_experiment(const ExperimentConfig& config);

// Fixed column order, %.17g floats, LF line endings; byte-stable for a given
// config and seed regardless of the worker count.
std::string curves_to_csv(const std::vector<CurvePoint>& points);

nlohmann::ordered_json manifest_for(const ExperimentConfig& config);

// Writes the CSV and the manifest next to it ("<csv>.manifest.json" unless
// output_manifest is set).
void write_outputs(const ExperimentConfig& config, const std::vector<CurvePoint>& points);

std::string version_string();

// Replicate statistics helpers (linear-interpolation percentiles).
double percentile(std::vector<double> values, double q);

}  // namespace pacsw
