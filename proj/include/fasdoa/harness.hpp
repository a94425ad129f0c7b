#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fasdoa/estimation.hpp"

namespace fasdoa {

enum class Algorithm { Music, CoarrayMusic, FasMusic };

Algorithm parse_algorithm(const std::string& name);
std::string to_string(Algorithm a);

// All angles in degrees, lengths in units of d0 unless stated otherwise.
struct ExperimentConfig {
  std::string experiment = "rmse_vs_snr";
  int n_antennas = 6;
  std::vector<double> sources_deg{10.0, 25.0};
  double aperture_d0 = 40.0;
  std::vector<double> snr_db{-5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
  double fixed_snr_db = 10.0;  // for sweeps over something other than SNR
  int snapshots = 500;
  int trials = 50;
  std::uint64_t seed = 1;
  std::vector<std::string> algorithms{"music", "coarray-music", "fas-music", "adaptive"};
  double wavelength = 1.0;
  double d_min_d0 = 0.4;
  double mu_coarray = 10.0;
  double design_epsilon = 1e-3;
  int design_t_max = 4000;
  std::vector<double> aperture_sweep_d0{4, 8, 12, 16, 20, 24, 28, 32, 36, 40};
  std::vector<double> separations_deg{0.5, 1.0, 1.5, 2.0, 3.0, 5.0};
  std::vector<int> antenna_counts{4, 5, 6, 7, 8};
  int adapt_rounds = 1;
  std::vector<double> mismatched_prior_deg{0.0, 45.0};
  std::vector<std::vector<double>> position_scenarios{{10.0, 25.0}, {-30.0, 30.0}, {14.0, 16.0}, {0.0}};
  int threads = 0;  // 0 selects the hardware concurrency

  void validate() const;
  bool wants(const std::string& algorithm) const;
};

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
nlohmann::json to_json(const ExperimentConfig& c);

struct ResultRow {
  std::string experiment;
  std::string array_type;
  std::string algorithm;
  std::string sweep_variable;
  double sweep_value = 0.0;
  std::optional<double> rmse_degrees;
  std::optional<double> sqrt_crb_degrees;
  int trials = 0;
  double runtime_seconds = 0.0;
};

struct RowError {
  std::string array_type;
  std::string algorithm;
  double sweep_value = 0.0;
  std::string message;
};

struct DesignRecord {
  std::string label;
  std::vector<double> sources_deg;
  double aperture = 0.0;  // meters
  std::vector<double> positions;
  int dof = 0;
  double log_det = 0.0;
  double kw_gap = 0.0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::vector<RowError> errors;
  std::vector<DesignRecord> designs;
  int failed_trials = 0;

  void sort();
  std::string to_csv() const;
};

// 9 significant digits, "nan"/"inf" spelled out.
std::string format_float(double v);

struct MonteCarloResult {
  double rmse_degrees = 0.0;
  int trials = 0;
  int failures = 0;
};

// Trial t uses snapshots seeded with derive_seed(master_seed, t). Estimates
// and truth are matched after sorting. Missing peaks repeat the last returned
// estimate; a trial whose estimator throws counts with every estimate at
// broadside. Both cases are tallied as failures.
MonteCarloResult monte_carlo_rmse(const ArrayGeometry& geom, const SourceScenario& scenario, Algorithm algorithm,
                                  int trials, std::uint64_t master_seed, const FasMusicConfig& estimator = {},
                                  int threads = 0);

// sqrt of the mean per-source CRB, degrees.
double sqrt_mean_crb_degrees(const ArrayGeometry& geom, const SourceScenario& scenario);

ResultTable experiment_crb_vs_D(const ExperimentConfig& config);
ResultTable experiment_rmse_vs_snr(const ExperimentConfig& config);
ResultTable experiment_resolution(const ExperimentConfig& config);
ResultTable experiment_scaling_N(const ExperimentConfig& config);
ResultTable experiment_adaptive(const ExperimentConfig& config);
ResultTable experiment_positions(const ExperimentConfig& config);

ResultTable run_experiment(const std::string& name, const ExperimentConfig& config);
const std::vector<std::string>& experiment_names();

// results.csv, manifest.json and, when designs were produced, positions.json.
void write_experiment_outputs(const std::filesystem::path& dir, const std::string& name,
                              const ExperimentConfig& config, const ResultTable& table, double wall_seconds);

}  // namespace fasdoa
