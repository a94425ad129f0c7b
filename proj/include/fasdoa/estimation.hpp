#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fasdoa/design.hpp"
#include "fasdoa/geometry.hpp"
#include "fasdoa/signal_model.hpp"

namespace fasdoa {

struct Spectrum {
  std::vector<double> angles;  // radians
  std::vector<double> values;
};

struct EstimateDiagnostics {
  int contiguous_half_length = 0;  // M_c
  int subarray_size = 0;           // M_s
  int ml_iterations = 0;
  bool converged = true;
  double ml_objective_coarse = 0.0;
  double ml_objective_final = 0.0;
};

struct EstimateResult {
  std::vector<double> theta_hat;     // sorted, radians
  std::vector<double> theta_coarse;  // stage-1 estimates
  std::vector<double> peak_heights;  // pseudo-spectrum at each stage-1 peak, aligned with theta_coarse
  std::optional<Spectrum> spectrum;
  EstimateDiagnostics diagnostics;
};

constexpr double kDefaultGridStep = 0.02 * 3.14159265358979323846 / 180.0;

struct FasMusicConfig {
  double grid_step = kDefaultGridStep;
  double box_radius = 5.0 * 3.14159265358979323846 / 180.0;  // delta
  int jitter_starts = 2;
  std::uint64_t jitter_seed = 0x5eed;
  bool keep_spectrum = false;
};

// MUSIC on the physical array. Peaks are the L largest local maxima at least
// two grid steps apart, refined by a parabola through the dB values.
EstimateResult music_estimate(const CovarianceEstimate& cov, const ArrayGeometry& geom, int sources,
                              double grid_step = kDefaultGridStep, bool keep_spectrum = false);

// Stage 1: spatially smoothed MUSIC on the contiguous coarray segment.
EstimateResult coarray_music(const CovarianceEstimate& cov, const ArrayGeometry& geom, int sources,
                             double grid_step = kDefaultGridStep, bool keep_spectrum = false);

// Smoothed virtual covariance, exposed for rank checks.
Eigen::MatrixXcd smoothed_coarray_covariance(const CovarianceEstimate& cov, const DifferenceCoarray& coarray);

// tr{(I - P_A(theta)) R}.
double ml_objective(const CovarianceEstimate& cov, const ArrayGeometry& geom, std::span<const double> theta);

struct RefineResult {
  std::vector<double> theta;
  double objective = 0.0;
  double objective_start = 0.0;
  int iterations = 0;
  bool converged = true;
};

// Stage 2: bounded minimization of ml_objective within +-delta of the coarse
// estimates. Never returns an objective above the one at the start.
RefineResult local_ml_refine(const CovarianceEstimate& cov, const ArrayGeometry& geom,
                             std::vector<double> theta_coarse, double delta, int jitter_starts = 2,
                             std::uint64_t jitter_seed = 0x5eed);

// Stage 1, then Stage 2 from the coarse peaks and from every hypothesis that
// one peak hides two sources (weakest peak dropped, another split); the
// hypothesis with the lowest likelihood objective wins.
EstimateResult fas_music(const SnapshotData& data, int sources, const FasMusicConfig& config = {});
EstimateResult fas_music(const CovarianceEstimate& cov, const ArrayGeometry& geom, int sources,
                         const FasMusicConfig& config = {});

using DataSource = std::function<SnapshotData(const ArrayGeometry&)>;

struct AdaptiveResult {
  EstimateResult estimate;
  ArrayGeometry geometry;
  std::vector<ArrayGeometry> history;  // geometry used at each round, initial first
  int design_failures = 0;
};

struct AdaptiveConfig {
  FasMusicConfig estimator;
  DesignConfig design = [] {
    DesignConfig c;
    c.mu_coarray = 10.0;
    return c;
  }();
  double d_min_d0 = 0.4;  // overrides design.d_min
  double snr_db = 10.0;  // SNR assumed when designing at the current estimate
  int snapshots = 500;
};

// Starts from a half-wavelength ULA at the origin, then K rounds of
// redesign at the current estimate, fresh data and re-estimation.
AdaptiveResult adaptive_fas_music(const DataSource& source, int n, double aperture, double wavelength, int sources,
                                  int rounds, const AdaptiveConfig& config = {});

}  // namespace fasdoa
