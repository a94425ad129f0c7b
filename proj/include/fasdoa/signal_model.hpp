#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fasdoa/geometry.hpp"

namespace fasdoa {

using cd = std::complex<double>;

// Far-field narrowband sources. Angles in radians, powers linear.
struct SourceScenario {
  std::vector<double> doas;
  std::vector<double> powers;
  double noise_power = 1.0;
  int snapshots = 1;

  std::size_t size() const noexcept { return doas.size(); }
  // Throws invalid-argument on any broken invariant. A zero noise power is
  // accepted here (noiseless simulation); the Fisher routines reject it.
  void validate() const;

  // Equal unit-power sources at the given SNR (dB) per source.
  static SourceScenario equal_power(std::vector<double> doas_rad, double snr_db, int snapshots);
};

Eigen::VectorXcd steering_vector(std::span<const double> positions, double wavelength, double theta);
Eigen::VectorXcd steering_vector(const ArrayGeometry& geom, double theta);
Eigen::MatrixXcd steering_matrix(std::span<const double> positions, double wavelength,
                                 std::span<const double> doas);
Eigen::MatrixXcd steering_matrix(const ArrayGeometry& geom, std::span<const double> doas);

// Model covariance A R_s A^H + sigma^2 I.
Eigen::MatrixXcd model_covariance(const ArrayGeometry& geom, const SourceScenario& scenario);

struct SnapshotData {
  Eigen::MatrixXcd x;  // N x N_p, row n holds the snapshots taken at position n
  ArrayGeometry geometry;
  SourceScenario scenario;
  std::uint64_t seed = 0;
};

SnapshotData synthesize_snapshots(const ArrayGeometry& geom, const SourceScenario& scenario,
                                  std::uint64_t seed);

struct CovarianceEstimate {
  Eigen::MatrixXcd r;
};

CovarianceEstimate sample_covariance(const Eigen::MatrixXcd& x);
CovarianceEstimate sample_covariance(const SnapshotData& data);

// Redundancy-averaged covariance entries per unique coarray lag, aligned
// with coarray.lags.
struct CoarrayObservation {
  std::vector<double> lags;
  std::vector<cd> values;

  cd at(double lag, double tol) const;
};

CoarrayObservation vectorize_covariance(const CovarianceEstimate& cov, const DifferenceCoarray& coarray);

// Virtual half-wavelength ULA signal on the contiguous segment, lags
// -M_c..M_c in ascending order, averaged over every pair whose difference
// falls within the grid tolerance of m * d0.
std::vector<cd> contiguous_virtual_signal(const CovarianceEstimate& cov,
                                          const DifferenceCoarray& coarray);

// Perturbs each position by Uniform[-dp/2, dp/2], clamped to [0, D].
ArrayGeometry apply_position_error(const ArrayGeometry& geom, double delta_p, std::uint64_t seed);

// Predicted coherent gain factor sinc^2(pi dp sin(theta) / lambda).
double position_error_gain_model(double delta_p, double theta, double wavelength);

// Normalized beamformer response a_nominal^H a_actual / N at angle theta.
cd beam_response(std::span<const double> nominal, std::span<const double> actual, double wavelength,
                 double theta);

double deg2rad(double deg);
double rad2deg(double rad);

}  // namespace fasdoa
