#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fasdoa/geometry.hpp"
#include "fasdoa/measure.hpp"
#include "fasdoa/signal_model.hpp"

namespace fasdoa {

// Real symmetric L x L Fisher information for the DOA vector.
struct FisherInfo {
  Eigen::MatrixXd f;

  double log_det() const;
};

// (2 N_p / sigma^2) Re{ D^H Pi_A^perp D .* R_s^T } for the given positions.
FisherInfo fim_exact(std::span<const double> positions, double wavelength, const SourceScenario& scenario);
FisherInfo fim_exact(const ArrayGeometry& geom, const SourceScenario& scenario);

// Closed form for one source: (2 N_p P / sigma^2) (4 pi^2 cos^2 theta / lambda^2) N mu_2.
double fim_single_source(const ArrayGeometry& geom, const SourceScenario& scenario);

// Per-source variances (rad^2), the diagonal of F^{-1}.
std::vector<double> crb(const FisherInfo& info);

inline constexpr double kSingularCondition = 1e12;

// Measure-relaxed information for N elements distributed according to xi.
// Uses the regression residual of the derivative phasors on the steering
// phasors under xi, so an empirical measure reproduces fim_exact and a single
// source reproduces the centered closed form.
FisherInfo fim_measure(const DesignMeasure& xi, const SourceScenario& scenario, int n_elements,
                       double wavelength);

// Moment summaries of xi needed to evaluate phi(p) repeatedly.
class MeasureInformation {
 public:
  MeasureInformation(const DesignMeasure& xi, const SourceScenario& scenario, double wavelength);

  // Information per unit mass (no N, no 2 N_p / sigma^2 factor).
  const Eigen::MatrixXd& unit_information() const noexcept { return unit_info_; }
  bool singular() const noexcept { return singular_; }

  // phi(p) = tr(F^{-1} I(p)); requires !singular().
  double directional_derivative(double p) const;

 private:
  Eigen::VectorXcd residual(double p) const;

  std::vector<double> doas_;
  std::vector<double> powers_;
  double k_;
  Eigen::MatrixXcd c_ginv_;  // C G^+
  Eigen::MatrixXd unit_info_;
  Eigen::MatrixXd unit_info_inv_;
  bool singular_ = false;
};

double directional_derivative(const DesignMeasure& xi, double p, const SourceScenario& scenario,
                              double wavelength);

}  // namespace fasdoa
