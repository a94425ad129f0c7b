#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fasdoa/fisher.hpp"
#include "fasdoa/geometry.hpp"
#include "fasdoa/measure.hpp"
#include "fasdoa/signal_model.hpp"

namespace fasdoa {

// Lengths are in meters. Zero grid_resolution selects d0 / 50.
struct DesignConfig {
  double epsilon = 1e-3;
  int t_max = 4000;
  double d_min = 0.0;
  double mu_sp = 1e8;
  double mu_coarray = 0.0;  // 0 disables the coarray refinement stage
  double grid_resolution = 0.0;
  bool polish = true;

  void validate() const;
};

struct FrankWolfeIteration {
  int t = 0;
  double phi_max = 0.0;
  double argmax = 0.0;
  double trace_identity = 0.0;  // integral of phi over the current measure
  double min_weight = 0.0;
  double total_weight = 0.0;
};

using FrankWolfeLog = std::vector<FrankWolfeIteration>;

// Closed form for a single source: endpoints, plus the midpoint for odd N.
std::vector<double> single_source_optimal(int n, double aperture);

DesignMeasure frank_wolfe_design(const SourceScenario& scenario, int n, double aperture, double wavelength,
                                 const DesignConfig& config, FrankWolfeLog* log = nullptr);

std::vector<double> extract_positions(const DesignMeasure& xi, int n, double d_min, double aperture,
                                      double d0);

double spacing_penalty(std::span<const double> positions, double d_min);
std::vector<double> spacing_penalty_gradient(std::span<const double> positions, double d_min);

// log det F_exact - mu_sp * sum max(0, d_min - |p_i - p_j|)^2.
double spacing_penalized_objective(std::span<const double> positions, double wavelength,
                                   const SourceScenario& scenario, double d_min, double mu_sp);

// Bounded quasi-Newton ascent of spacing_penalized_objective, followed by an
// exact projection onto the spacing constraint.
std::vector<double> polish_positions(std::vector<double> positions, double wavelength, double aperture,
                                     const SourceScenario& scenario, double d_min, double mu_sp);

// Smallest change that makes sorted positions satisfy the spacing inside [0, D].
std::vector<double> enforce_spacing(std::vector<double> positions, double d_min, double aperture);

// Local search on DOF + mu * log det F. Never lowers the contiguous DOF and
// never decreases the objective. mu == 0 searches on DOF alone.
std::vector<double> coarray_refine(std::vector<double> positions, double wavelength, double aperture,
                                   const SourceScenario& scenario, double mu_coarray, double d_min);

double coarray_objective(std::span<const double> positions, double wavelength, double aperture,
                         const SourceScenario& scenario, double mu_coarray);

struct DofLoss {
  int delta = 0;
  int unconstrained_dof = 0;
  int constrained_dof = 0;  // 0 when no geometry satisfies d_min
  int seeds = 0;
};

DofLoss dof_loss_from_spacing(int n, double aperture, double d0, double d_min, int seeds = 64,
                              std::uint64_t master_seed = 1);

struct DesignResult {
  DesignMeasure measure;
  ArrayGeometry geometry;
  double log_det = 0.0;
  int dof = 0;
  double mu_coarray_used = 0.0;
  int coarray_backoffs = 0;
};

// Frank-Wolfe, support extraction, polish, optional coarray refinement. When
// the refined contiguous DOF is below 2L + 1, mu_coarray is divided by 10 and
// the refinement repeated from the polished positions, at most four times.
DesignResult design_positions(const SourceScenario& scenario, int n, double aperture, double wavelength,
                              const DesignConfig& config, FrankWolfeLog* log = nullptr);

}  // namespace fasdoa
