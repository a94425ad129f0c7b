#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace fasdoa {

// Ordered antenna positions (meters) inside the deployment region [0, D].
// The Nyquist spacing d0 is always derived from the wavelength.
class ArrayGeometry {
 public:
  ArrayGeometry(std::vector<double> positions, double wavelength, double aperture);

  std::span<const double> positions() const noexcept { return positions_; }
  double position(std::size_t n) const { return positions_.at(n); }
  std::size_t size() const noexcept { return positions_.size(); }
  double wavelength() const noexcept { return wavelength_; }
  double aperture() const noexcept { return aperture_; }
  double d0() const noexcept { return 0.5 * wavelength_; }

  // Same wavelength and region, different positions.
  ArrayGeometry with_positions(std::vector<double> positions) const;

 private:
  std::vector<double> positions_;
  double wavelength_;
  double aperture_;
};

ArrayGeometry make_ula(int n, double d0);
ArrayGeometry make_nested(int n1, int n2, double d0);
ArrayGeometry make_coprime(int m, int n, double d0);
ArrayGeometry make_mra(int n, double d0);

// Largest N covered by the built-in restricted minimum-redundancy table.
inline constexpr int kMraTableMax = 10;

// Integer marks (units of d0) of the tabulated restricted MRA for `n` elements.
std::vector<int> mra_table_entry(int n);

// Brute-force maximizer of contiguous DOF over subsets of {0..max_aperture}.
// Ties: smallest aperture, then lexicographic order.
std::vector<int> mra_exhaustive_search(int n, int max_aperture);

using IndexPair = std::pair<int, int>;

struct DifferenceCoarray {
  double d0 = 0.0;
  std::size_t sensor_count = 0;
  // Sorted unique lags (meters) with the ordered sensor pairs (i, j) such
  // that p_i - p_j equals the lag.
  std::vector<double> lags;
  std::vector<std::vector<IndexPair>> redundancy;
  // Integer m for every lag within tol_grid of m * d0, sorted, unique.
  std::vector<int> grid_lags;
  // Pairs contributing to each entry of grid_lags (union over matching lags).
  std::vector<std::vector<IndexPair>> grid_redundancy;
  int contiguous_half_length = 0;

  // Index into lags of the lag nearest to `value`, or -1 if farther than tol.
  int find_lag(double value, double tol) const;
  // Index into grid_lags of grid lag m, or -1.
  int find_grid_lag(int m) const;
};

inline constexpr double kDedupTolerance = 1e-9;  // relative to d0
inline constexpr double kGridTolerance = 1e-3;   // relative to d0

// tol_grid <= 0 selects the default of kGridTolerance * d0.
DifferenceCoarray difference_coarray(const ArrayGeometry& geom, double tol_grid = 0.0);

int coarray_dof(const DifferenceCoarray& coarray);

// Contiguous DOF of integer marks; convenience for grid searches.
int grid_dof(std::span<const int> marks);

int dual_dof_bound(int n, double aperture, double d0);

// Central moments mu_2 .. mu_{k_max} about the position mean.
std::vector<double> position_moments(std::span<const double> positions, int k_max);
std::vector<double> position_moments(const ArrayGeometry& geom, int k_max);

}  // namespace fasdoa
