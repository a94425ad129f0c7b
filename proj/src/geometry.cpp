#include "fasdoa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "fasdoa/error.hpp"

namespace fasdoa {

namespace {

// Restricted minimum-redundancy rulers: the largest aperture whose marks
// cover every lag 1..aperture, lexicographically smallest at that aperture.
// Generated offline by exhaustive search; N <= 6 is re-checked against
// mra_exhaustive_search in the test suite.
const std::vector<std::vector<int>>& mra_table() {
  static const std::vector<std::vector<int>> table = {
      {0, 1},
      {0, 1, 3},
      {0, 1, 4, 6},
      {0, 1, 2, 6, 9},
      {0, 1, 2, 6, 10, 13},
      {0, 1, 2, 3, 8, 13, 17},
      {0, 1, 2, 11, 15, 18, 21, 23},
      {0, 1, 2, 14, 18, 21, 24, 27, 29},
      {0, 1, 3, 6, 13, 20, 27, 31, 35, 36},
  };
  return table;
}

void require(bool ok, ErrorKind kind, const std::string& msg) {
  if (!ok) throw Error(kind, msg);
}

}  // namespace

ArrayGeometry::ArrayGeometry(std::vector<double> positions, double wavelength, double aperture)
    : positions_(std::move(positions)), wavelength_(wavelength), aperture_(aperture) {
  require(positions_.size() >= 2, ErrorKind::InvalidArgument, "geometry needs at least 2 elements");
  require(wavelength_ > 0.0 && std::isfinite(wavelength_), ErrorKind::InvalidArgument,
          "wavelength must be positive");
  require(aperture_ >= 0.0 && std::isfinite(aperture_), ErrorKind::InvalidArgument,
          "aperture must be nonnegative");
  std::sort(positions_.begin(), positions_.end());
  const double slack = 1e-12 * std::max(1.0, aperture_);
  for (double& p : positions_) {
    require(std::isfinite(p) && p >= -slack && p <= aperture_ + slack, ErrorKind::InvalidArgument,
            "position " + std::to_string(p) + " outside [0, D]");
    p = std::clamp(p, 0.0, aperture_);
  }
}

ArrayGeometry ArrayGeometry::with_positions(std::vector<double> positions) const {
  return ArrayGeometry(std::move(positions), wavelength_, aperture_);
}

ArrayGeometry make_ula(int n, double d0) {
  require(n >= 2, ErrorKind::InvalidArgument, "ULA needs N >= 2");
  require(d0 > 0.0, ErrorKind::InvalidArgument, "d0 must be positive");
  std::vector<double> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i * d0;
  return ArrayGeometry(std::move(p), 2.0 * d0, (n - 1) * d0);
}

ArrayGeometry make_nested(int n1, int n2, double d0) {
  require(n1 >= 1 && n2 >= 1, ErrorKind::InvalidArgument, "nested level sizes must be positive");
  require(d0 > 0.0, ErrorKind::InvalidArgument, "d0 must be positive");
  std::vector<double> p;
  for (int i = 1; i <= n1; ++i) p.push_back(i * d0);
  for (int m = 1; m <= n2; ++m) p.push_back((n1 + 1) * m * d0);
  return ArrayGeometry(std::move(p), 2.0 * d0, n2 * (n1 + 1) * d0);
}

ArrayGeometry make_coprime(int m, int n, double d0) {
  require(m >= 2 && n >= 2, ErrorKind::InvalidArgument, "coprime pair needs M, N >= 2");
  require(std::gcd(m, n) == 1, ErrorKind::InvalidArgument,
          "M=" + std::to_string(m) + " and N=" + std::to_string(n) + " are not coprime");
  require(d0 > 0.0, ErrorKind::InvalidArgument, "d0 must be positive");
  std::vector<int> marks;
  for (int i = 0; i < n; ++i) marks.push_back(i * m);
  for (int i = 1; i <= 2 * m - 1; ++i) marks.push_back(i * n);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  std::vector<double> p;
  for (int k : marks) p.push_back(k * d0);
  return ArrayGeometry(std::move(p), 2.0 * d0, marks.back() * d0);
}

std::vector<int> mra_table_entry(int n) {
  require(n >= 2 && n <= kMraTableMax, ErrorKind::UnsupportedSize,
          "no MRA table entry for N=" + std::to_string(n));
  return mra_table()[static_cast<std::size_t>(n - 2)];
}

ArrayGeometry make_mra(int n, double d0) {
  require(d0 > 0.0, ErrorKind::InvalidArgument, "d0 must be positive");
  const auto marks = mra_table_entry(n);
  std::vector<double> p;
  for (int k : marks) p.push_back(k * d0);
  return ArrayGeometry(std::move(p), 2.0 * d0, marks.back() * d0);
}

int grid_dof(std::span<const int> marks) {
  if (marks.empty()) return 0;
  const auto [lo, hi] = std::minmax_element(marks.begin(), marks.end());
  const int span = *hi - *lo;
  std::vector<char> seen(static_cast<std::size_t>(span) + 1, 0);
  for (int a : marks)
    for (int b : marks) seen[static_cast<std::size_t>(std::abs(a - b))] = 1;
  int mc = 0;
  while (mc + 1 <= span && seen[static_cast<std::size_t>(mc + 1)]) ++mc;
  return 2 * mc + 1;
}

std::vector<int> mra_exhaustive_search(int n, int max_aperture) {
  require(n >= 2, ErrorKind::InvalidArgument, "need N >= 2");
  require(max_aperture >= n - 1, ErrorKind::InvalidArgument, "max_aperture too small for N marks");
  require(n <= 6 && max_aperture <= 30, ErrorKind::ResourceLimit,
          "exhaustive MRA search limited to N <= 6, max_aperture <= 30");

  // Translation-normalized subsets: 0 is always a mark. Enumeration is in
  // lexicographic order, so keeping only strict improvements implements the
  // tie-break.
  std::vector<int> cur{0};
  std::vector<int> best;
  int best_dof = -1;
  int best_aperture = 0;
  auto visit = [&](auto&& self, int next) -> void {
    if (static_cast<int>(cur.size()) == n) {
      const int dof = grid_dof(cur);
      const int ap = cur.back();
      if (dof > best_dof || (dof == best_dof && ap < best_aperture)) {
        best = cur;
        best_dof = dof;
        best_aperture = ap;
      }
      return;
    }
    const int remaining = n - static_cast<int>(cur.size());
    for (int x = next; x <= max_aperture - remaining + 1; ++x) {
      cur.push_back(x);
      self(self, x + 1);
      cur.pop_back();
    }
  };
  visit(visit, 1);
  return best;
}

int DifferenceCoarray::find_lag(double value, double tol) const {
  auto it = std::lower_bound(lags.begin(), lags.end(), value - tol);
  if (it == lags.end() || *it > value + tol) return -1;
  return static_cast<int>(it - lags.begin());
}

int DifferenceCoarray::find_grid_lag(int m) const {
  auto it = std::lower_bound(grid_lags.begin(), grid_lags.end(), m);
  if (it == grid_lags.end() || *it != m) return -1;
  return static_cast<int>(it - grid_lags.begin());
}

DifferenceCoarray difference_coarray(const ArrayGeometry& geom, double tol_grid) {
  const double d0 = geom.d0();
  if (tol_grid <= 0.0) tol_grid = kGridTolerance * d0;
  const double tol_dedup = kDedupTolerance * d0;
  const auto p = geom.positions();
  const int n = static_cast<int>(p.size());

  struct Diff {
    double mag;
    double signed_value;
    int i, j;
  };
  std::vector<Diff> diffs;
  diffs.reserve(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double d = p[static_cast<std::size_t>(i)] - p[static_cast<std::size_t>(j)];
      diffs.push_back({std::abs(d), d, i, j});
    }
  std::sort(diffs.begin(), diffs.end(), [](const Diff& a, const Diff& b) {
    return a.mag < b.mag || (a.mag == b.mag && (a.i < b.i || (a.i == b.i && a.j < b.j)));
  });

  // Cluster magnitudes; the cluster minimum is the representative so that
  // +lag and -lag are exact negatives of each other.
  struct Cluster {
    double rep;
    std::vector<IndexPair> pos, neg;
  };
  std::vector<Cluster> clusters;
  double prev = -1.0;
  for (const auto& d : diffs) {
    if (clusters.empty() || d.mag - prev > tol_dedup) clusters.push_back({d.mag, {}, {}});
    prev = d.mag;
    auto& c = clusters.back();
    (d.signed_value >= 0.0 ? c.pos : c.neg).emplace_back(d.i, d.j);
  }

  DifferenceCoarray out;
  out.d0 = d0;
  out.sensor_count = p.size();
  const bool has_zero = clusters.front().rep <= tol_dedup;
  // Negative lags, descending magnitude.
  for (auto it = clusters.rbegin(); it != clusters.rend(); ++it) {
    if (has_zero && &*it == &clusters.front()) break;
    out.lags.push_back(-it->rep);
    auto pairs = it->neg;
    std::sort(pairs.begin(), pairs.end());
    out.redundancy.push_back(std::move(pairs));
  }
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    auto pairs = clusters[c].pos;
    if (c == 0 && has_zero) {
      pairs.insert(pairs.end(), clusters[c].neg.begin(), clusters[c].neg.end());
      out.lags.push_back(0.0);
    } else {
      out.lags.push_back(clusters[c].rep);
    }
    std::sort(pairs.begin(), pairs.end());
    out.redundancy.push_back(std::move(pairs));
  }

  std::map<int, std::vector<IndexPair>> grid;
  for (std::size_t k = 0; k < out.lags.size(); ++k) {
    const double lag = out.lags[k];
    const double m = std::round(lag / d0);
    if (std::abs(lag - m * d0) <= tol_grid) {
      auto& dst = grid[static_cast<int>(m)];
      dst.insert(dst.end(), out.redundancy[k].begin(), out.redundancy[k].end());
    }
  }
  for (auto& [m, pairs] : grid) {
    std::sort(pairs.begin(), pairs.end());
    out.grid_lags.push_back(m);
    out.grid_redundancy.push_back(std::move(pairs));
  }
  int mc = 0;
  while (out.find_grid_lag(mc + 1) >= 0 && out.find_grid_lag(-(mc + 1)) >= 0) ++mc;
  out.contiguous_half_length = out.find_grid_lag(0) >= 0 ? mc : 0;
  return out;
}

int coarray_dof(const DifferenceCoarray& coarray) { return 2 * coarray.contiguous_half_length + 1; }

int dual_dof_bound(int n, double aperture, double d0) {
  require(n >= 2, ErrorKind::InvalidArgument, "need N >= 2");
  require(aperture > 0.0 && d0 > 0.0, ErrorKind::InvalidArgument, "D and d0 must be positive");
  const long long combinatorial = static_cast<long long>(n) * n - n + 1;
  const long long geometric = 2 * static_cast<long long>(std::floor(aperture / d0)) + 1;
  return static_cast<int>(std::min(combinatorial, geometric));
}

std::vector<double> position_moments(std::span<const double> positions, int k_max) {
  require(k_max >= 2, ErrorKind::InvalidArgument, "k_max must be >= 2");
  require(!positions.empty(), ErrorKind::InvalidArgument, "no positions");
  const double n = static_cast<double>(positions.size());
  const double mean = std::accumulate(positions.begin(), positions.end(), 0.0) / n;
  std::vector<double> mu(static_cast<std::size_t>(k_max - 1), 0.0);
  for (double p : positions) {
    const double c = p - mean;
    double term = c;
    for (int k = 2; k <= k_max; ++k) {
      term *= c;
      mu[static_cast<std::size_t>(k - 2)] += term;
    }
  }
  for (double& m : mu) m /= n;
  return mu;
}

std::vector<double> position_moments(const ArrayGeometry& geom, int k_max) {
  return position_moments(geom.positions(), k_max);
}

}  // namespace fasdoa
