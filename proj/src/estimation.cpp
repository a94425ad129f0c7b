#include "fasdoa/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fasdoa/error.hpp"
#include "fasdoa/optimize.hpp"
#include "fasdoa/rng.hpp"

namespace fasdoa {

using std::numbers::pi;

namespace {

constexpr double kEdgeMargin = 1e-6;       // rad, keeps searches off +-90 deg
constexpr double kRankPerturbation = 1e-6;  // rad
constexpr long kMaxLatticePoints = 40000;

std::vector<double> scan_grid(double step) {
  if (!(step > 0.0) || step >= pi / 2) throw Error(ErrorKind::InvalidArgument, "grid step must be in (0, 90 deg)");
  std::vector<double> g;
  const int k = static_cast<int>(std::floor(pi / step));
  for (int i = 1; i < k; ++i) {
    const double th = -pi / 2 + i * step;
    if (th < pi / 2) g.push_back(th);
  }
  return g;
}

Eigen::MatrixXcd noise_subspace(const Eigen::MatrixXcd& r, int sources) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (r + r.adjoint()));
  if (es.info() != Eigen::Success) throw Error(ErrorKind::DegenerateConfiguration, "eigendecomposition failed");
  return es.eigenvectors().leftCols(r.rows() - sources);  // eigenvalues ascend
}

// Picks the strongest local maxima at least two samples apart and refines each
// with a parabola through the dB values.
struct Peaks {
  std::vector<double> angles;
  std::vector<double> heights;
};

Peaks pick_peaks(const std::vector<double>& grid, const std::vector<double>& spec, int count, double step) {
  std::vector<std::size_t> maxima;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double left = i > 0 ? spec[i - 1] : -std::numeric_limits<double>::infinity();
    const double right = i + 1 < spec.size() ? spec[i + 1] : -std::numeric_limits<double>::infinity();
    if (spec[i] > left && spec[i] >= right) maxima.push_back(i);
  }
  std::stable_sort(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) { return spec[a] > spec[b]; });

  std::vector<std::size_t> chosen;
  for (std::size_t i : maxima) {
    if (static_cast<int>(chosen.size()) == count) break;
    const bool clear = std::all_of(chosen.begin(), chosen.end(), [&](std::size_t c) {
      return (i > c ? i - c : c - i) >= 2;
    });
    if (clear) chosen.push_back(i);
  }

  std::sort(chosen.begin(), chosen.end());
  Peaks out;
  for (std::size_t i : chosen) {
    double th = grid[i];
    if (i > 0 && i + 1 < spec.size()) {
      const double ym = 10.0 * std::log10(spec[i - 1]);
      const double y0 = 10.0 * std::log10(spec[i]);
      const double yp = 10.0 * std::log10(spec[i + 1]);
      const double den = ym - 2.0 * y0 + yp;
      if (den < 0.0) th += std::clamp(0.5 * (ym - yp) / den, -0.5, 0.5) * step;
    }
    out.angles.push_back(th);
    out.heights.push_back(spec[i]);
  }
  return out;
}

template <typename SteerFn>
std::vector<double> pseudo_spectrum(const Eigen::MatrixXcd& en, const std::vector<double>& grid, SteerFn steer) {
  std::vector<double> spec(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXcd a = steer(grid[i]);
    const double d = (en.adjoint() * a).squaredNorm();
    spec[i] = 1.0 / std::max(d, std::numeric_limits<double>::min());
  }
  return spec;
}

void check_cov(const CovarianceEstimate& cov, const ArrayGeometry& geom) {
  if (cov.r.rows() != static_cast<Eigen::Index>(geom.size()) || cov.r.cols() != cov.r.rows())
    throw Error(ErrorKind::InvalidArgument, "covariance does not match the geometry");
}

double physical_span(const ArrayGeometry& geom) {
  const auto p = geom.positions();
  return std::max(p.back() - p.front(), geom.d0());
}

}  // namespace

EstimateResult music_estimate(const CovarianceEstimate& cov, const ArrayGeometry& geom, int sources,
                              double grid_step, bool keep_spectrum) {
  check_cov(cov, geom);
  const int n = static_cast<int>(geom.size());
  if (sources < 1) throw Error(ErrorKind::InvalidArgument, "need at least one source");
  if (sources >= n) throw Error(ErrorKind::TooManySources, "MUSIC needs L < N");

  const auto grid = scan_grid(grid_step);
  const Eigen::MatrixXcd en = noise_subspace(cov.r, sources);
  const auto spec = pseudo_spectrum(en, grid, [&](double th) { return steering_vector(geom, th); });

  EstimateResult r;
  Peaks peaks = pick_peaks(grid, spec, sources, grid_step);
  r.theta_hat = peaks.angles;
  r.theta_coarse = std::move(peaks.angles);
  r.peak_heights = std::move(peaks.heights);
  r.diagnostics.converged = static_cast<int>(r.theta_hat.size()) == sources;
  if (keep_spectrum) r.spectrum = Spectrum{grid, spec};
  return r;
}

Eigen::MatrixXcd smoothed_coarray_covariance(const CovarianceEstimate& cov, const DifferenceCoarray& coarray) {
  const int mc = coarray.contiguous_half_length;
  if (mc < 1) throw Error(ErrorKind::NoContiguousCoarray, "geometry has no contiguous coarray segment");
  const auto v = contiguous_virtual_signal(cov, coarray);
  const int nc = 2 * mc + 1;
  const int ms = nc / 2 + 1;
  const int windows = nc - ms + 1;
  Eigen::MatrixXcd rss = Eigen::MatrixXcd::Zero(ms, ms);
  Eigen::VectorXcd z(ms);
  for (int k = 0; k < windows; ++k) {
    for (int i = 0; i < ms; ++i) z(i) = v[static_cast<std::size_t>(k + i)];
    rss += z * z.adjoint();
  }
  return rss / static_cast<double>(windows);
}

EstimateResult coarray_music(const CovarianceEstimate& cov, const ArrayGeometry& geom, int sources,
                             double grid_step, bool keep_spectrum) {
  check_cov(cov, geom);
  if (sources < 1) throw Error(ErrorKind::InvalidArgument, "need at least one source");
  const DifferenceCoarray coarray = difference_coarray(geom);
  const int mc = coarray.contiguous_half_length;
  if (mc < 1) throw Error(ErrorKind::NoContiguousCoarray, "geometry has no contiguous coarray segment");
  const int ms = (2 * mc + 1) / 2 + 1;
  if (sources > ms - 1)
    throw Error(ErrorKind::TooManySources, "smoothed coarray supports at most " + std::to_string(ms - 1) +
                                               " sources");

  const Eigen::MatrixXcd rss = smoothed_coarray_covariance(cov, coarray);
  const Eigen::MatrixXcd en = noise_subspace(rss, sources);
  const auto grid = scan_grid(grid_step);
  const auto spec = pseudo_spectrum(en, grid, [&](double th) {
    Eigen::VectorXcd a(ms);
    for (int i = 0; i < ms; ++i) a(i) = std::polar(1.0, pi * i * std::sin(th));
    return a;
  });

  EstimateResult r;
  Peaks peaks = pick_peaks(grid, spec, sources, grid_step);
  r.theta_hat = peaks.angles;
  r.theta_coarse = std::move(peaks.angles);
  r.peak_heights = std::move(peaks.heights);
  r.diagnostics.contiguous_half_length = mc;
  r.diagnostics.subarray_size = ms;
  r.diagnostics.converged = static_cast<int>(r.theta_hat.size()) == sources;
  if (keep_spectrum) r.spectrum = Spectrum{grid, spec};
  return r;
}

double ml_objective(const CovarianceEstimate& cov, const ArrayGeometry& geom, std::span<const double> theta) {
  check_cov(cov, geom);
  std::vector<double> th(theta.begin(), theta.end());
  for (int attempt = 0; attempt < 3; ++attempt) {
    const Eigen::MatrixXcd a = steering_matrix(geom, th);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() == a.cols()) {
      const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(a.rows(), a.cols());
      return cov.r.trace().real() - (q.adjoint() * cov.r * q).trace().real();
    }
    for (std::size_t l = 0; l < th.size(); ++l) th[l] += kRankPerturbation * static_cast<double>(l + 1);
  }
  throw Error(ErrorKind::DegenerateConfiguration, "steering matrix stays rank deficient");
}

RefineResult local_ml_refine(const CovarianceEstimate& cov, const ArrayGeometry& geom,
                             std::vector<double> theta_coarse, double delta, int jitter_starts,
                             std::uint64_t jitter_seed) {
  check_cov(cov, geom);
  if (theta_coarse.empty()) throw Error(ErrorKind::InvalidArgument, "no coarse estimates");
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "box radius must be positive");
  const auto l = static_cast<Eigen::Index>(theta_coarse.size());
  std::sort(theta_coarse.begin(), theta_coarse.end());

  Eigen::VectorXd lower(l), upper(l), start(l);
  for (Eigen::Index i = 0; i < l; ++i) {
    const double c = std::clamp(theta_coarse[static_cast<std::size_t>(i)], -pi / 2 + kEdgeMargin,
                                pi / 2 - kEdgeMargin);
    start(i) = c;
    lower(i) = std::max(c - delta, -pi / 2 + kEdgeMargin);
    upper(i) = std::min(c + delta, pi / 2 - kEdgeMargin);
  }

  RefineResult out;
  bool degenerate = false;
  auto objective = [&](const Eigen::VectorXd& x) {
    try {
      return ml_objective(cov, geom, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateConfiguration) throw;
      degenerate = true;
      return std::numeric_limits<double>::infinity();
    }
  };
  out.objective_start = objective(start);

  // Lattice seed over the box, fine enough to land in the main lobe of the
  // full-aperture likelihood.
  const double lobe = geom.wavelength() / physical_span(geom);
  const double lat_step = std::min(delta / 4.0, lobe / 8.0);
  const int per_dim = static_cast<int>(std::ceil(2.0 * delta / lat_step)) + 1;
  Eigen::VectorXd seed = start;
  double seed_value = out.objective_start;
  auto coord = [&](Eigen::Index i, int k) {
    return std::min(upper(i), lower(i) + (upper(i) - lower(i)) * k / (per_dim - 1));
  };
  const double total = std::pow(static_cast<double>(per_dim), static_cast<double>(l));
  if (total <= static_cast<double>(kMaxLatticePoints)) {
    std::vector<int> idx(static_cast<std::size_t>(l), 0);
    Eigen::VectorXd x(l);
    while (true) {
      for (Eigen::Index i = 0; i < l; ++i) x(i) = coord(i, idx[static_cast<std::size_t>(i)]);
      const double v = objective(x);
      if (v < seed_value) {
        seed_value = v;
        seed = x;
      }
      std::size_t d = 0;
      while (d < idx.size() && ++idx[d] == per_dim) idx[d++] = 0;
      if (d == idx.size()) break;
    }
  } else {
    for (int sweep = 0; sweep < 3; ++sweep) {
      for (Eigen::Index i = 0; i < l; ++i) {
        Eigen::VectorXd x = seed;
        for (int k = 0; k < per_dim; ++k) {
          x(i) = coord(i, k);
          const double v = objective(x);
          if (v < seed_value) {
            seed_value = v;
            seed(i) = x(i);
          }
        }
      }
    }
  }

  std::vector<Eigen::VectorXd> starts{start, seed};
  Rng rng(jitter_seed);
  std::uniform_real_distribution<double> jitter(-0.25 * delta, 0.25 * delta);
  for (int s = 0; s < jitter_starts; ++s) {
    Eigen::VectorXd x = start;
    for (Eigen::Index i = 0; i < l; ++i) x(i) = std::clamp(x(i) + jitter(rng), lower(i), upper(i));
    starts.push_back(x);
  }

  BoxOptions opts;
  opts.fd_step = 1e-7;
  Eigen::VectorXd best = start;
  double best_value = out.objective_start;
  for (const auto& x0 : starts) {
    const BoxResult br = minimize_box(objective, {}, x0, lower, upper, opts);
    out.iterations += br.iterations;
    if (br.f < best_value) {
      best_value = br.f;
      best = br.x;
    }
  }
  out.theta.assign(best.data(), best.data() + best.size());
  std::sort(out.theta.begin(), out.theta.end());
  out.objective = best_value;
  out.converged = std::isfinite(best_value) && !(degenerate && best_value == out.objective_start);
  return out;
}

EstimateResult fas_music(const CovarianceEstimate& cov, const ArrayGeometry& geom, int sources,
                         const FasMusicConfig& config) {
  EstimateResult r = coarray_music(cov, geom, sources, config.grid_step, config.keep_spectrum);
  const double split = config.box_radius / 10.0;
  auto split_at = [&](std::vector<double> set, std::size_t i) {
    const double c = set[i];
    set[i] = c - 0.5 * split;
    set.push_back(c + 0.5 * split);
    std::sort(set.begin(), set.end());
    return set;
  };

  std::vector<std::vector<double>> hypotheses;
  std::vector<double> peaks = r.theta_coarse;
  std::vector<double> heights = r.peak_heights;
  if (peaks.empty()) {
    peaks.push_back(0.0);
    heights.push_back(1.0);
  }
  // Too few peaks: split the strongest until L estimates exist.
  while (static_cast<int>(peaks.size()) < sources) {
    const auto i = static_cast<std::size_t>(std::max_element(heights.begin(), heights.end()) - heights.begin());
    peaks = split_at(peaks, i);
    heights.insert(heights.begin() + static_cast<std::ptrdiff_t>(i), heights[i]);
  }
  hypotheses.push_back(peaks);
  if (sources >= 2 && static_cast<int>(r.theta_coarse.size()) == sources) {
    const auto weakest =
        static_cast<std::size_t>(std::min_element(heights.begin(), heights.end()) - heights.begin());
    for (std::size_t i = 0; i < peaks.size(); ++i) {
      if (i == weakest) continue;
      std::vector<double> reduced = peaks;
      reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(weakest));
      hypotheses.push_back(split_at(reduced, i < weakest ? i : i - 1));
    }
  }
  r.theta_coarse = hypotheses.front();

  RefineResult best;
  bool have = false;
  for (std::size_t h = 0; h < hypotheses.size(); ++h) {
    RefineResult ml =
        local_ml_refine(cov, geom, hypotheses[h], config.box_radius, config.jitter_starts, config.jitter_seed);
    r.diagnostics.ml_iterations += ml.iterations;
    if (h == 0) r.diagnostics.ml_objective_coarse = ml.objective_start;
    if (!have || ml.objective < best.objective) {
      best = std::move(ml);
      have = true;
    }
  }
  r.diagnostics.ml_objective_final = best.objective;
  r.diagnostics.converged = r.diagnostics.converged && best.converged;
  r.theta_hat = best.converged ? best.theta : r.theta_coarse;
  return r;
}

EstimateResult fas_music(const SnapshotData& data, int sources, const FasMusicConfig& config) {
  return fas_music(sample_covariance(data), data.geometry, sources, config);
}

AdaptiveResult adaptive_fas_music(const DataSource& source, int n, double aperture, double wavelength, int sources,
                                  int rounds, const AdaptiveConfig& config) {
  if (rounds < 0) throw Error(ErrorKind::InvalidArgument, "adaptation rounds must be >= 0");
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "need N >= 2");
  const double d0 = 0.5 * wavelength;
  if ((n - 1) * d0 > aperture)
    throw Error(ErrorKind::InvalidArgument, "region too short for the initial half-wavelength array");

  std::vector<double> p0;
  for (int i = 0; i < n; ++i) p0.push_back(i * d0);
  AdaptiveResult out{EstimateResult{}, ArrayGeometry(p0, wavelength, aperture), {}, 0};
  out.history.push_back(out.geometry);
  out.estimate = fas_music(source(out.geometry), sources, config.estimator);

  DesignConfig design_config = config.design;
  design_config.d_min = config.d_min_d0 * d0;
  const double min_sep = deg2rad(0.05);
  for (int k = 0; k < rounds; ++k) {
    std::vector<double> prior = out.estimate.theta_hat;
    std::sort(prior.begin(), prior.end());
    for (std::size_t i = 1; i < prior.size(); ++i) prior[i] = std::max(prior[i], prior[i - 1] + min_sep);
    for (double& t : prior) t = std::clamp(t, -pi / 2 + 1e-3, pi / 2 - 1e-3);
    try {
      const auto scenario = SourceScenario::equal_power(prior, config.snr_db, config.snapshots);
      const DesignResult design = design_positions(scenario, n, aperture, wavelength, design_config);
      EstimateResult next = fas_music(source(design.geometry), sources, config.estimator);
      out.geometry = design.geometry;
      out.estimate = std::move(next);
    } catch (const Error&) {
      ++out.design_failures;
      out.estimate = fas_music(source(out.geometry), sources, config.estimator);
    }
    out.history.push_back(out.geometry);
  }
  return out;
}

}  // namespace fasdoa
