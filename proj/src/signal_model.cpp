#include "fasdoa/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "fasdoa/error.hpp"
#include "fasdoa/rng.hpp"

namespace fasdoa {

using std::numbers::pi;

double deg2rad(double deg) { return deg * pi / 180.0; }
double rad2deg(double rad) { return rad * 180.0 / pi; }

void SourceScenario::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidArgument, m); };
  if (doas.empty()) fail("scenario needs at least one source");
  if (doas.size() != powers.size()) fail("doas and powers differ in length");
  for (std::size_t l = 0; l < doas.size(); ++l) {
    if (!(std::abs(doas[l]) < pi / 2)) fail("DOA outside (-pi/2, pi/2)");
    if (l > 0 && !(doas[l] > doas[l - 1])) fail("DOAs must be strictly increasing");
    if (!(powers[l] > 0.0) || !std::isfinite(powers[l])) fail("source powers must be positive");
  }
  if (!(noise_power >= 0.0) || !std::isfinite(noise_power)) fail("noise power must be >= 0");
  if (snapshots < 1) fail("snapshot count must be >= 1");
}

SourceScenario SourceScenario::equal_power(std::vector<double> doas_rad, double snr_db, int snapshots) {
  SourceScenario s;
  s.powers.assign(doas_rad.size(), 1.0);
  s.doas = std::move(doas_rad);
  s.noise_power = std::pow(10.0, -snr_db / 10.0);
  s.snapshots = snapshots;
  s.validate();
  return s;
}

Eigen::VectorXcd steering_vector(std::span<const double> positions, double wavelength, double theta) {
  const double k = 2.0 * pi / wavelength * std::sin(theta);
  Eigen::VectorXcd a(static_cast<Eigen::Index>(positions.size()));
  for (std::size_t n = 0; n < positions.size(); ++n) a(static_cast<Eigen::Index>(n)) = std::polar(1.0, k * positions[n]);
  return a;
}

Eigen::VectorXcd steering_vector(const ArrayGeometry& geom, double theta) {
  return steering_vector(geom.positions(), geom.wavelength(), theta);
}

Eigen::MatrixXcd steering_matrix(std::span<const double> positions, double wavelength,
                                 std::span<const double> doas) {
  Eigen::MatrixXcd a(static_cast<Eigen::Index>(positions.size()), static_cast<Eigen::Index>(doas.size()));
  for (std::size_t l = 0; l < doas.size(); ++l)
    a.col(static_cast<Eigen::Index>(l)) = steering_vector(positions, wavelength, doas[l]);
  return a;
}

Eigen::MatrixXcd steering_matrix(const ArrayGeometry& geom, std::span<const double> doas) {
  return steering_matrix(geom.positions(), geom.wavelength(), doas);
}

Eigen::MatrixXcd model_covariance(const ArrayGeometry& geom, const SourceScenario& scenario) {
  scenario.validate();
  const Eigen::MatrixXcd a = steering_matrix(geom, scenario.doas);
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(scenario.powers.data(),
                                                        static_cast<Eigen::Index>(scenario.powers.size()));
  Eigen::MatrixXcd r = a * p.cast<cd>().asDiagonal() * a.adjoint();
  r.diagonal().array() += scenario.noise_power;
  return r;
}

SnapshotData synthesize_snapshots(const ArrayGeometry& geom, const SourceScenario& scenario,
                                  std::uint64_t seed) {
  scenario.validate();
  const auto n = static_cast<Eigen::Index>(geom.size());
  const auto l = static_cast<Eigen::Index>(scenario.size());
  const auto np = static_cast<Eigen::Index>(scenario.snapshots);

  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd s(l, np);
  for (Eigen::Index t = 0; t < np; ++t)
    for (Eigen::Index i = 0; i < l; ++i) {
      const double scale = std::sqrt(scenario.powers[static_cast<std::size_t>(i)] / 2.0);
      const double re = gauss(rng);
      const double im = gauss(rng);
      s(i, t) = cd(scale * re, scale * im);
    }
  Eigen::MatrixXcd noise(n, np);
  const double nscale = std::sqrt(scenario.noise_power / 2.0);
  for (Eigen::Index t = 0; t < np; ++t)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      noise(i, t) = cd(nscale * re, nscale * im);
    }
  Eigen::MatrixXcd x = steering_matrix(geom, scenario.doas) * s + noise;
  return SnapshotData{std::move(x), geom, scenario, seed};
}

CovarianceEstimate sample_covariance(const Eigen::MatrixXcd& x) {
  if (x.cols() < 1) throw Error(ErrorKind::InvalidArgument, "need at least one snapshot");
  Eigen::MatrixXcd r = (x * x.adjoint()) / static_cast<double>(x.cols());
  // Exact Hermitian symmetry with a real diagonal.
  Eigen::MatrixXcd h = 0.5 * (r + r.adjoint());
  return CovarianceEstimate{std::move(h)};
}

CovarianceEstimate sample_covariance(const SnapshotData& data) { return sample_covariance(data.x); }

cd CoarrayObservation::at(double lag, double tol) const {
  auto it = std::lower_bound(lags.begin(), lags.end(), lag - tol);
  if (it == lags.end() || *it > lag + tol) throw Error(ErrorKind::InvalidArgument, "lag not in coarray");
  return values[static_cast<std::size_t>(it - lags.begin())];
}

namespace {

cd average_pairs(const Eigen::MatrixXcd& r, const std::vector<IndexPair>& pairs) {
  cd sum{0.0, 0.0};
  for (const auto& [i, j] : pairs) sum += r(i, j);
  return sum / static_cast<double>(pairs.size());
}

void check_dims(const CovarianceEstimate& cov, const DifferenceCoarray& coarray) {
  if (cov.r.rows() != cov.r.cols() || static_cast<std::size_t>(cov.r.rows()) != coarray.sensor_count)
    throw Error(ErrorKind::InvalidArgument, "covariance size does not match coarray sensor count");
}

}  // namespace

CoarrayObservation vectorize_covariance(const CovarianceEstimate& cov, const DifferenceCoarray& coarray) {
  check_dims(cov, coarray);
  const std::size_t count = coarray.lags.size();
  CoarrayObservation out{coarray.lags, std::vector<cd>(count)};
  // lags are symmetric: index k mirrors count-1-k. Fill the nonnegative half
  // and conjugate, which keeps value(-d) == conj(value(d)) exactly.
  const std::size_t zero = count / 2;
  out.values[zero] = cd(average_pairs(cov.r, coarray.redundancy[zero]).real(), 0.0);
  for (std::size_t k = zero + 1; k < count; ++k) {
    const cd v = average_pairs(cov.r, coarray.redundancy[k]);
    out.values[k] = v;
    out.values[count - 1 - k] = std::conj(v);
  }
  return out;
}

std::vector<cd> contiguous_virtual_signal(const CovarianceEstimate& cov,
                                          const DifferenceCoarray& coarray) {
  check_dims(cov, coarray);
  const int mc = coarray.contiguous_half_length;
  std::vector<cd> v(static_cast<std::size_t>(2 * mc + 1));
  for (int m = 0; m <= mc; ++m) {
    const int idx = coarray.find_grid_lag(m);
    cd val = average_pairs(cov.r, coarray.grid_redundancy[static_cast<std::size_t>(idx)]);
    if (m == 0) val = cd(val.real(), 0.0);
    v[static_cast<std::size_t>(mc + m)] = val;
    v[static_cast<std::size_t>(mc - m)] = std::conj(val);
  }
  return v;
}

ArrayGeometry apply_position_error(const ArrayGeometry& geom, double delta_p, std::uint64_t seed) {
  if (!(delta_p >= 0.0)) throw Error(ErrorKind::InvalidArgument, "position error must be >= 0");
  if (delta_p == 0.0) return geom;
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-0.5 * delta_p, 0.5 * delta_p);
  std::vector<double> p(geom.positions().begin(), geom.positions().end());
  for (double& x : p) x = std::clamp(x + u(rng), 0.0, geom.aperture());
  return geom.with_positions(std::move(p));
}

double position_error_gain_model(double delta_p, double theta, double wavelength) {
  const double x = pi * delta_p * std::sin(theta) / wavelength;
  if (std::abs(x) < 1e-12) return 1.0;
  const double s = std::sin(x) / x;
  return s * s;
}

cd beam_response(std::span<const double> nominal, std::span<const double> actual, double wavelength,
                 double theta) {
  if (nominal.size() != actual.size() || nominal.empty())
    throw Error(ErrorKind::InvalidArgument, "position lists differ in length");
  const Eigen::VectorXcd a0 = steering_vector(nominal, wavelength, theta);
  const Eigen::VectorXcd a1 = steering_vector(actual, wavelength, theta);
  return a0.dot(a1) / static_cast<double>(nominal.size());
}

}  // namespace fasdoa
