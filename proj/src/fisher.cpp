#include "fasdoa/fisher.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fasdoa/error.hpp"

namespace fasdoa {

using std::numbers::pi;

namespace {

void check_information_scenario(const SourceScenario& s) {
  if (s.doas.empty() || s.doas.size() != s.powers.size())
    throw Error(ErrorKind::InvalidArgument, "scenario needs matching doas and powers");
  if (!(s.noise_power > 0.0)) throw Error(ErrorKind::InvalidArgument, "Fisher information needs noise power > 0");
  if (s.snapshots < 1) throw Error(ErrorKind::InvalidArgument, "snapshot count must be >= 1");
  for (std::size_t l = 0; l < s.size(); ++l) {
    if (!(std::abs(s.doas[l]) < pi / 2)) throw Error(ErrorKind::InvalidArgument, "DOA outside (-pi/2, pi/2)");
    if (!(s.powers[l] > 0.0)) throw Error(ErrorKind::InvalidArgument, "source powers must be positive");
  }
}

// Re{H .* R_s^T} for diagonal R_s.
Eigen::MatrixXd hadamard_source_powers(const Eigen::MatrixXcd& h, const std::vector<double>& powers) {
  const auto l = h.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(l, l);
  for (Eigen::Index i = 0; i < l; ++i) out(i, i) = h(i, i).real() * powers[static_cast<std::size_t>(i)];
  return out;
}

Eigen::MatrixXcd pseudo_inverse(const Eigen::MatrixXcd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cutoff = 1e-12 * std::max(ev.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  Eigen::VectorXd inv(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) inv(i) = ev(i) > cutoff ? 1.0 / ev(i) : 0.0;
  return es.eigenvectors() * inv.cast<std::complex<double>>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double FisherInfo::log_det() const {
  Eigen::LLT<Eigen::MatrixXd> llt(f);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

FisherInfo fim_exact(std::span<const double> positions, double wavelength, const SourceScenario& scenario) {
  check_information_scenario(scenario);
  const auto n = static_cast<Eigen::Index>(positions.size());
  const auto l = static_cast<Eigen::Index>(scenario.size());
  if (l >= n)
    throw Error(ErrorKind::DegenerateConfiguration, "need fewer sources than elements for the projection");

  const double k = 2.0 * pi / wavelength;
  const Eigen::MatrixXcd a = steering_matrix(positions, wavelength, scenario.doas);
  Eigen::MatrixXcd d(n, l);
  for (Eigen::Index j = 0; j < l; ++j) {
    const double kc = k * std::cos(scenario.doas[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < n; ++i)
      d(i, j) = std::complex<double>(0.0, kc * positions[static_cast<std::size_t>(i)]) * a(i, j);
  }

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  const auto& sv = svd.singularValues();
  if (!(sv(l - 1) > 0.0) || sv(0) / sv(l - 1) > std::sqrt(kSingularCondition))
    throw Error(ErrorKind::DegenerateConfiguration, "steering matrix is rank deficient");

  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, l);
  const Eigen::MatrixXcd pd = d - q * (q.adjoint() * d);
  const Eigen::MatrixXcd h = pd.adjoint() * pd;

  const double scale = 2.0 * scenario.snapshots / scenario.noise_power;
  return FisherInfo{scale * hadamard_source_powers(h, scenario.powers)};
}

FisherInfo fim_exact(const ArrayGeometry& geom, const SourceScenario& scenario) {
  return fim_exact(geom.positions(), geom.wavelength(), scenario);
}

double fim_single_source(const ArrayGeometry& geom, const SourceScenario& scenario) {
  check_information_scenario(scenario);
  if (scenario.size() != 1) throw Error(ErrorKind::InvalidArgument, "single-source FIM needs L = 1");
  const double mu2 = position_moments(geom, 2)[0];
  const double c = std::cos(scenario.doas[0]);
  const double lambda = geom.wavelength();
  return (2.0 * scenario.snapshots * scenario.powers[0] / scenario.noise_power) *
         (4.0 * pi * pi * c * c / (lambda * lambda)) * static_cast<double>(geom.size()) * mu2;
}

std::vector<double> crb(const FisherInfo& info) {
  const auto& f = info.f;
  if (f.rows() == 0 || f.rows() != f.cols()) throw Error(ErrorKind::InvalidArgument, "FIM must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (f + f.transpose()));
  const auto& ev = es.eigenvalues();
  if (!(ev(0) > 0.0) || ev(ev.size() - 1) / ev(0) > kSingularCondition)
    throw Error(ErrorKind::UnidentifiableConfiguration, "Fisher information is singular");
  const Eigen::MatrixXd inv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  std::vector<double> out(static_cast<std::size_t>(inv.rows()));
  for (Eigen::Index i = 0; i < inv.rows(); ++i) out[static_cast<std::size_t>(i)] = inv(i, i);
  return out;
}

MeasureInformation::MeasureInformation(const DesignMeasure& xi, const SourceScenario& scenario,
                                       double wavelength)
    : doas_(scenario.doas), powers_(scenario.powers), k_(2.0 * pi / wavelength) {
  check_information_scenario(scenario);
  if (xi.atoms.empty()) throw Error(ErrorKind::InvalidArgument, "empty design measure");
  if (std::abs(xi.total_weight() - 1.0) > 1e-8)
    throw Error(ErrorKind::InvalidArgument, "design measure is not normalized");
  const auto l = static_cast<Eigen::Index>(doas_.size());
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(l, l);
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(l, l);
  Eigen::MatrixXcd kk = Eigen::MatrixXcd::Zero(l, l);
  Eigen::VectorXcd alpha(l), delta(l);
  for (const auto& atom : xi.atoms) {
    for (Eigen::Index j = 0; j < l; ++j) {
      const double th = doas_[static_cast<std::size_t>(j)];
      alpha(j) = std::polar(1.0, -k_ * atom.position * std::sin(th));
      delta(j) = std::complex<double>(0.0, -k_ * std::cos(th) * atom.position) * alpha(j);
    }
    g += atom.weight * alpha * alpha.adjoint();
    c += atom.weight * delta * alpha.adjoint();
    kk += atom.weight * delta * delta.adjoint();
  }
  c_ginv_ = c * pseudo_inverse(g);
  const Eigen::MatrixXcd s = kk - c_ginv_ * c.adjoint();
  unit_info_ = hadamard_source_powers(s, powers_);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(unit_info_);
  const auto& ev = es.eigenvalues();
  singular_ = !(ev(0) > 0.0) || ev(ev.size() - 1) / ev(0) > kSingularCondition;
  if (!singular_)
    unit_info_inv_ = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

Eigen::VectorXcd MeasureInformation::residual(double p) const {
  const auto l = static_cast<Eigen::Index>(doas_.size());
  Eigen::VectorXcd alpha(l), delta(l);
  for (Eigen::Index j = 0; j < l; ++j) {
    const double th = doas_[static_cast<std::size_t>(j)];
    alpha(j) = std::polar(1.0, -k_ * p * std::sin(th));
    delta(j) = std::complex<double>(0.0, -k_ * std::cos(th) * p) * alpha(j);
  }
  return delta - c_ginv_ * alpha;
}

double MeasureInformation::directional_derivative(double p) const {
  if (singular_) throw Error(ErrorKind::DegenerateConfiguration, "measure information is singular");
  const Eigen::VectorXcd w = residual(p);
  const Eigen::MatrixXd info = hadamard_source_powers(w * w.adjoint(), powers_);
  return (unit_info_inv_ * info).trace();
}

FisherInfo fim_measure(const DesignMeasure& xi, const SourceScenario& scenario, int n_elements,
                       double wavelength) {
  const MeasureInformation mi(xi, scenario, wavelength);
  const double scale = n_elements * 2.0 * scenario.snapshots / scenario.noise_power;
  return FisherInfo{scale * mi.unit_information()};
}

double directional_derivative(const DesignMeasure& xi, double p, const SourceScenario& scenario,
                              double wavelength) {
  return MeasureInformation(xi, scenario, wavelength).directional_derivative(p);
}

}  // namespace fasdoa
