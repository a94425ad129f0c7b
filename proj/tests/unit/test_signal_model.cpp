#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "fasdoa/geometry.hpp"
#include "fasdoa/rng.hpp"
#include "fasdoa/signal_model.hpp"

using namespace fasdoa;

namespace {

constexpr double kPi = std::numbers::pi;

ArrayGeometry fas6() {
  std::vector<double> p;
  for (int m : {0, 3, 8, 32, 37, 40}) p.push_back(0.5 * m);
  return ArrayGeometry(p, 1.0, 20.0);
}

}  // namespace

TEST_CASE("steering vector phases") {
  auto g = fas6();
  auto a0 = steering_vector(g, 0.0);
  for (Eigen::Index i = 0; i < a0.size(); ++i) CHECK(std::abs(a0(i) - cd(1.0, 0.0)) < 1e-15);

  ArrayGeometry two({0.0, 1.0}, 1.0, 1.0);
  auto a = steering_vector(two, deg2rad(30.0));
  CHECK(std::abs(a(0) - cd(1.0, 0.0)) < 1e-12);
  CHECK(std::abs(a(1) - cd(-1.0, 0.0)) < 1e-12);

  auto ula = make_ula(4, 0.5);
  auto edge = steering_vector(ula, kPi / 2 - 1e-9);
  CHECK(std::abs(std::arg(edge(1) / edge(0)) - kPi) < 1e-6);
}

TEST_CASE("steering matrix columns are steering vectors with unit modulus") {
  auto g = fas6();
  std::vector<double> doas{deg2rad(10.0), deg2rad(25.0)};
  auto a = steering_matrix(g, doas);
  CHECK(a.rows() == 6);
  CHECK(a.cols() == 2);
  for (int l = 0; l < 2; ++l) {
    CHECK((a.col(l) - steering_vector(g, doas[l])).norm() < 1e-15);
    for (Eigen::Index n = 0; n < 6; ++n) CHECK(std::abs(std::abs(a(n, l)) - 1.0) < 1e-14);
  }
}

TEST_CASE("snapshot synthesis is deterministic for a fixed seed") {
  auto g = fas6();
  auto s = SourceScenario::equal_power({deg2rad(10.0), deg2rad(25.0)}, 10.0, 50);
  auto x1 = synthesize_snapshots(g, s, 42).x;
  auto x2 = synthesize_snapshots(g, s, 42).x;
  auto x3 = synthesize_snapshots(g, s, 43).x;
  CHECK(x1 == x2);
  CHECK(x1 != x3);
  CHECK(x1.rows() == 6);
  CHECK(x1.cols() == 50);
}

TEST_CASE("power accounting over seeds") {
  auto g = fas6();
  auto s = SourceScenario::equal_power({deg2rad(10.0), deg2rad(25.0)}, 3.0, 40);
  const double expected = 2.0 + s.noise_power;
  std::vector<double> v;
  for (int seed = 0; seed < 100; ++seed) {
    auto x = synthesize_snapshots(g, s, derive_seed(9, seed)).x;
    v.push_back(x.squaredNorm() / (6.0 * 40.0));
  }
  double mean = 0.0;
  for (double e : v) mean += e;
  mean /= v.size();
  double var = 0.0;
  for (double e : v) var += (e - mean) * (e - mean);
  const double stderr_mean = std::sqrt(var / (v.size() - 1) / v.size());
  CHECK(std::abs(mean - expected) < 3.0 * stderr_mean + 1e-12);
}

TEST_CASE("sample covariance basics") {
  Eigen::MatrixXcd x(3, 1);
  x << cd(1, 2), cd(0, -1), cd(3, 0);
  auto r = sample_covariance(x).r;
  CHECK((r - x * x.adjoint()).norm() < 1e-15);

  auto g = fas6();
  auto s = SourceScenario::equal_power({deg2rad(20.0)}, 10.0, 4);
  s.noise_power = 0.0;
  auto rn = sample_covariance(synthesize_snapshots(g, s, 1)).r;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rn);
  auto ev = es.eigenvalues();
  CHECK(ev(4) < 1e-10 * ev(5));
  CHECK(ev(5) > 0.0);
}

TEST_CASE("sample covariance is Hermitian PSD and concentrates") {
  auto g = fas6();
  auto s = SourceScenario::equal_power({deg2rad(10.0), deg2rad(25.0)}, 10.0, 500);
  auto truth = model_covariance(g, s);
  for (int seed = 0; seed < 10; ++seed) {
    auto r = sample_covariance(synthesize_snapshots(g, s, derive_seed(3, seed))).r;
    CHECK((r - r.adjoint()).norm() <= 1e-12 * r.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9 * r.trace().real());
    CHECK((r - truth).norm() / truth.norm() < 3.0 / std::sqrt(500.0));
  }
}

TEST_CASE("coarray observation") {
  auto g = fas6();
  auto coarray = difference_coarray(g);
  auto s = SourceScenario::equal_power({deg2rad(20.0)}, 0.0, 3);
  s.noise_power = 0.0;
  auto cov = sample_covariance(synthesize_snapshots(g, s, 5));
  auto z = vectorize_covariance(cov, coarray);
  REQUIRE(z.lags.size() == coarray.lags.size());
  const double tol = 1e-9;
  CHECK(std::abs(z.at(0.0, tol) - cov.r.trace() / 6.0) < 1e-12);
  for (std::size_t k = 0; k < z.lags.size(); ++k) {
    CHECK(z.at(-z.lags[k], tol) == std::conj(z.values[k]));
  }
  // Noiseless single source: each lag carries P e^{j 2 pi d sin(theta)} scaled by
  // the realized source power, identical across lags.
  const cd p0 = z.at(0.0, tol);
  for (std::size_t k = 0; k < z.lags.size(); ++k) {
    cd model = p0 * std::exp(cd(0.0, 2.0 * kPi * z.lags[k] * std::sin(deg2rad(20.0))));
    CHECK(std::abs(z.values[k] - model) < 1e-9);
  }
  CHECK_THROWS(vectorize_covariance(sample_covariance(Eigen::MatrixXcd::Ones(3, 2)), coarray));
}

TEST_CASE("redundancy averaging reduces variance") {
  auto ula = make_ula(5, 0.5);
  auto coarray = difference_coarray(ula);
  auto s = SourceScenario::equal_power({deg2rad(15.0)}, -40.0, 20);
  const int lag_index = coarray.find_lag(0.5, 1e-9);
  REQUIRE(lag_index >= 0);
  const double m = static_cast<double>(coarray.redundancy[lag_index].size());
  REQUIRE(m == 4.0);
  std::vector<cd> averaged, single;
  for (int seed = 0; seed < 400; ++seed) {
    auto cov = sample_covariance(synthesize_snapshots(ula, s, derive_seed(21, seed)));
    averaged.push_back(vectorize_covariance(cov, coarray).values[lag_index]);
    single.push_back(cov.r(1, 0));
  }
  auto variance = [](const std::vector<cd>& v) {
    cd mean = 0.0;
    for (auto e : v) mean += e;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (auto e : v) acc += std::norm(e - mean);
    return acc / (v.size() - 1);
  };
  const double va = variance(averaged);
  const double vs = variance(single);
  const double stderr_ratio = std::sqrt(2.0 / (single.size() - 1));
  CHECK(va / vs <= 1.0 / m + 5.0 * stderr_ratio);
}

TEST_CASE("position error model") {
  auto g = fas6();
  auto same = apply_position_error(g, 0.0, 1);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(same.position(i) == g.position(i));
  auto moved = apply_position_error(g, 0.1, 2);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(moved.position(i) - g.position(i)) <= 0.05 + 1e-15);
    CHECK(moved.position(i) >= 0.0);
    CHECK(moved.position(i) <= g.aperture());
  }
  const double loss_db = -10.0 * std::log10(position_error_gain_model(1.0 / 8.0, kPi / 2, 1.0));
  CHECK(loss_db <= 1.0);
  CHECK(position_error_gain_model(0.0, 0.3, 1.0) == doctest::Approx(1.0));
}
