#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "fasdoa/error.hpp"
#include "fasdoa/estimation.hpp"
#include "fasdoa/geometry.hpp"
#include "fasdoa/signal_model.hpp"

using namespace fasdoa;

namespace {

constexpr double kPi = std::numbers::pi;

CovarianceEstimate exact_cov(const ArrayGeometry& g, const SourceScenario& s) { return {model_covariance(g, s)}; }

SourceScenario noiseless(std::vector<double> doas_deg) {
  std::vector<double> rad;
  for (double d : doas_deg) rad.push_back(deg2rad(d));
  auto s = SourceScenario::equal_power(rad, 0.0, 100);
  s.noise_power = 0.0;
  return s;
}

}  // namespace

TEST_CASE("MUSIC on a noiseless ULA") {
  auto ula = make_ula(6, 0.5);
  auto s = noiseless({10.0});
  s.noise_power = 1e-6;
  auto r = music_estimate(exact_cov(ula, s), ula, 1);
  REQUIRE(r.theta_hat.size() == 1);
  CHECK(std::abs(rad2deg(r.theta_hat[0]) - 10.0) <= kDefaultGridStep * 180.0 / kPi / 2.0);
  CHECK_THROWS_AS(music_estimate(exact_cov(ula, s), ula, 6), Error);
}

TEST_CASE("coarray MUSIC resolves more sources than elements") {
  auto nested = make_nested(3, 3, 0.5);
  std::vector<double> doas;
  for (int i = 0; i < 8; ++i) doas.push_back(-60.0 + 120.0 * (i + 0.5) / 8.0);
  auto s = noiseless(doas);
  auto r = coarray_music(exact_cov(nested, s), nested, 8);
  REQUIRE(r.theta_hat.size() == 8);
  for (int i = 0; i < 8; ++i) CHECK(std::abs(rad2deg(r.theta_hat[i]) - doas[i]) < 0.5);
  CHECK(r.diagnostics.contiguous_half_length == 11);
  CHECK(r.diagnostics.subarray_size == 12);
  CHECK_THROWS_AS(music_estimate(exact_cov(nested, s), nested, 8), Error);
  CHECK_THROWS_AS(coarray_music(exact_cov(nested, noiseless({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11})), nested, 12),
                  Error);
}

TEST_CASE("coarray MUSIC needs a contiguous segment") {
  ArrayGeometry sparse({0.0, 1.7, 4.3}, 1.0, 5.0);
  REQUIRE(difference_coarray(sparse).contiguous_half_length == 0);
  auto s = noiseless({10.0});
  s.noise_power = 1.0;
  CHECK_THROWS_AS(coarray_music(exact_cov(sparse, s), sparse, 1), Error);
}

TEST_CASE("spatial smoothing restores the source rank") {
  auto nested = make_nested(3, 3, 0.5);
  auto coarray = difference_coarray(nested);
  for (int l : {1, 3, 6, 11}) {
    std::vector<double> doas;
    for (int i = 0; i < l; ++i) doas.push_back(-70.0 + 140.0 * (i + 0.5) / l);
    auto rss = smoothed_coarray_covariance(exact_cov(nested, noiseless(doas)), coarray);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rss);
    Eigen::VectorXd ev = es.eigenvalues().reverse();
    const double tail = std::max(std::abs(ev(l)), 1e-300);
    CHECK(ev(l - 1) / tail > 1e6);
  }
}

TEST_CASE("single noiseless source yields one virtual peak above half maximum") {
  auto nested = make_nested(3, 3, 0.5);
  auto s = noiseless({25.0});
  s.noise_power = 0.01;
  auto r = coarray_music(exact_cov(nested, s), nested, 1, kDefaultGridStep, true);
  REQUIRE(r.spectrum.has_value());
  const auto& v = r.spectrum->values;
  const double half = 0.5 * *std::max_element(v.begin(), v.end());
  int peaks = 0;
  for (std::size_t i = 1; i + 1 < v.size(); ++i)
    if (v[i] > half && v[i] >= v[i - 1] && v[i] > v[i + 1]) ++peaks;
  CHECK(peaks == 1);
}

TEST_CASE("ML objective and refinement on noiseless data") {
  std::vector<double> p;
  for (int m : {0, 3, 8, 32, 37, 40}) p.push_back(0.5 * m);
  ArrayGeometry g(p, 1.0, 20.0);
  auto s = noiseless({10.0, 25.0});
  auto cov = exact_cov(g, s);
  std::vector<double> truth{deg2rad(10.0), deg2rad(25.0)};
  CHECK(std::abs(ml_objective(cov, g, truth)) < 1e-9);

  auto r = local_ml_refine(cov, g, {deg2rad(10.2), deg2rad(24.9)}, deg2rad(5.0));
  REQUIRE(r.theta.size() == 2);
  CHECK(std::abs(r.theta[0] - truth[0]) < 1e-6);
  CHECK(std::abs(r.theta[1] - truth[1]) < 1e-6);
  CHECK(r.objective <= r.objective_start);
}

TEST_CASE("ML objective with noise equals the noise floor") {
  auto ula = make_ula(6, 0.5);
  auto s = SourceScenario::equal_power({deg2rad(-5.0), deg2rad(30.0)}, 10.0, 100);
  s.noise_power = 0.5;
  std::vector<double> truth{deg2rad(-5.0), deg2rad(30.0)};
  CHECK(ml_objective(exact_cov(ula, s), ula, truth) == doctest::Approx(0.5 * 4));
}

TEST_CASE("refinement stays inside its box") {
  auto ula = make_ula(4, 0.5);
  auto s = noiseless({20.0});
  s.noise_power = 0.01;
  const double delta = deg2rad(5.0);
  auto r = local_ml_refine(exact_cov(ula, s), ula, {deg2rad(8.0)}, delta);
  CHECK(r.theta[0] <= deg2rad(8.0) + delta + 1e-12);
  CHECK(r.theta[0] >= deg2rad(8.0) + delta - deg2rad(0.05));
  CHECK(r.converged);
  CHECK(r.objective > 0.1);
}

TEST_CASE("refinement recovers from a three degree offset") {
  auto nested = make_nested(3, 3, 0.5);
  auto s = SourceScenario::equal_power({deg2rad(-20.0), deg2rad(15.0)}, 15.0, 500);
  auto data = synthesize_snapshots(nested, s, 77);
  auto cov = sample_covariance(data);
  auto r = local_ml_refine(cov, nested, {deg2rad(-17.0), deg2rad(12.0)}, deg2rad(5.0));
  CHECK(std::abs(rad2deg(r.theta[0]) + 20.0) < 0.2);
  CHECK(std::abs(rad2deg(r.theta[1]) - 15.0) < 0.2);
}

TEST_CASE("refinement never increases the objective") {
  auto g = make_nested(3, 3, 0.5);
  auto s = SourceScenario::equal_power({deg2rad(10.0), deg2rad(25.0)}, 0.0, 100);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto cov = sample_covariance(synthesize_snapshots(g, s, seed));
    auto r = fas_music(cov, g, 2);
    CHECK(r.diagnostics.ml_objective_final <= r.diagnostics.ml_objective_coarse + 1e-12);
    CHECK(std::is_sorted(r.theta_hat.begin(), r.theta_hat.end()));
    CHECK(r.theta_hat.size() == 2);
  }
}

TEST_CASE("FAS-MUSIC on noiseless data is exact") {
  auto nested = make_nested(3, 3, 0.5);
  auto s = noiseless({-12.0, 33.0});
  auto r = fas_music(exact_cov(nested, s), nested, 2);
  CHECK(std::abs(rad2deg(r.theta_hat[0]) + 12.0) < 1e-5);
  CHECK(std::abs(rad2deg(r.theta_hat[1]) - 33.0) < 1e-5);
}

TEST_CASE("adaptive loop with zero rounds is plain FAS-MUSIC") {
  auto s = SourceScenario::equal_power({deg2rad(10.0), deg2rad(25.0)}, 10.0, 200);
  DataSource source = [&](const ArrayGeometry& g) { return synthesize_snapshots(g, s, 99); };
  auto r = adaptive_fas_music(source, 6, 20.0, 1.0, 2, 0);
  CHECK(r.history.size() == 1);
  auto direct = fas_music(source(r.geometry), 2);
  CHECK(r.estimate.theta_hat == direct.theta_hat);
  CHECK_THROWS_AS(adaptive_fas_music(source, 6, 2.0, 1.0, 2, 0), Error);
}
