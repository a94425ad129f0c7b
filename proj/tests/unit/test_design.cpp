#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fasdoa/design.hpp"
#include "fasdoa/error.hpp"
#include "fasdoa/fisher.hpp"
#include "fasdoa/geometry.hpp"
#include "fasdoa/signal_model.hpp"

using namespace fasdoa;

namespace {

constexpr double kD0 = 0.5;

double mu2(const std::vector<double>& p) { return position_moments(p, 2)[0]; }

bool spaced(const std::vector<double>& p, double d_min, double aperture) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || p[i] > aperture) return false;
    if (i > 0 && p[i] - p[i - 1] < d_min * (1.0 - 1e-9)) return false;
  }
  return true;
}

int dof(const std::vector<double>& p, double aperture) {
  return coarray_dof(difference_coarray(ArrayGeometry(p, 1.0, aperture)));
}

}  // namespace

TEST_CASE("single-source closed form") {
  const double d = 40 * kD0;
  auto p6 = single_source_optimal(6, d);
  CHECK(p6 == std::vector<double>{0, 0, 0, d, d, d});
  CHECK(mu2(p6) == doctest::Approx(400 * kD0 * kD0));
  CHECK(single_source_optimal(2, 3.0) == std::vector<double>{0.0, 3.0});
  auto p5 = single_source_optimal(5, 1.0);
  CHECK(p5 == std::vector<double>{0.0, 0.0, 0.5, 1.0, 1.0});
  CHECK(mu2(p5) == doctest::Approx(0.2));
}

TEST_CASE("Frank-Wolfe concentrates on the endpoints for one source") {
  const double d = 20 * kD0;
  auto s = SourceScenario::equal_power({deg2rad(20.0)}, 10.0, 100);
  DesignConfig cfg;
  FrankWolfeLog log;
  auto xi = frank_wolfe_design(s, 6, d, 1.0, cfg, &log);
  double end_weight = 0.0;
  for (const auto& a : xi.atoms)
    if (a.position <= 0.01 * d || a.position >= 0.99 * d) end_weight += a.weight;
  CHECK(end_weight >= 0.98);
  for (const auto& it : log) {
    CHECK(it.min_weight >= 0.0);
    CHECK(std::abs(it.total_weight - 1.0) < 1e-10);
    CHECK(std::abs(it.trace_identity - 1.0) < 1e-8);
    CHECK(it.phi_max >= 0.0);
  }
  CHECK(xi.kw_gap <= cfg.epsilon);
}

TEST_CASE("loose tolerance stops at the first iteration") {
  auto s = SourceScenario::equal_power({deg2rad(10.0), deg2rad(25.0)}, 10.0, 100);
  DesignConfig cfg;
  cfg.epsilon = 10.0;
  auto xi = frank_wolfe_design(s, 6, 20.0, 1.0, cfg);
  CHECK(xi.iterations_used == 1);
  CHECK(xi.atoms.size() >= 32);
}

TEST_CASE("KW certificate survives a finer grid") {
  auto s = SourceScenario::equal_power({deg2rad(10.0), deg2rad(25.0)}, 10.0, 100);
  const double d = 8 * kD0;
  DesignConfig cfg;
  cfg.epsilon = 1e-2;
  auto xi = frank_wolfe_design(s, 6, d, 1.0, cfg);
  REQUIRE(xi.kw_gap <= cfg.epsilon);
  const double coarse = kD0 / 50.0;
  const double fine = coarse / 10.0;
  const int npts = static_cast<int>(std::ceil(d / fine)) + 1;
  std::vector<double> phi;
  for (int i = 0; i < npts; ++i) phi.push_back(directional_derivative(xi, std::min(i * fine, d), s, 1.0));
  double lipschitz = 0.0;
  for (std::size_t i = 1; i < phi.size(); ++i) lipschitz = std::max(lipschitz, std::abs(phi[i] - phi[i - 1]) / fine);
  const double sup = *std::max_element(phi.begin(), phi.end());
  CHECK(sup <= 2.0 + cfg.epsilon + lipschitz * coarse);
  CHECK(*std::min_element(phi.begin(), phi.end()) >= 0.0);
}

TEST_CASE("two-source design mixes endpoints and interior atoms") {
  auto s = SourceScenario::equal_power({deg2rad(10.0), deg2rad(25.0)}, 10.0, 500);
  const double d = 30 * kD0;
  DesignConfig cfg;
  cfg.t_max = 800;
  auto xi = frank_wolfe_design(s, 8, d, 1.0, cfg);
  double ends = 0.0, interior = 0.0;
  for (const auto& a : xi.atoms) {
    if (a.position <= 0.05 * d || a.position >= 0.95 * d)
      ends += a.weight;
    else
      interior += a.weight;
  }
  CHECK(ends > 0.3);
  CHECK(interior > 0.05);
}

TEST_CASE("support extraction") {
  const double d = 40 * kD0;
  DesignMeasure two{{{0.0, 0.5}, {d, 0.5}}};
  auto p = extract_positions(two, 6, 0.4 * kD0, d, kD0);
  REQUIRE(p.size() == 6);
  CHECK(spaced(p, 0.4 * kD0, d));
  CHECK(std::count_if(p.begin(), p.end(), [&](double x) { return x < 2 * kD0; }) == 3);
  CHECK(std::count_if(p.begin(), p.end(), [&](double x) { return x > d - 2 * kD0; }) == 3);

  DesignMeasure single{{{5.0, 1.0}}};
  auto q = extract_positions(single, 2, 0.2, 10.0, kD0);
  CHECK(q[0] == doctest::Approx(4.9));
  CHECK(q[1] == doctest::Approx(5.1));

  CHECK_THROWS_AS(extract_positions(two, 6, 0.4 * kD0, 2 * kD0, kD0), Error);

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    DesignMeasure xi;
    int atoms = 1 + static_cast<int>(rng() % 8);
    for (int a = 0; a < atoms; ++a) xi.atoms.push_back({d * u(rng), u(rng) + 0.01});
    xi.normalize();
    auto out = extract_positions(xi, 6, 0.4 * kD0, d, kD0);
    CHECK(out.size() == 6);
    CHECK(spaced(out, 0.4 * kD0, d));
  }
}

TEST_CASE("spacing penalty and gradient") {
  std::vector<double> wide{0.0, 1.0, 2.5};
  CHECK(spacing_penalty(wide, 0.2) == 0.0);
  std::vector<double> coincident{1.0, 1.0, 3.0};
  CHECK(1e8 * spacing_penalty(coincident, 0.4 * kD0) == doctest::Approx(1e8 * std::pow(0.4 * kD0, 2)));

  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p;
    for (int i = 0; i < 6; ++i) p.push_back(u(rng));
    auto g = spacing_penalty_gradient(p, 0.3);
    const double h = 1e-7;
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto hi = p, lo = p;
      hi[i] += h;
      lo[i] -= h;
      const double fd = (spacing_penalty(hi, 0.3) - spacing_penalty(lo, 0.3)) / (2 * h);
      CHECK(std::abs(fd - g[i]) <= 1e-6 * std::max(1.0, std::abs(g[i])));
    }
  }
}

TEST_CASE("spacing projection") {
  auto p = enforce_spacing({0.0, 0.0, 0.0, 5.0, 5.0, 5.0}, 0.2, 5.0);
  CHECK(spaced(p, 0.2, 5.0));
  auto same = enforce_spacing({0.0, 1.0, 2.0}, 0.5, 2.0);
  CHECK(same == std::vector<double>{0.0, 1.0, 2.0});
  CHECK_THROWS_AS(enforce_spacing({0.0, 0.1, 0.2, 0.3}, 1.0, 2.0), Error);
}

TEST_CASE("penalized objective") {
  auto s = SourceScenario::equal_power({deg2rad(10.0), deg2rad(25.0)}, 10.0, 500);
  std::vector<double> p{0.0, 1.5, 4.0, 16.0, 18.5, 20.0};
  CHECK(spacing_penalized_objective(p, 1.0, s, 0.2, 1e8) == doctest::Approx(fim_exact(p, 1.0, s).log_det()));
}

TEST_CASE("coarray refinement") {
  auto s = SourceScenario::equal_power({deg2rad(10.0), deg2rad(25.0)}, 10.0, 500);
  std::vector<double> mra;
  for (int m : mra_table_entry(6)) mra.push_back(kD0 * m);
  auto fixed = coarray_refine(mra, 1.0, 13 * kD0, s, 0.0, 0.4 * kD0);
  CHECK(fixed == mra);

  std::vector<double> fas;
  for (int m : {0, 3, 8, 32, 37, 40}) fas.push_back(kD0 * m);
  const double d = 40 * kD0;
  for (double mu : {0.0, 0.1, 10.0}) {
    auto out = coarray_refine(fas, 1.0, d, s, mu, 0.4 * kD0);
    CHECK(dof(out, d) >= dof(fas, d));
    CHECK(coarray_objective(out, 1.0, d, s, mu) >= coarray_objective(fas, 1.0, d, s, mu) - 1e-12);
    CHECK(spaced(out, 0.4 * kD0, d));
  }
}

TEST_CASE("DOF loss from spacing") {
  CHECK(dof_loss_from_spacing(6, 10 * kD0, kD0, 0.0, 16).delta == 0);
  CHECK(dof_loss_from_spacing(6, 10 * kD0, kD0, 0.4 * kD0, 16).delta == 0);
  auto big = dof_loss_from_spacing(6, 10 * kD0, kD0, 3 * kD0, 16);
  CHECK(big.delta > 0);
  CHECK(big.seeds == 16);
}

TEST_CASE("single-source design recovers the second moment") {
  for (int n : {4, 5, 6}) {
    const double d = 20 * kD0;
    auto s = SourceScenario::equal_power({deg2rad(15.0)}, 10.0, 100);
    DesignConfig cfg;
    auto r = design_positions(s, n, d, 1.0, cfg);
    std::vector<double> p(r.geometry.positions().begin(), r.geometry.positions().end());
    const double target = (d * d / 4.0) * (1.0 - (n % 2 ? 1.0 / (n * n) : 0.0));
    CHECK(mu2(p) >= 0.95 * target);
    CHECK(spaced(p, cfg.d_min, d));
  }
}

TEST_CASE("invalid design configurations") {
  DesignConfig bad;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  DesignConfig neg;
  neg.d_min = -1.0;
  CHECK_THROWS_AS(neg.validate(), Error);
}
