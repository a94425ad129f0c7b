#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "fasdoa/error.hpp"
#include "fasdoa/geometry.hpp"

using namespace fasdoa;

namespace {

// Independent oracle: enumerate every pairwise difference on the integer grid.
int brute_dof(const std::vector<int>& marks) {
  std::set<int> lags;
  for (int a : marks)
    for (int b : marks) lags.insert(a - b);
  int m = 0;
  while (lags.count(m + 1) && lags.count(-(m + 1))) ++m;
  return 2 * m + 1;
}

ArrayGeometry from_marks(const std::vector<int>& marks, double aperture_d0) {
  std::vector<double> p;
  for (int m : marks) p.push_back(0.5 * m);
  return ArrayGeometry(p, 1.0, 0.5 * aperture_d0);
}

}  // namespace

TEST_CASE("known coarray DOF values") {
  CHECK(coarray_dof(difference_coarray(make_ula(6, 0.5))) == 11);
  CHECK(coarray_dof(difference_coarray(make_nested(3, 3, 0.5))) == 23);
  CHECK(coarray_dof(difference_coarray(from_marks({0, 1, 4, 6}, 6))) == 13);
  CHECK(grid_dof(std::vector<int>{0, 1, 4, 6}) == 13);
}

TEST_CASE("coarray DOF matches brute force on random integer geometries") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 2 + static_cast<int>(rng() % 5);
    std::set<int> s;
    while (static_cast<int>(s.size()) < n) s.insert(static_cast<int>(rng() % 20));
    std::vector<int> marks(s.begin(), s.end());
    int dof = coarray_dof(difference_coarray(from_marks(marks, 20)));
    CHECK(dof == brute_dof(marks));
    CHECK(grid_dof(marks) == dof);
  }
}

TEST_CASE("off-grid lags within tolerance still count") {
  ArrayGeometry g({0.0, 0.5 + 1e-4 * 0.5, 1.5}, 1.0, 2.0);
  auto c = difference_coarray(g);
  CHECK(c.contiguous_half_length == 3);
  ArrayGeometry far({0.0, 0.5 + 0.1, 1.5}, 1.0, 2.0);
  CHECK(difference_coarray(far).contiguous_half_length < 3);
}

TEST_CASE("redundancy lists every ordered pair") {
  auto c = difference_coarray(make_ula(4, 0.5));
  int zero = c.find_grid_lag(0);
  REQUIRE(zero >= 0);
  CHECK(c.grid_redundancy[zero].size() == 4);
  int one = c.find_grid_lag(1);
  REQUIRE(one >= 0);
  CHECK(c.grid_redundancy[one].size() == 3);
  for (auto [i, j] : c.grid_redundancy[one]) CHECK(i - j == 1);
}

TEST_CASE("MRA table agrees with exhaustive search") {
  for (int n = 2; n <= 6; ++n) {
    auto table = mra_table_entry(n);
    auto found = mra_exhaustive_search(n, table.back() + 2);
    CHECK(grid_dof(table) == grid_dof(found));
    CHECK(table.back() == found.back());
  }
  CHECK(make_mra(6, 0.5).aperture() == doctest::Approx(6.5));
  CHECK_THROWS_AS(mra_table_entry(kMraTableMax + 1), Error);
}

TEST_CASE("dual DOF bound holds for random geometries") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 2 + static_cast<int>(rng() % 6);
    double aperture = 0.5 * (2 + static_cast<int>(rng() % 30));
    std::vector<double> p;
    for (int i = 0; i < n; ++i) p.push_back(aperture * u(rng));
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    ArrayGeometry g(p, 1.0, aperture);
    CHECK(coarray_dof(difference_coarray(g)) <= dual_dof_bound(static_cast<int>(p.size()), aperture, 0.5));
  }
}

TEST_CASE("geometry factories") {
  auto ula = make_ula(5, 0.5);
  CHECK(ula.size() == 5);
  CHECK(ula.position(4) == doctest::Approx(2.0));
  auto nested = make_nested(2, 3, 0.5);
  CHECK(nested.size() == 5);
  auto coprime = make_coprime(2, 3, 0.5);
  CHECK(coprime.size() >= 4);
  CHECK(std::is_sorted(coprime.positions().begin(), coprime.positions().end()));
}

TEST_CASE("invalid geometries are rejected") {
  CHECK_THROWS_AS(ArrayGeometry({0.0, 2.0}, 1.0, 1.0), Error);
  CHECK_THROWS_AS(ArrayGeometry({0.0, 0.5}, -1.0, 1.0), Error);
}

TEST_CASE("central moments") {
  auto m = position_moments(std::vector<double>{0.0, 1.0, 2.0, 3.0}, 3);
  REQUIRE(m.size() == 2);
  CHECK(m[0] == doctest::Approx(1.25));
  CHECK(m[1] == doctest::Approx(0.0).epsilon(1e-12));
}
