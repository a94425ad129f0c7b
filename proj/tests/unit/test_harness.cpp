#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fasdoa/error.hpp"
#include "fasdoa/harness.hpp"
#include "fasdoa/io.hpp"

using namespace fasdoa;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fasdoa_unit_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.trials = 3;
  c.snr_db = {10.0};
  c.design_t_max = 50;
  c.algorithms = {"music", "fas-music"};
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("zero trials are rejected") {
  auto g = make_nested(3, 3, 0.5);
  auto s = SourceScenario::equal_power({0.1, 0.4}, 10.0, 50);
  CHECK_THROWS_AS(monte_carlo_rmse(g, s, Algorithm::FasMusic, 0, 1), Error);
  auto c = small_config();
  c.trials = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_THROWS_AS(run_experiment("rmse_vs_snr", c), Error);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"trials", 0}}), Error);
  CHECK_THROWS_AS(run_experiment("nope", small_config()), Error);
}

TEST_CASE("noiseless Monte Carlo RMSE vanishes") {
  auto g = make_nested(3, 3, 0.5);
  auto s = SourceScenario::equal_power({deg2rad(-10.0), deg2rad(20.0)}, 0.0, 50);
  s.noise_power = 0.0;
  auto r = monte_carlo_rmse(g, s, Algorithm::FasMusic, 5, 3, {}, 1);
  CHECK(r.rmse_degrees < 1e-4);
  CHECK(r.failures == 0);
  CHECK(r.trials == 5);
}

TEST_CASE("Monte Carlo RMSE is reproducible and thread independent") {
  auto g = make_nested(3, 3, 0.5);
  auto s = SourceScenario::equal_power({deg2rad(10.0), deg2rad(25.0)}, 0.0, 100);
  auto a = monte_carlo_rmse(g, s, Algorithm::Music, 8, 42, {}, 1);
  auto b = monte_carlo_rmse(g, s, Algorithm::Music, 8, 42, {}, 4);
  auto c = monte_carlo_rmse(g, s, Algorithm::Music, 8, 43, {}, 1);
  CHECK(a.rmse_degrees == b.rmse_degrees);
  CHECK(a.rmse_degrees != c.rmse_degrees);
}

TEST_CASE("float formatting") {
  CHECK(format_float(0.1) == "0.1");
  CHECK(format_float(1.0 / 3.0) == "0.333333333");
  CHECK(format_float(123456789012.0) == "1.23456789e+11");
  CHECK(format_float(std::nan("")) == "nan");
}

TEST_CASE("CSV layout") {
  ResultTable t;
  t.rows.push_back({"e", "FAS", "music", "snr_db", 5.0, 0.25, std::nullopt, 10, 1.5});
  t.rows.push_back({"e", "FAS", "crb", "snr_db", 5.0, std::nullopt, 1.0 / 3.0, 0, 0.0});
  t.sort();
  CHECK(t.to_csv() ==
        "experiment,array_type,algorithm,sweep_variable,sweep_value,rmse_degrees,sqrt_crb_degrees,trials,"
        "runtime_seconds\n"
        "e,FAS,crb,snr_db,5,,0.333333333,0,0\n"
        "e,FAS,music,snr_db,5,0.25,,10,1.5\n");
}

TEST_CASE("config JSON roundtrip") {
  auto c = small_config();
  c.sources_deg = {-3.0, 7.5};
  c.seed = 123456789;
  auto back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  auto partial = config_from_json(nlohmann::json{{"n_antennas", 8}});
  CHECK(partial.n_antennas == 8);
  CHECK(partial.trials == ExperimentConfig{}.trials);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"n_antennas", "six"}}), Error);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"algorithms", {"esprit"}}}), Error);
}

TEST_CASE("experiment runs are deterministic and write their outputs") {
  auto c = small_config();
  auto a = run_experiment("rmse_vs_snr", c);
  auto b = run_experiment("rmse_vs_snr", c);
  a.sort();
  b.sort();
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].array_type == b.rows[i].array_type);
    CHECK(a.rows[i].algorithm == b.rows[i].algorithm);
    CHECK(a.rows[i].rmse_degrees == b.rows[i].rmse_degrees);
    CHECK(a.rows[i].sqrt_crb_degrees == b.rows[i].sqrt_crb_degrees);
    if (a.rows[i].rmse_degrees) CHECK(*a.rows[i].rmse_degrees >= 0.0);
  }

  auto dir = scratch("experiment");
  write_experiment_outputs(dir, "rmse_vs_snr", c, a, 1.0);
  CHECK(std::filesystem::exists(dir / "results.csv"));
  auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("experiment") == "rmse_vs_snr");
  CHECK(manifest.at("config") == to_json(c));
  CHECK(manifest.at("rows") == a.rows.size());
  CHECK(manifest.at("results_hash").get<std::string>().rfind("fnv1a64:", 0) == 0);
  CHECK(std::filesystem::exists(dir / "positions.json"));
}

TEST_CASE("geometry JSON roundtrip") {
  ArrayGeometry g({0.0, 1.5, 4.0, 16.0, 18.5, 20.0}, 1.0, 20.0);
  auto dir = scratch("geometry");
  write_geometry(dir / "g.json", g);
  auto back = read_geometry(dir / "g.json");
  CHECK(back.wavelength() == g.wavelength());
  CHECK(back.aperture() == g.aperture());
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(back.position(i) == g.position(i));
  CHECK_THROWS_AS(geometry_from_json(nlohmann::json{{"wavelength", 1.0}}), Error);
  CHECK_THROWS_AS(read_geometry(dir / "missing.json"), Error);
}

TEST_CASE("snapshot dump roundtrip") {
  auto g = make_nested(2, 2, 0.5);
  auto s = SourceScenario::equal_power({0.2}, 5.0, 7);
  auto data = synthesize_snapshots(g, s, 11);
  auto dir = scratch("snapshots");
  write_snapshots(dir / "x", data);
  CHECK(std::filesystem::file_size(dir / "x.bin") == static_cast<std::uintmax_t>(g.size() * 7 * 8));
  auto side = nlohmann::json::parse(slurp(dir / "x.json"));
  CHECK(side.at("rows") == g.size());
  CHECK(side.at("cols") == 7);
  CHECK(side.at("seed") == 11);
  auto x = read_snapshot_matrix(dir / "x");
  REQUIRE(x.rows() == data.x.rows());
  REQUIRE(x.cols() == data.x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      CHECK(x(i, j).real() == static_cast<float>(data.x(i, j).real()));
      CHECK(x(i, j).imag() == static_cast<float>(data.x(i, j).imag()));
    }
  std::ifstream raw(dir / "x.bin", std::ios::binary);
  float first[2];
  raw.read(reinterpret_cast<char*>(first), sizeof first);
  CHECK(first[0] == static_cast<float>(data.x(0, 0).real()));
  CHECK(first[1] == static_cast<float>(data.x(0, 0).imag()));
}
