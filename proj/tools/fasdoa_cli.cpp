#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fasdoa/design.hpp"
#include "fasdoa/error.hpp"
#include "fasdoa/estimation.hpp"
#include "fasdoa/fisher.hpp"
#include "fasdoa/geometry.hpp"
#include "fasdoa/harness.hpp"
#include "fasdoa/io.hpp"
#include "fasdoa/rng.hpp"
#include "fasdoa/signal_model.hpp"

using namespace fasdoa;
using nlohmann::json;

namespace {

std::vector<double> degrees_to_radians(const std::vector<double>& deg) {
  std::vector<double> out;
  for (double d : deg) out.push_back(deg2rad(d));
  return out;
}

std::vector<double> radians_to_degrees(const std::vector<double>& rad) {
  std::vector<double> out;
  for (double r : rad) out.push_back(rad2deg(r));
  return out;
}

ArrayGeometry named_array(const std::string& kind, int n, int n1, int n2, int m, double d0) {
  if (kind == "ula") return make_ula(n, d0);
  if (kind == "nested") return make_nested(n1, n2, d0);
  if (kind == "coprime") return make_coprime(m, n, d0);
  if (kind == "mra") return make_mra(n, d0);
  throw Error(ErrorKind::InvalidArgument, "unknown array '" + kind + "'");
}

struct AnalyzeArgs {
  std::string geometry;
  std::string array;
  int n = 6, n1 = 3, n2 = 3, m = 2;
  double wavelength = 1.0;
};

int run_analyze(const AnalyzeArgs& a) {
  const double d0 = 0.5 * a.wavelength;
  const ArrayGeometry g = !a.geometry.empty() ? read_geometry(a.geometry)
                                              : named_array(a.array, a.n, a.n1, a.n2, a.m, d0);
  const DifferenceCoarray c = difference_coarray(g);
  std::ostringstream lags;
  for (std::size_t i = 0; i < c.lags.size(); ++i) lags << (i ? ";" : "") << format_float(c.lags[i] / g.d0());
  std::cout << "n_antennas,aperture_over_d0,lags_over_d0,contiguous_half_length,dof,dual_bound\n"
            << g.size() << ',' << format_float(g.aperture() / g.d0()) << ',' << lags.str() << ','
            << c.contiguous_half_length << ',' << coarray_dof(c) << ','
            << dual_dof_bound(static_cast<int>(g.size()), g.aperture(), g.d0()) << '\n';
  return 0;
}

struct CrbArgs {
  std::vector<double> sources{10.0, 25.0};
  double snr_db = 10.0;
  int snapshots = 500;
  int n = 6;
  std::vector<double> apertures{4, 8, 12, 16, 20, 24, 28, 32, 36, 40};
  std::vector<std::string> arrays{"ula", "nested", "mra", "fas"};
  std::string geometry;
  double d_min_d0 = 0.4;
  double wavelength = 1.0;
};

int run_crb(const CrbArgs& a) {
  const double d0 = 0.5 * a.wavelength;
  const auto scenario = SourceScenario::equal_power(degrees_to_radians(a.sources), a.snr_db, a.snapshots);
  std::cout << "aperture_over_d0,array_type,source_index,sqrt_crb_degrees\n";
  auto emit = [&](double aperture_d0, const std::string& type, const ArrayGeometry& g) {
    const auto c = crb(fim_exact(g, scenario));
    for (std::size_t l = 0; l < c.size(); ++l)
      std::cout << format_float(aperture_d0) << ',' << type << ',' << l << ',' << format_float(rad2deg(std::sqrt(c[l])))
                << '\n';
  };
  if (!a.geometry.empty()) {
    const ArrayGeometry g = read_geometry(a.geometry);
    emit(g.aperture() / g.d0(), "custom", g);
  }
  for (double dd : a.apertures) {
    for (const auto& kind : a.arrays) {
      if (kind == "fas") {
        DesignConfig cfg;
        cfg.d_min = a.d_min_d0 * d0;
        emit(dd, "FAS", design_positions(scenario, a.n, dd * d0, a.wavelength, cfg).geometry);
      } else {
        const int n1 = a.n / 2;
        const ArrayGeometry g = named_array(kind, a.n, n1, a.n - n1, 2, d0);
        emit(dd, kind == "ula" ? "ULA" : kind == "mra" ? "MRA" : kind, g);
      }
    }
  }
  return 0;
}

struct DesignArgs {
  std::vector<double> sources{10.0, 25.0};
  int n = 6;
  double aperture_d0 = 40.0;
  double epsilon = 1e-3;
  double d_min_d0 = 0.4;
  std::uint64_t seed = 1;
  double mu_coarray = 0.0;
  int t_max = 4000;
  double snr_db = 10.0;
  int snapshots = 500;
  double wavelength = 1.0;
  std::string out;
};

int run_design(const DesignArgs& a) {
  const double d0 = 0.5 * a.wavelength;
  const auto scenario = SourceScenario::equal_power(degrees_to_radians(a.sources), a.snr_db, a.snapshots);
  DesignConfig cfg;
  cfg.epsilon = a.epsilon;
  cfg.d_min = a.d_min_d0 * d0;
  cfg.mu_coarray = a.mu_coarray;
  cfg.t_max = a.t_max;
  const auto t0 = std::chrono::steady_clock::now();
  const DesignResult r = design_positions(scenario, a.n, a.aperture_d0 * d0, a.wavelength, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!a.out.empty()) write_geometry(a.out, r.geometry);

  std::vector<double> positions_d0;
  for (double p : r.geometry.positions()) positions_d0.push_back(p / d0);
  json atoms = json::array();
  for (const auto& at : r.measure.atoms) atoms.push_back({{"position", at.position}, {"weight", at.weight}});
  const json report{{"geometry", geometry_to_json(r.geometry)},
                    {"positions_over_d0", positions_d0},
                    {"kw_gap", r.measure.kw_gap},
                    {"iterations", r.measure.iterations_used},
                    {"log_det_fim", r.log_det},
                    {"contiguous_dof", r.dof},
                    {"measure_atoms", atoms},
                    {"seed", a.seed},
                    {"runtime_seconds", secs}};
  std::cout << report.dump(2) << '\n';
  return 0;
}

struct EstimateArgs {
  std::string geometry;
  std::vector<double> sources{10.0, 25.0};
  double snr_db = 10.0;
  int snapshots = 500;
  std::uint64_t seed = 1;
  std::string algorithm = "fas-music";
  double delta_deg = 5.0;
  int k_adapt = 1;
  std::string dump_spectrum;
  std::string dump_snapshots;
};

json diagnostics_json(const EstimateResult& r) {
  return json{{"contiguous_half_length", r.diagnostics.contiguous_half_length},
              {"subarray_size", r.diagnostics.subarray_size},
              {"ml_iterations", r.diagnostics.ml_iterations},
              {"converged", r.diagnostics.converged},
              {"ml_objective_coarse", r.diagnostics.ml_objective_coarse},
              {"ml_objective_final", r.diagnostics.ml_objective_final}};
}

void dump_spectrum(const std::string& path, const Spectrum& s) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path);
  os << "angle_degrees,pseudo_spectrum\n";
  for (std::size_t i = 0; i < s.angles.size(); ++i)
    os << format_float(rad2deg(s.angles[i])) << ',' << format_float(s.values[i]) << '\n';
}

int run_estimate(const EstimateArgs& a) {
  const ArrayGeometry g = read_geometry(a.geometry);
  const auto scenario = SourceScenario::equal_power(degrees_to_radians(a.sources), a.snr_db, a.snapshots);
  const int l = static_cast<int>(scenario.size());
  FasMusicConfig cfg;
  cfg.box_radius = deg2rad(a.delta_deg);
  cfg.keep_spectrum = !a.dump_spectrum.empty();

  json out{{"algorithm", a.algorithm}, {"true_deg", a.sources}, {"seed", a.seed}};
  EstimateResult r;
  if (a.algorithm == "adaptive") {
    std::uint64_t round = 0;
    DataSource source = [&](const ArrayGeometry& geom) {
      return synthesize_snapshots(geom, scenario, derive_seed(a.seed, round++));
    };
    AdaptiveConfig acfg;
    acfg.estimator = cfg;
    acfg.snr_db = a.snr_db;
    acfg.snapshots = a.snapshots;
    const AdaptiveResult ar =
        adaptive_fas_music(source, static_cast<int>(g.size()), g.aperture(), g.wavelength(), l, a.k_adapt, acfg);
    r = ar.estimate;
    out["final_geometry"] = geometry_to_json(ar.geometry);
    out["design_failures"] = ar.design_failures;
  } else {
    const SnapshotData data = synthesize_snapshots(g, scenario, a.seed);
    if (!a.dump_snapshots.empty()) write_snapshots(a.dump_snapshots, data);
    const CovarianceEstimate cov = sample_covariance(data);
    if (a.algorithm == "music")
      r = music_estimate(cov, g, l, cfg.grid_step, cfg.keep_spectrum);
    else if (a.algorithm == "coarray-music")
      r = coarray_music(cov, g, l, cfg.grid_step, cfg.keep_spectrum);
    else if (a.algorithm == "fas-music")
      r = fas_music(cov, g, l, cfg);
    else
      throw Error(ErrorKind::InvalidArgument, "unknown algorithm '" + a.algorithm + "'");
  }
  out["theta_hat_deg"] = radians_to_degrees(r.theta_hat);
  out["theta_coarse_deg"] = radians_to_degrees(r.theta_coarse);
  out["diagnostics"] = diagnostics_json(r);
  if (!a.dump_spectrum.empty() && r.spectrum) dump_spectrum(a.dump_spectrum, *r.spectrum);
  std::cout << out.dump(2) << '\n';
  return 0;
}

struct ExperimentArgs {
  std::string name;
  std::string config;
  std::string out;
  int trials = 0;
  std::uint64_t seed = 0;
};

int run_experiment_cmd(const ExperimentArgs& a, const CLI::App& sub) {
  json j = json::object();
  if (!a.config.empty()) {
    std::ifstream is(a.config);
    if (!is) throw Error(ErrorKind::Io, "cannot open " + a.config);
    try {
      j = json::parse(is);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::InvalidArgument, a.config + ": " + e.what());
    }
  }
  if (sub.count("--trials")) j["trials"] = a.trials;
  if (sub.count("--seed")) j["seed"] = a.seed;
  j["experiment"] = a.name;
  const ExperimentConfig cfg = config_from_json(j);
  const auto t0 = std::chrono::steady_clock::now();
  const ResultTable table = run_experiment(a.name, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_experiment_outputs(a.out, a.name, cfg, table, secs);
  std::cerr << a.name << ": " << table.rows.size() << " rows, " << table.errors.size() << " row errors, "
            << format_float(secs) << " s -> " << a.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse fluid-antenna array design and DOA estimation"};
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Difference coarray summary as a CSV row");
  auto* geo_opt = analyze->add_option("--geometry", an.geometry, "geometry JSON file");
  analyze->add_option("--array", an.array, "ula | nested | coprime | mra")->excludes(geo_opt);
  analyze->add_option("--n", an.n, "element count (ula, mra; coprime N)");
  analyze->add_option("--n1", an.n1, "nested inner count");
  analyze->add_option("--n2", an.n2, "nested outer count");
  analyze->add_option("--m", an.m, "coprime M");
  analyze->add_option("--wavelength", an.wavelength);

  CrbArgs cr;
  auto* crb_cmd = app.add_subcommand("crb", "Per-source sqrt(CRB) in CSV");
  crb_cmd->add_option("--sources", cr.sources, "DOAs in degrees")->delimiter(',');
  crb_cmd->add_option("--snr-db", cr.snr_db);
  crb_cmd->add_option("--snapshots", cr.snapshots);
  crb_cmd->add_option("--n-antennas", cr.n);
  crb_cmd->add_option("--aperture-d0", cr.apertures, "FAS deployment region(s) in d0")->delimiter(',');
  crb_cmd->add_option("--arrays", cr.arrays, "ula,nested,mra,fas")->delimiter(',');
  crb_cmd->add_option("--geometry", cr.geometry, "extra geometry JSON to score");
  crb_cmd->add_option("--d-min-d0", cr.d_min_d0);
  crb_cmd->add_option("--wavelength", cr.wavelength);

  DesignArgs de;
  auto* design = app.add_subcommand("design", "D-optimal position design");
  design->add_option("--sources", de.sources, "DOAs in degrees")->delimiter(',');
  design->add_option("--n-antennas", de.n);
  design->add_option("--aperture-d0", de.aperture_d0);
  design->add_option("--epsilon", de.epsilon);
  design->add_option("--d-min-d0", de.d_min_d0);
  design->add_option("--seed", de.seed, "recorded in the report; the design is deterministic");
  design->add_option("--mu-coarray", de.mu_coarray, "weight of log det against contiguous DOF; 0 disables");
  design->add_option("--t-max", de.t_max);
  design->add_option("--snr-db", de.snr_db);
  design->add_option("--snapshots", de.snapshots);
  design->add_option("--wavelength", de.wavelength);
  design->add_option("--out", de.out, "geometry JSON output path");

  EstimateArgs es;
  auto* est = app.add_subcommand("estimate", "Simulate snapshots and estimate DOAs");
  est->add_option("--geometry", es.geometry)->required();
  est->add_option("--sources", es.sources, "DOAs in degrees")->delimiter(',');
  est->add_option("--snr-db", es.snr_db);
  est->add_option("--snapshots", es.snapshots);
  est->add_option("--seed", es.seed);
  est->add_option("--algorithm", es.algorithm)
      ->check(CLI::IsMember({"music", "coarray-music", "fas-music", "adaptive"}));
  est->add_option("--delta-deg", es.delta_deg);
  est->add_option("--k-adapt", es.k_adapt);
  est->add_option("--dump-spectrum", es.dump_spectrum, "CSV path for the pseudo-spectrum");
  est->add_option("--dump-snapshots", es.dump_snapshots, "path stem for .bin/.json snapshot dump");

  ExperimentArgs ex;
  auto* exp = app.add_subcommand("experiment", "Run a named experiment");
  exp->add_option("name", ex.name)->required()->check(CLI::IsMember(experiment_names()));
  exp->add_option("--config", ex.config, "JSON config file");
  exp->add_option("--out", ex.out)->required();
  exp->add_option("--trials", ex.trials);
  exp->add_option("--seed", ex.seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) {
      if (an.geometry.empty() && an.array.empty()) throw Error(ErrorKind::InvalidArgument, "need --geometry or --array");
      return run_analyze(an);
    }
    if (crb_cmd->parsed()) return run_crb(cr);
    if (design->parsed()) return run_design(de);
    if (est->parsed()) return run_estimate(es);
    if (exp->parsed()) return run_experiment_cmd(ex, *exp);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
