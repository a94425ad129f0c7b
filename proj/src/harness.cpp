#include "fasdoa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>
#include <tuple>

#include "fasdoa/error.hpp"
#include "fasdoa/rng.hpp"

namespace fasdoa {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int worker_count(int requested, int jobs) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(n, 1, std::max(1, jobs));
}

// Runs body(i) for i in [0, count) on a small pool; body writes to slot i.
template <typename Body>
void parallel_for(int count, int threads, Body body) {
  const int workers = worker_count(threads, count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) body(i);
    });
}

std::vector<double> to_radians(const std::vector<double>& deg) {
  std::vector<double> r;
  for (double d : deg) r.push_back(deg2rad(d));
  return r;
}

double squared_error_sum(std::vector<double> est, std::vector<double> truth) {
  std::sort(truth.begin(), truth.end());
  if (est.empty()) est.push_back(0.0);
  est.resize(truth.size(), est.back());
  std::sort(est.begin(), est.end());
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = rad2deg(est[i] - truth[i]);
    s += e * e;
  }
  return s;
}

std::vector<double> estimate(const CovarianceEstimate& cov, const ArrayGeometry& geom, int sources, Algorithm a,
                             const FasMusicConfig& cfg) {
  switch (a) {
    case Algorithm::Music:
      return music_estimate(cov, geom, sources, cfg.grid_step).theta_hat;
    case Algorithm::CoarrayMusic:
      return coarray_music(cov, geom, sources, cfg.grid_step).theta_hat;
    case Algorithm::FasMusic:
      return fas_music(cov, geom, sources, cfg).theta_hat;
  }
  return {};
}

DesignConfig design_config(const ExperimentConfig& c, bool with_coarray) {
  DesignConfig d;
  d.epsilon = c.design_epsilon;
  d.t_max = c.design_t_max;
  d.d_min = c.d_min_d0 * 0.5 * c.wavelength;
  d.mu_coarray = with_coarray ? c.mu_coarray : 0.0;
  return d;
}

struct Fas {
  ArrayGeometry geometry;
  DesignRecord record;
};

Fas design_fas(const ExperimentConfig& c, const std::string& label, const std::vector<double>& doas_deg, int n,
               double aperture_d0, bool with_coarray) {
  const double d0 = 0.5 * c.wavelength;
  const auto scenario = SourceScenario::equal_power(to_radians(doas_deg), c.fixed_snr_db, c.snapshots);
  const DesignResult r =
      design_positions(scenario, n, aperture_d0 * d0, c.wavelength, design_config(c, with_coarray));
  DesignRecord rec{label, doas_deg, aperture_d0 * d0,
                   std::vector<double>(r.geometry.positions().begin(), r.geometry.positions().end()),
                   r.dof, r.log_det, r.measure.kw_gap};
  return Fas{r.geometry, std::move(rec)};
}

ArrayGeometry nested_for(int n, double d0) {
  const int n1 = n / 2;
  return make_nested(n1, n - n1, d0);
}

struct RmseCell {
  std::string array_type;
  const ArrayGeometry* geometry;
  Algorithm algorithm;
};

std::uint64_t cell_seed(std::uint64_t master, std::size_t point, std::size_t cell) {
  return derive_seed(derive_seed(master, point), cell);
}

void add_rmse_row(ResultTable& table, const ExperimentConfig& c, const std::string& experiment,
                  const std::string& array_type, const ArrayGeometry& geom, Algorithm algorithm,
                  const std::string& sweep_variable, double sweep_value, const SourceScenario& scenario,
                  std::uint64_t seed) {
  const auto t0 = Clock::now();
  ResultRow row{experiment, array_type, to_string(algorithm), sweep_variable, sweep_value, {}, {}, c.trials, 0.0};
  try {
    row.sqrt_crb_degrees = sqrt_mean_crb_degrees(geom, scenario);
  } catch (const Error& e) {
    table.errors.push_back({array_type, row.algorithm, sweep_value, std::string("crb: ") + e.what()});
  }
  try {
    const auto mc = monte_carlo_rmse(geom, scenario, algorithm, c.trials, seed, {}, c.threads);
    row.rmse_degrees = mc.rmse_degrees;
    table.failed_trials += mc.failures;
  } catch (const Error& e) {
    table.errors.push_back({array_type, row.algorithm, sweep_value, e.what()});
  }
  row.runtime_seconds = seconds_since(t0);
  table.rows.push_back(std::move(row));
}

void add_crb_row(ResultTable& table, const std::string& experiment, const std::string& array_type,
                 const ArrayGeometry& geom, const SourceScenario& scenario, const std::string& sweep_variable,
                 double sweep_value) {
  const auto t0 = Clock::now();
  ResultRow row{experiment, array_type, "crb", sweep_variable, sweep_value, {}, {}, 0, 0.0};
  try {
    row.sqrt_crb_degrees = sqrt_mean_crb_degrees(geom, scenario);
  } catch (const Error& e) {
    table.errors.push_back({array_type, "crb", sweep_value, e.what()});
  }
  row.runtime_seconds = seconds_since(t0);
  table.rows.push_back(std::move(row));
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

Algorithm parse_algorithm(const std::string& name) {
  if (name == "music") return Algorithm::Music;
  if (name == "coarray-music") return Algorithm::CoarrayMusic;
  if (name == "fas-music") return Algorithm::FasMusic;
  throw Error(ErrorKind::InvalidArgument, "unknown algorithm '" + name + "'");
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Music:
      return "music";
    case Algorithm::CoarrayMusic:
      return "coarray-music";
    case Algorithm::FasMusic:
      return "fas-music";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidArgument, m); };
  if (trials < 1) fail("trial count must be >= 1");
  if (snr_db.empty()) fail("SNR list must not be empty");
  if (n_antennas < 2) fail("need at least 2 antennas");
  if (sources_deg.empty()) fail("need at least one source");
  if (snapshots < 1) fail("snapshot count must be >= 1");
  if (!(aperture_d0 > 0.0)) fail("aperture must be positive");
  if (!(wavelength > 0.0)) fail("wavelength must be positive");
  if (!(d_min_d0 >= 0.0)) fail("d_min must be >= 0");
  if (adapt_rounds < 0) fail("adapt_rounds must be >= 0");
  for (const auto& a : algorithms)
    if (a != "adaptive") parse_algorithm(a);
}

bool ExperimentConfig::wants(const std::string& algorithm) const {
  return std::find(algorithms.begin(), algorithms.end(), algorithm) != algorithms.end();
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  try {
    read_if(j, "experiment", c.experiment);
    read_if(j, "n_antennas", c.n_antennas);
    read_if(j, "sources_deg", c.sources_deg);
    read_if(j, "aperture_d0", c.aperture_d0);
    read_if(j, "snr_db", c.snr_db);
    read_if(j, "fixed_snr_db", c.fixed_snr_db);
    read_if(j, "snapshots", c.snapshots);
    read_if(j, "trials", c.trials);
    read_if(j, "seed", c.seed);
    read_if(j, "algorithms", c.algorithms);
    read_if(j, "wavelength", c.wavelength);
    read_if(j, "d_min_d0", c.d_min_d0);
    read_if(j, "mu_coarray", c.mu_coarray);
    read_if(j, "design_epsilon", c.design_epsilon);
    read_if(j, "design_t_max", c.design_t_max);
    read_if(j, "aperture_sweep_d0", c.aperture_sweep_d0);
    read_if(j, "separations_deg", c.separations_deg);
    read_if(j, "antenna_counts", c.antenna_counts);
    read_if(j, "adapt_rounds", c.adapt_rounds);
    read_if(j, "mismatched_prior_deg", c.mismatched_prior_deg);
    read_if(j, "position_scenarios", c.position_scenarios);
    read_if(j, "threads", c.threads);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("bad experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  return json{{"experiment", c.experiment},
              {"n_antennas", c.n_antennas},
              {"sources_deg", c.sources_deg},
              {"aperture_d0", c.aperture_d0},
              {"snr_db", c.snr_db},
              {"fixed_snr_db", c.fixed_snr_db},
              {"snapshots", c.snapshots},
              {"trials", c.trials},
              {"seed", c.seed},
              {"algorithms", c.algorithms},
              {"wavelength", c.wavelength},
              {"d_min_d0", c.d_min_d0},
              {"mu_coarray", c.mu_coarray},
              {"design_epsilon", c.design_epsilon},
              {"design_t_max", c.design_t_max},
              {"aperture_sweep_d0", c.aperture_sweep_d0},
              {"separations_deg", c.separations_deg},
              {"antenna_counts", c.antenna_counts},
              {"adapt_rounds", c.adapt_rounds},
              {"mismatched_prior_deg", c.mismatched_prior_deg},
              {"position_scenarios", c.position_scenarios},
              {"threads", c.threads}};
}

std::string format_float(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void ResultTable::sort() {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.experiment, a.array_type, a.algorithm, a.sweep_value) <
           std::tie(b.experiment, b.array_type, b.algorithm, b.sweep_value);
  });
}

std::string ResultTable::to_csv() const {
  std::ostringstream os;
  os << "experiment,array_type,algorithm,sweep_variable,sweep_value,rmse_degrees,sqrt_crb_degrees,trials,"
        "runtime_seconds\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_float(*v) : std::string(); };
  for (const auto& r : rows)
    os << r.experiment << ',' << r.array_type << ',' << r.algorithm << ',' << r.sweep_variable << ','
       << format_float(r.sweep_value) << ',' << opt(r.rmse_degrees) << ',' << opt(r.sqrt_crb_degrees) << ','
       << r.trials << ',' << format_float(r.runtime_seconds) << '\n';
  return os.str();
}

double sqrt_mean_crb_degrees(const ArrayGeometry& geom, const SourceScenario& scenario) {
  const auto c = crb(fim_exact(geom, scenario));
  double s = 0.0;
  for (double v : c) s += v;
  return rad2deg(std::sqrt(s / static_cast<double>(c.size())));
}

MonteCarloResult monte_carlo_rmse(const ArrayGeometry& geom, const SourceScenario& scenario, Algorithm algorithm,
                                  int trials, std::uint64_t master_seed, const FasMusicConfig& estimator,
                                  int threads) {
  if (trials < 1) throw Error(ErrorKind::InvalidArgument, "trial count must be >= 1");
  scenario.validate();
  const int l = static_cast<int>(scenario.size());
  std::vector<double> sq(static_cast<std::size_t>(trials), 0.0);
  std::vector<char> failed(static_cast<std::size_t>(trials), 0);

  parallel_for(trials, threads, [&](int t) {
    const auto data = synthesize_snapshots(geom, scenario, derive_seed(master_seed, static_cast<std::uint64_t>(t)));
    std::vector<double> est;
    try {
      est = estimate(sample_covariance(data), geom, l, algorithm, estimator);
    } catch (const Error&) {
      failed[static_cast<std::size_t>(t)] = 1;
    }
    if (static_cast<int>(est.size()) != l) failed[static_cast<std::size_t>(t)] = 1;
    sq[static_cast<std::size_t>(t)] = squared_error_sum(est, scenario.doas);
  });

  MonteCarloResult r;
  r.trials = trials;
  double total = 0.0;
  for (int t = 0; t < trials; ++t) {
    total += sq[static_cast<std::size_t>(t)];
    r.failures += failed[static_cast<std::size_t>(t)];
  }
  r.rmse_degrees = std::sqrt(total / (static_cast<double>(trials) * l));
  return r;
}

ResultTable experiment_crb_vs_D(const ExperimentConfig& c) {
  c.validate();
  ResultTable table;
  const double d0 = 0.5 * c.wavelength;
  const auto scenario = SourceScenario::equal_power(to_radians(c.sources_deg), c.fixed_snr_db, c.snapshots);
  const ArrayGeometry ula = make_ula(c.n_antennas, d0);
  const ArrayGeometry nested = nested_for(c.n_antennas, d0);
  std::optional<ArrayGeometry> mra;
  if (c.n_antennas <= kMraTableMax) mra = make_mra(c.n_antennas, d0);

  for (double dd : c.aperture_sweep_d0) {
    add_crb_row(table, "crb_vs_D", "ULA", ula, scenario, "aperture_d0", dd);
    add_crb_row(table, "crb_vs_D", "nested", nested, scenario, "aperture_d0", dd);
    if (mra) add_crb_row(table, "crb_vs_D", "MRA", *mra, scenario, "aperture_d0", dd);
    const auto t0 = Clock::now();
    try {
      Fas fas = design_fas(c, "D=" + format_float(dd), c.sources_deg, c.n_antennas, dd, false);
      add_crb_row(table, "crb_vs_D", "FAS", fas.geometry, scenario, "aperture_d0", dd);
      table.rows.back().runtime_seconds = seconds_since(t0);
      table.designs.push_back(std::move(fas.record));
    } catch (const Error& e) {
      table.errors.push_back({"FAS", "crb", dd, e.what()});
    }
  }
  table.sort();
  return table;
}

ResultTable experiment_rmse_vs_snr(const ExperimentConfig& c) {
  c.validate();
  ResultTable table;
  const double d0 = 0.5 * c.wavelength;
  const auto doas = to_radians(c.sources_deg);
  const ArrayGeometry ula = make_ula(c.n_antennas, d0);
  Fas fas = design_fas(c, "FAS", c.sources_deg, c.n_antennas, c.aperture_d0, true);
  std::vector<RmseCell> cells{{"ULA", &ula, Algorithm::Music}};
  std::optional<ArrayGeometry> mra;
  if (c.n_antennas <= kMraTableMax) {
    mra = make_mra(c.n_antennas, d0);
    cells.push_back({"MRA", &*mra, Algorithm::Music});
    cells.push_back({"MRA", &*mra, Algorithm::FasMusic});
  }
  cells.push_back({"FAS", &fas.geometry, Algorithm::Music});
  cells.push_back({"FAS", &fas.geometry, Algorithm::CoarrayMusic});
  cells.push_back({"FAS", &fas.geometry, Algorithm::FasMusic});

  for (std::size_t i = 0; i < c.snr_db.size(); ++i) {
    const auto scenario = SourceScenario::equal_power(doas, c.snr_db[i], c.snapshots);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (!c.wants(to_string(cells[k].algorithm))) continue;
      add_rmse_row(table, c, "rmse_vs_snr", cells[k].array_type, *cells[k].geometry, cells[k].algorithm, "snr_db",
                   c.snr_db[i], scenario, cell_seed(c.seed, i, k));
    }
  }
  table.designs.push_back(std::move(fas.record));
  table.sort();
  return table;
}

ResultTable experiment_resolution(const ExperimentConfig& c) {
  c.validate();
  ResultTable table;
  const double d0 = 0.5 * c.wavelength;
  const ArrayGeometry ula = make_ula(c.n_antennas, d0);
  std::optional<ArrayGeometry> mra;
  if (c.n_antennas <= kMraTableMax) mra = make_mra(c.n_antennas, d0);
  const double base = c.sources_deg.front();

  for (std::size_t i = 0; i < c.separations_deg.size(); ++i) {
    const double sep = c.separations_deg[i];
    const std::vector<double> deg{base, base + sep};
    const auto scenario = SourceScenario::equal_power(to_radians(deg), c.fixed_snr_db, c.snapshots);
    std::vector<RmseCell> cells{{"ULA", &ula, Algorithm::Music}};
    if (mra) cells.push_back({"MRA", &*mra, Algorithm::Music});
    std::optional<Fas> fas;
    try {
      fas = design_fas(c, "sep=" + format_float(sep), deg, c.n_antennas, c.aperture_d0, true);
      cells.push_back({"FAS", &fas->geometry, Algorithm::Music});
      cells.push_back({"FAS", &fas->geometry, Algorithm::FasMusic});
    } catch (const Error& e) {
      table.errors.push_back({"FAS", "design", sep, e.what()});
    }
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (!c.wants(to_string(cells[k].algorithm))) continue;
      add_rmse_row(table, c, "resolution", cells[k].array_type, *cells[k].geometry, cells[k].algorithm,
                   "separation_deg", sep, scenario, cell_seed(c.seed, i, k));
    }
    if (fas) table.designs.push_back(std::move(fas->record));
  }
  table.sort();
  return table;
}

ResultTable experiment_scaling_N(const ExperimentConfig& c) {
  c.validate();
  ResultTable table;
  const double d0 = 0.5 * c.wavelength;
  const auto scenario = SourceScenario::equal_power(to_radians(c.sources_deg), c.fixed_snr_db, c.snapshots);
  for (std::size_t i = 0; i < c.antenna_counts.size(); ++i) {
    const int n = c.antenna_counts[i];
    const ArrayGeometry ula = make_ula(n, d0);
    std::vector<RmseCell> cells{{"ULA", &ula, Algorithm::Music}};
    std::optional<ArrayGeometry> mra;
    if (n <= kMraTableMax) {
      mra = make_mra(n, d0);
      cells.push_back({"MRA", &*mra, Algorithm::Music});
    }
    std::optional<Fas> fas;
    try {
      fas = design_fas(c, "N=" + std::to_string(n), c.sources_deg, n, c.aperture_d0, true);
      cells.push_back({"FAS", &fas->geometry, Algorithm::FasMusic});
    } catch (const Error& e) {
      table.errors.push_back({"FAS", "design", static_cast<double>(n), e.what()});
    }
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (!c.wants(to_string(cells[k].algorithm))) continue;
      add_rmse_row(table, c, "scaling_N", cells[k].array_type, *cells[k].geometry, cells[k].algorithm,
                   "n_antennas", n, scenario, cell_seed(c.seed, i, k));
    }
    if (fas) table.designs.push_back(std::move(fas->record));
  }
  table.sort();
  return table;
}

ResultTable experiment_adaptive(const ExperimentConfig& c) {
  c.validate();
  ResultTable table;
  const auto doas = to_radians(c.sources_deg);
  const int l = static_cast<int>(doas.size());
  Fas oracle = design_fas(c, "oracle", c.sources_deg, c.n_antennas, c.aperture_d0, true);
  Fas mismatched = design_fas(c, "mismatched", c.mismatched_prior_deg, c.n_antennas, c.aperture_d0, true);

  AdaptiveConfig acfg;
  acfg.design = design_config(c, true);
  acfg.d_min_d0 = c.d_min_d0;
  acfg.snr_db = c.fixed_snr_db;
  acfg.snapshots = c.snapshots;

  for (std::size_t i = 0; i < c.snr_db.size(); ++i) {
    const auto scenario = SourceScenario::equal_power(doas, c.snr_db[i], c.snapshots);
    if (c.wants("fas-music")) {
      add_rmse_row(table, c, "adaptive", "FAS-oracle", oracle.geometry, Algorithm::FasMusic, "snr_db", c.snr_db[i],
                   scenario, cell_seed(c.seed, i, 0));
      add_rmse_row(table, c, "adaptive", "FAS-mismatched", mismatched.geometry, Algorithm::FasMusic, "snr_db",
                   c.snr_db[i], scenario, cell_seed(c.seed, i, 1));
    }
    if (!c.wants("adaptive")) continue;

    const auto t0 = Clock::now();
    const std::uint64_t seed = cell_seed(c.seed, i, 2);
    std::vector<double> sq(static_cast<std::size_t>(c.trials), 0.0);
    std::vector<int> failures(static_cast<std::size_t>(c.trials), 0);
    std::vector<double> crb_final(static_cast<std::size_t>(c.trials), std::nan(""));
    parallel_for(c.trials, c.threads, [&](int t) {
      const std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
      std::uint64_t round = 0;
      DataSource source = [&](const ArrayGeometry& g) {
        return synthesize_snapshots(g, scenario, derive_seed(trial_seed, round++));
      };
      std::vector<double> est;
      try {
        const AdaptiveResult r = adaptive_fas_music(source, c.n_antennas, c.aperture_d0 * 0.5 * c.wavelength,
                                                    c.wavelength, l, c.adapt_rounds, acfg);
        est = r.estimate.theta_hat;
        failures[static_cast<std::size_t>(t)] = r.design_failures > 0 ? 1 : 0;
        crb_final[static_cast<std::size_t>(t)] = sqrt_mean_crb_degrees(r.geometry, scenario);
      } catch (const Error&) {
        failures[static_cast<std::size_t>(t)] = 1;
      }
      sq[static_cast<std::size_t>(t)] = squared_error_sum(est, doas);
    });
    double total = 0.0, crb_sq = 0.0;
    int crb_count = 0;
    for (int t = 0; t < c.trials; ++t) {
      total += sq[static_cast<std::size_t>(t)];
      table.failed_trials += failures[static_cast<std::size_t>(t)];
      const double v = crb_final[static_cast<std::size_t>(t)];
      if (std::isfinite(v)) {
        crb_sq += v * v;
        ++crb_count;
      }
    }
    ResultRow row{"adaptive", "FAS-adaptive", "adaptive", "snr_db", c.snr_db[i], {}, {}, c.trials, 0.0};
    row.rmse_degrees = std::sqrt(total / (static_cast<double>(c.trials) * l));
    if (crb_count > 0) row.sqrt_crb_degrees = std::sqrt(crb_sq / crb_count);
    row.runtime_seconds = seconds_since(t0);
    table.rows.push_back(std::move(row));
  }
  table.designs.push_back(std::move(oracle.record));
  table.designs.push_back(std::move(mismatched.record));
  table.sort();
  return table;
}

ResultTable experiment_positions(const ExperimentConfig& c) {
  c.validate();
  ResultTable table;
  for (std::size_t i = 0; i < c.position_scenarios.size(); ++i) {
    const auto& deg = c.position_scenarios[i];
    std::string label = "sources=";
    for (std::size_t k = 0; k < deg.size(); ++k) label += (k ? "/" : "") + format_float(deg[k]);
    const auto t0 = Clock::now();
    try {
      Fas fas = design_fas(c, label, deg, c.n_antennas, c.aperture_d0, false);
      const auto scenario = SourceScenario::equal_power(to_radians(deg), c.fixed_snr_db, c.snapshots);
      add_crb_row(table, "positions", "FAS", fas.geometry, scenario, "scenario", static_cast<double>(i));
      table.rows.back().runtime_seconds = seconds_since(t0);
      table.designs.push_back(std::move(fas.record));
    } catch (const Error& e) {
      table.errors.push_back({"FAS", "design", static_cast<double>(i), e.what()});
    }
  }
  table.sort();
  return table;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"crb_vs_D", "rmse_vs_snr", "resolution",
                                              "scaling_N", "adaptive",    "positions"};
  return names;
}

ResultTable run_experiment(const std::string& name, const ExperimentConfig& config) {
  if (name == "crb_vs_D") return experiment_crb_vs_D(config);
  if (name == "rmse_vs_snr") return experiment_rmse_vs_snr(config);
  if (name == "resolution") return experiment_resolution(config);
  if (name == "scaling_N") return experiment_scaling_N(config);
  if (name == "adaptive") return experiment_adaptive(config);
  if (name == "positions") return experiment_positions(config);
  throw Error(ErrorKind::InvalidArgument, "unknown experiment '" + name + "'");
}

void write_experiment_outputs(const std::filesystem::path& dir, const std::string& name,
                              const ExperimentConfig& config, const ResultTable& table, double wall_seconds) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  auto write = [&](const std::string& file, const std::string& text) {
    std::ofstream os(dir / file, std::ios::binary);
    if (!os) throw Error(ErrorKind::Io, "cannot write " + (dir / file).string());
    os << text;
  };

  const std::string csv = table.to_csv();
  write("results.csv", csv);

  json errors = json::array();
  for (const auto& e : table.errors)
    errors.push_back({{"array_type", e.array_type},
                      {"algorithm", e.algorithm},
                      {"sweep_value", e.sweep_value},
                      {"message", e.message}});
  json manifest{{"experiment", name},
                {"config", to_json(config)},
                {"results_hash", "fnv1a64:" + fnv1a_hex(csv)},
                {"wall_seconds", wall_seconds},
                {"rows", table.rows.size()},
                {"failed_trials", table.failed_trials},
                {"errors", errors}};
  write("manifest.json", manifest.dump(2) + "\n");

  if (!table.designs.empty()) {
    json designs = json::array();
    for (const auto& d : table.designs)
      designs.push_back({{"label", d.label},
                         {"sources_deg", d.sources_deg},
                         {"aperture", d.aperture},
                         {"positions", d.positions},
                         {"dof", d.dof},
                         {"log_det", d.log_det},
                         {"kw_gap", d.kw_gap}});
    write("positions.json", json{{"wavelength", config.wavelength}, {"designs", designs}}.dump(2) + "\n");
  }
}

}  // namespace fasdoa
