#include "fasdoa/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "fasdoa/error.hpp"
#include "fasdoa/optimize.hpp"
#include "fasdoa/rng.hpp"

namespace fasdoa {

namespace {

constexpr int kInitialAtoms = 64;
constexpr double kPruneWeight = 1e-6;
constexpr double kMergeFraction = 0.01;    // of d0, atom bookkeeping
constexpr double kClusterFraction = 0.1;   // of d0, support extraction
constexpr double kDegenerateLogDet = -1e30;
constexpr double kCoarrayBackoff = 0.1;
constexpr int kMaxCoarrayBackoffs = 4;

DesignMeasure uniform_measure(double aperture, int atoms) {
  DesignMeasure xi;
  for (int i = 0; i < atoms; ++i)
    xi.atoms.push_back({aperture * i / (atoms - 1), 1.0 / atoms});
  return xi;
}

bool spacing_ok(std::vector<double> p, double d_min, double aperture) {
  std::sort(p.begin(), p.end());
  const double slack = 1e-12 * std::max(1.0, aperture);
  if (p.front() < -slack || p.back() > aperture + slack) return false;
  for (std::size_t i = 1; i < p.size(); ++i)
    if (p[i] - p[i - 1] < d_min - slack) return false;
  return true;
}

double log_det_or_floor(std::span<const double> p, double wavelength, const SourceScenario& s) {
  try {
    const double v = fim_exact(p, wavelength, s).log_det();
    return std::isfinite(v) ? v : kDegenerateLogDet;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::DegenerateConfiguration) return kDegenerateLogDet;
    throw;
  }
}

int dof_of(std::span<const double> p, double wavelength, double aperture) {
  const ArrayGeometry g(std::vector<double>(p.begin(), p.end()), wavelength, aperture);
  return coarray_dof(difference_coarray(g));
}

}  // namespace

void DesignConfig::validate() const {
  auto fail = [](const char* m) { throw Error(ErrorKind::InvalidArgument, m); };
  if (!(epsilon > 0.0)) fail("epsilon must be positive");
  if (t_max < 1) fail("t_max must be >= 1");
  if (!(d_min >= 0.0)) fail("d_min must be >= 0");
  if (!(mu_sp >= 0.0)) fail("mu_sp must be >= 0");
  if (!(mu_coarray >= 0.0)) fail("mu_coarray must be >= 0");
  if (!(grid_resolution >= 0.0)) fail("grid_resolution must be positive (or 0 for the default)");
}

std::vector<double> single_source_optimal(int n, double aperture) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "need N >= 2");
  std::vector<double> p;
  const int half = n / 2;
  p.insert(p.end(), static_cast<std::size_t>(half), 0.0);
  if (n % 2 == 1) p.push_back(0.5 * aperture);
  p.insert(p.end(), static_cast<std::size_t>(half), aperture);
  return p;
}

DesignMeasure frank_wolfe_design(const SourceScenario& scenario, int n, double aperture, double wavelength,
                                 const DesignConfig& config, FrankWolfeLog* log) {
  config.validate();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "need N >= 2");
  if (!(aperture > 0.0)) throw Error(ErrorKind::InvalidArgument, "aperture must be positive");
  const double d0 = 0.5 * wavelength;
  const double res = config.grid_resolution > 0.0 ? config.grid_resolution : d0 / 50.0;
  const int l = static_cast<int>(scenario.size());

  std::vector<double> grid;
  const int npts = static_cast<int>(std::ceil(aperture / res)) + 1;
  for (int i = 0; i < npts; ++i) grid.push_back(std::min(i * res, aperture));

  DesignMeasure xi = uniform_measure(aperture, kInitialAtoms);
  if (MeasureInformation(xi, scenario, wavelength).singular()) {
    DesignMeasure seeded = uniform_measure(aperture, kInitialAtoms);
    for (auto& a : seeded.atoms) a.weight *= 0.5;
    seeded.atoms.front().weight += 0.25;
    seeded.atoms.back().weight += 0.25;
    if (MeasureInformation(seeded, scenario, wavelength).singular())
      throw Error(ErrorKind::DegenerateConfiguration, "relaxed information is singular at initialization");
    xi = std::move(seeded);
  }

  auto scan = [&](const MeasureInformation& mi, double& best_p) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double v = mi.directional_derivative(grid[i]);
      if (v > best) {
        best = v;
        best_i = i;
      }
    }
    best_p = grid[best_i];
    const double lo = std::max(0.0, best_p - res);
    const double hi = std::min(aperture, best_p + res);
    double refined_value = 0.0;
    const double refined = golden_section_maximize([&](double p) { return mi.directional_derivative(p); }, lo,
                                                   hi, 1e-6 * res, &refined_value);
    if (refined_value > best) {
      best = refined_value;
      best_p = refined;
    }
    return best;
  };

  for (int t = 1; t <= config.t_max; ++t) {
    const MeasureInformation mi(xi, scenario, wavelength);
    if (mi.singular()) throw Error(ErrorKind::DegenerateConfiguration, "relaxed information became singular");
    double p_star = 0.0;
    const double phi_max = scan(mi, p_star);
    if (log) {
      FrankWolfeIteration it;
      it.t = t;
      it.phi_max = phi_max;
      it.argmax = p_star;
      it.total_weight = xi.total_weight();
      it.min_weight = std::numeric_limits<double>::infinity();
      for (const auto& a : xi.atoms) {
        it.trace_identity += a.weight * mi.directional_derivative(a.position);
        it.min_weight = std::min(it.min_weight, a.weight);
      }
      log->push_back(it);
    }
    xi.kw_gap = phi_max - l;
    xi.iterations_used = t;
    if (phi_max <= l + config.epsilon) return xi;

    const double gamma = 2.0 / (t + 2.0);
    for (auto& a : xi.atoms) a.weight *= 1.0 - gamma;
    auto nearest = std::min_element(xi.atoms.begin(), xi.atoms.end(), [&](const Atom& a, const Atom& b) {
      return std::abs(a.position - p_star) < std::abs(b.position - p_star);
    });
    if (nearest != xi.atoms.end() && std::abs(nearest->position - p_star) <= kMergeFraction * d0)
      nearest->weight += gamma;
    else
      xi.atoms.push_back({p_star, gamma});
    std::erase_if(xi.atoms, [](const Atom& a) { return a.weight < kPruneWeight; });
    std::sort(xi.atoms.begin(), xi.atoms.end(),
              [](const Atom& a, const Atom& b) { return a.position < b.position; });
    xi.normalize();
  }

  // Certificate for the final iterate.
  const MeasureInformation mi(xi, scenario, wavelength);
  double p_star = 0.0;
  xi.kw_gap = scan(mi, p_star) - l;
  return xi;
}

std::vector<double> enforce_spacing(std::vector<double> p, double d_min, double aperture) {
  if (p.empty()) return p;
  const double gap = d_min > 0.0 ? d_min * (1.0 + 1e-12) : 0.0;
  if (gap * static_cast<double>(p.size() - 1) > aperture * (1.0 + 1e-12))
    throw Error(ErrorKind::InfeasibleSpacing, "elements cannot satisfy d_min inside [0, D]");
  std::sort(p.begin(), p.end());
  p.front() = std::clamp(p.front(), 0.0, aperture);
  for (std::size_t i = 1; i < p.size(); ++i) p[i] = std::max(std::min(p[i], aperture), p[i - 1] + gap);
  p.back() = std::min(p.back(), aperture);
  for (std::size_t i = p.size() - 1; i-- > 0;) p[i] = std::min(p[i], p[i + 1] - gap);
  for (double& x : p) x = std::clamp(x, 0.0, aperture);
  return p;
}

std::vector<double> extract_positions(const DesignMeasure& xi, int n, double d_min, double aperture,
                                      double d0) {
  if (xi.atoms.empty()) throw Error(ErrorKind::InvalidArgument, "measure has no atoms");
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "need N >= 1");
  if (n * d_min > aperture)
    throw Error(ErrorKind::InfeasibleSpacing,
                std::to_string(n) + " elements at spacing " + std::to_string(d_min) + " exceed the region");

  struct Cluster {
    double center;
    double weight;
  };
  std::vector<Cluster> clusters;
  for (const auto& a : xi.atoms) clusters.push_back({a.position, a.weight});
  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster& a, const Cluster& b) { return a.center < b.center; });
  // Greedy agglomeration of the closest adjacent pair.
  while (clusters.size() > 1) {
    std::size_t k = 0;
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < clusters.size(); ++i) {
      const double g = clusters[i + 1].center - clusters[i].center;
      if (g < gap) {
        gap = g;
        k = i;
      }
    }
    if (gap >= kClusterFraction * d0) break;
    auto& a = clusters[k];
    const auto& b = clusters[k + 1];
    const double w = a.weight + b.weight;
    a.center = w > 0.0 ? (a.center * a.weight + b.center * b.weight) / w : 0.5 * (a.center + b.center);
    a.weight = w;
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(k + 1));
  }

  // Largest-remainder allocation of N elements.
  double total = 0.0;
  for (const auto& c : clusters) total += c.weight;
  std::vector<int> counts(clusters.size());
  std::vector<std::size_t> order(clusters.size());
  std::vector<double> frac(clusters.size());
  int assigned = 0;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const double share = clusters[i].weight / total * n;
    counts[i] = static_cast<int>(std::floor(share));
    frac[i] = share - counts[i];
    assigned += counts[i];
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (frac[a] != frac[b]) return frac[a] > frac[b];
    return clusters[a].weight > clusters[b].weight;
  });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % order.size()]];

  std::vector<double> p;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const int m = counts[i];
    if (m == 0) continue;
    const double half_span = 0.5 * (m - 1) * d_min;
    const double center = std::clamp(clusters[i].center, std::min(half_span, 0.5 * aperture),
                                     std::max(aperture - half_span, 0.5 * aperture));
    for (int j = 0; j < m; ++j) p.push_back(center + (j - 0.5 * (m - 1)) * d_min);
  }
  return enforce_spacing(std::move(p), d_min, aperture);
}

double spacing_penalty(std::span<const double> p, double d_min) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const double v = d_min - std::abs(p[i] - p[j]);
      if (v > 0.0) s += v * v;
    }
  return s;
}

std::vector<double> spacing_penalty_gradient(std::span<const double> p, double d_min) {
  std::vector<double> g(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const double diff = p[i] - p[j];
      const double v = d_min - std::abs(diff);
      if (v > 0.0) {
        const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        g[i] += -2.0 * v * sign;
        g[j] += 2.0 * v * sign;
      }
    }
  return g;
}

double spacing_penalized_objective(std::span<const double> positions, double wavelength,
                                   const SourceScenario& scenario, double d_min, double mu_sp) {
  return fim_exact(positions, wavelength, scenario).log_det() - mu_sp * spacing_penalty(positions, d_min);
}

std::vector<double> polish_positions(std::vector<double> positions, double wavelength, double aperture,
                                     const SourceScenario& scenario, double d_min, double mu_sp) {
  const auto n = static_cast<Eigen::Index>(positions.size());
  const Eigen::VectorXd lower = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd upper = Eigen::VectorXd::Constant(n, aperture);
  auto as_span = [](const Eigen::VectorXd& x) { return std::span<const double>(x.data(), static_cast<std::size_t>(x.size())); };
  auto neg_log_det = [&](const Eigen::VectorXd& x) { return -log_det_or_floor(as_span(x), wavelength, scenario); };
  auto objective = [&](const Eigen::VectorXd& x) {
    return neg_log_det(x) + mu_sp * spacing_penalty(as_span(x), d_min);
  };
  const double fd = 1e-6 * wavelength;
  auto gradient = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd g = central_difference_gradient(neg_log_det, x, lower, upper, fd);
    const auto pg = spacing_penalty_gradient(as_span(x), d_min);
    for (Eigen::Index i = 0; i < n; ++i) g(i) += mu_sp * pg[static_cast<std::size_t>(i)];
    return g;
  };

  Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(positions.data(), n);
  BoxOptions opts;
  opts.max_iterations = 300;
  opts.gradient_tolerance = 1e-10;
  const BoxResult r = minimize_box(objective, gradient, x0, lower, upper, opts);
  std::vector<double> out(r.x.data(), r.x.data() + n);
  out = enforce_spacing(std::move(out), d_min, aperture);
  // Projection can undo part of the ascent; keep whichever is better.
  std::vector<double> start_fixed = enforce_spacing(std::move(positions), d_min, aperture);
  const double f_out = -log_det_or_floor(out, wavelength, scenario);
  const double f_start = -log_det_or_floor(start_fixed, wavelength, scenario);
  return f_out <= f_start ? out : start_fixed;
}

namespace {

struct RefineScore {
  int dof = 0;
  double log_det = 0.0;
  double value = 0.0;
};

RefineScore refine_score(std::span<const double> p, double wavelength, double aperture,
                         const SourceScenario* scenario, double mu) {
  RefineScore s;
  s.dof = dof_of(p, wavelength, aperture);
  s.log_det = (scenario && mu > 0.0) ? log_det_or_floor(p, wavelength, *scenario) : 0.0;
  s.value = s.dof + mu * s.log_det;
  return s;
}

std::vector<double> refine_impl(std::vector<double> p, double wavelength, double aperture,
                                const SourceScenario* scenario, double mu, double d_min) {
  const double d0 = 0.5 * wavelength;
  std::sort(p.begin(), p.end());
  if (!spacing_ok(p, d_min, aperture)) p = enforce_spacing(std::move(p), d_min, aperture);
  RefineScore current = refine_score(p, wavelength, aperture, scenario, mu);
  const std::size_t n = p.size();

  for (int sweep = 0; sweep < 100; ++sweep) {
    bool improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int mc = (current.dof - 1) / 2;
      std::vector<double> cand;
      const double m = std::round(p[i] / d0);
      for (int k = -2; k <= 2; ++k) cand.push_back((m + k) * d0);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        cand.push_back(p[j] + (mc + 1) * d0);
        cand.push_back(p[j] - (mc + 1) * d0);
      }
      for (double h : {d0 / 8.0, d0 / 32.0}) {
        cand.push_back(p[i] + h);
        cand.push_back(p[i] - h);
      }

      RefineScore best = current;
      double best_pos = p[i];
      for (double c : cand) {
        if (c < 0.0 || c > aperture || c == p[i]) continue;
        std::vector<double> trial = p;
        trial[i] = c;
        if (!spacing_ok(trial, d_min, aperture)) continue;
        const RefineScore s = refine_score(trial, wavelength, aperture, scenario, mu);
        if (s.dof < current.dof) continue;
        if (s.value > best.value + 1e-12 * std::max(1.0, std::abs(best.value))) {
          best = s;
          best_pos = c;
        }
      }
      if (best_pos != p[i]) {
        p[i] = best_pos;
        current = best;
        improved = true;
      }
    }
    if (!improved) break;
  }
  std::sort(p.begin(), p.end());
  return p;
}

}  // namespace

double coarray_objective(std::span<const double> positions, double wavelength, double aperture,
                         const SourceScenario& scenario, double mu_coarray) {
  return refine_score(positions, wavelength, aperture, &scenario, mu_coarray).value;
}

std::vector<double> coarray_refine(std::vector<double> positions, double wavelength, double aperture,
                                   const SourceScenario& scenario, double mu_coarray, double d_min) {
  if (!(mu_coarray >= 0.0)) throw Error(ErrorKind::InvalidArgument, "mu_coarray must be >= 0");
  return refine_impl(std::move(positions), wavelength, aperture, &scenario, mu_coarray, d_min);
}

DofLoss dof_loss_from_spacing(int n, double aperture, double d0, double d_min, int seeds,
                              std::uint64_t master_seed) {
  if (n < 2 || !(aperture > 0.0) || !(d0 > 0.0) || !(d_min >= 0.0) || seeds < 1)
    throw Error(ErrorKind::InvalidArgument, "invalid DOF-loss query");
  const double wavelength = 2.0 * d0;
  const bool feasible = d_min * (n - 1) <= aperture;
  // Seeds are feasible for d_min so both searches start from the same arrays.
  const double seed_gap = feasible ? d_min : 0.0;
  DofLoss out;
  out.seeds = seeds;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(s)));
    std::uniform_real_distribution<double> u(0.0, aperture - seed_gap * (n - 1));
    std::vector<double> p(static_cast<std::size_t>(n));
    for (double& x : p) x = u(rng);
    std::sort(p.begin(), p.end());
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] += seed_gap * i;
    p.front() = 0.0;
    p.back() = aperture;
    p = enforce_spacing(std::move(p), seed_gap, aperture);

    const auto free = refine_impl(p, wavelength, aperture, nullptr, 0.0, 0.0);
    out.unconstrained_dof = std::max(out.unconstrained_dof, dof_of(free, wavelength, aperture));
    if (feasible) {
      const auto constrained = refine_impl(p, wavelength, aperture, nullptr, 0.0, d_min);
      out.constrained_dof = std::max(out.constrained_dof, dof_of(constrained, wavelength, aperture));
    }
  }
  out.delta = out.unconstrained_dof - out.constrained_dof;
  return out;
}

DesignResult design_positions(const SourceScenario& scenario, int n, double aperture, double wavelength,
                              const DesignConfig& config, FrankWolfeLog* log) {
  DesignMeasure xi = frank_wolfe_design(scenario, n, aperture, wavelength, config, log);
  const double d0 = 0.5 * wavelength;
  std::vector<double> p = extract_positions(xi, n, config.d_min, aperture, d0);
  if (config.polish) p = polish_positions(std::move(p), wavelength, aperture, scenario, config.d_min, config.mu_sp);
  double mu = config.mu_coarray;
  int backoffs = 0;
  if (mu > 0.0) {
    const int needed = 2 * static_cast<int>(scenario.size()) + 1;
    std::vector<double> refined;
    for (;; ++backoffs, mu *= kCoarrayBackoff) {
      refined = enforce_spacing(coarray_refine(p, wavelength, aperture, scenario, mu, config.d_min), config.d_min,
                                aperture);
      if (dof_of(refined, wavelength, aperture) >= needed || backoffs == kMaxCoarrayBackoffs) break;
    }
    p = std::move(refined);
  }
  p = enforce_spacing(std::move(p), config.d_min, aperture);
  ArrayGeometry geom(std::move(p), wavelength, aperture);
  const double ld = fim_exact(geom, scenario).log_det();
  const int dof = coarray_dof(difference_coarray(geom));
  return DesignResult{std::move(xi), std::move(geom), ld, dof, mu, backoffs};
}

}  // namespace fasdoa
