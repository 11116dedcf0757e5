#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg_seird/error.hpp"
#include "mfg_seird/torus.hpp"

namespace mfg_seird::seird {

enum class BetaMode { constant, density };

/// Which density feeds a density-dependent transmission rate: the static
/// population mu(x), or the living population mu(x) - D(t, x).
enum class BetaArgument { population, living };

/// Epidemic rates (1/day), initial cluster and integration controls.
struct EpidemicParams {
  double theta = 0.25;
  double lambda_rec = 0.075;
  double delta = 0.025;
  BetaMode beta_mode = BetaMode::constant;
  BetaArgument beta_argument = BetaArgument::population;
  double beta0 = 0.9;
  double chi = 0.04;
  double i0 = 0.01;
  double r0 = 0.1;
  double center = 0.3;
  double t_end = 100.0;
  double dt = 0.01;
  double snapshot_every = 0.5;
  std::size_t n_x = 512;
  /// Mollification widths in grid cells.
  double kernel_smoothing_cells = 2.0;
  double cluster_smoothing_cells = 2.0;
  double first_passage_threshold = 1e-4;

  void validate() const {
    require(theta > 0.0 && lambda_rec > 0.0 && delta > 0.0, "epidemic rates theta, lambda_rec, delta must be positive");
    require(beta0 > 0.0, "epidemic.beta0 must be positive");
    require(chi > 0.0 && chi < 0.5, "epidemic.chi must lie in (0, 1/2)");
    require(i0 > 0.0, "epidemic.i0 must be positive");
    require(r0 > 0.0 && r0 < 0.5, "epidemic.r0 must lie in (0, 1/2)");
    require(center >= 0.0 && center < 1.0, "epidemic.center must lie in [0, 1)");
    require(t_end > 0.0, "epidemic.t_end must be positive");
    require(dt > 0.0, "epidemic.dt must be positive");
    require(snapshot_every >= dt, "epidemic.snapshot_every must be >= dt");
    const double ratio = snapshot_every / dt;
    require(std::abs(ratio - std::round(ratio)) < 1e-9 * ratio, "epidemic.snapshot_every must be a multiple of dt");
    const double steps = t_end / dt;
    require(std::abs(steps - std::round(steps)) < 1e-9 * steps, "epidemic.t_end must be a multiple of dt");
    require(n_x >= PeriodicGrid::kMinNodes, "epidemic.n_x must be >= 8");
    require(kernel_smoothing_cells >= 0.0 && cluster_smoothing_cells >= 0.0, "smoothing widths must be nonnegative");
    require(first_passage_threshold > 0.0, "epidemic.first_passage_threshold must be positive");
  }

  std::size_t steps_per_snapshot() const { return static_cast<std::size_t>(std::llround(snapshot_every / dt)); }
  std::size_t total_steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }

  friend bool operator==(const EpidemicParams&, const EpidemicParams&) = default;
};

inline double beta_of_mu(double mu_val, const EpidemicParams& p) {
  if (mu_val < 0.0) throw std::domain_error("beta_of_mu: negative density");
  if (p.beta_mode == BetaMode::constant) return p.beta0;
  return p.beta0 * std::sqrt(mu_val * (1.0 + mu_val)) / std::sqrt(2.0);
}

/// Largest admissible time step for densities bounded by mu_max.
inline double max_stable_dt(const EpidemicParams& p, double mu_max) {
  const double beta_max = beta_of_mu(std::max(mu_max, 0.0), p);
  return 0.1 / std::max({p.theta, p.lambda_rec + p.delta, beta_max});
}

/// Exogenous population density on the epidemic grid.
struct DensityProfile {
  enum class Source { uniform, mfg, file };

  PeriodicGrid grid;
  std::vector<double> mu_x;
  Source source = Source::uniform;

  static DensityProfile uniform(const PeriodicGrid& g) { return {g, std::vector<double>(g.size(), 1.0), Source::uniform}; }

  /// Validates positivity and, for non-uniform sources, unit mass.
  void validate() const {
    require(mu_x.size() == grid.size(), "density length does not match grid");
    double sum = 0.0;
    for (double m : mu_x) {
      require(std::isfinite(m) && m > 0.0, "population density must be positive everywhere");
      sum += m;
    }
    if (source != Source::uniform) {
      const double mass = sum * grid.dx();
      require(std::abs(mass - 1.0) <= 1e-8, "population density must have unit mass, got " + std::to_string(mass));
    }
  }

  double max() const { return *std::max_element(mu_x.begin(), mu_x.end()); }
  double min() const { return *std::min_element(mu_x.begin(), mu_x.end()); }
};

inline std::string to_string(DensityProfile::Source s) {
  switch (s) {
    case DensityProfile::Source::uniform: return "uniform";
    case DensityProfile::Source::mfg: return "mfg";
    case DensityProfile::Source::file: return "file";
  }
  return "?";
}

/// Resamples periodic node values onto `to` by linear interpolation and
/// rescales to unit mass.
inline DensityProfile resample_density(const PeriodicGrid& from, const std::vector<double>& values,
                                       const PeriodicGrid& to, DensityProfile::Source source) {
  require(values.size() == from.size(), "density length does not match its grid");
  DensityProfile out{to, std::vector<double>(to.size()), source};
  if (from == to) {
    out.mu_x = values;
  } else {
    for (std::size_t i = 0; i < to.size(); ++i) out.mu_x[i] = periodic_interpolate(from, values, to.node(i));
  }
  double sum = 0.0;
  for (double m : out.mu_x) sum += m;
  const double scale = 1.0 / (sum * to.dx());
  for (double& m : out.mu_x) m *= scale;
  return out;
}

}  // namespace mfg_seird::seird
