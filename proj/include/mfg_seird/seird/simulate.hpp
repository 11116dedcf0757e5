#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "mfg_seird/error.hpp"
#include "mfg_seird/seird/model.hpp"

namespace mfg_seird::seird {

/// Space integrals of the compartments at time t.
struct Aggregates {
  double t = 0.0;
  double S = 0.0, E = 0.0, I = 0.0, R = 0.0, D = 0.0;
};

inline Aggregates aggregate(const CompartmentState& s) {
  Aggregates a{s.t};
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    a.S += s.S[i];
    a.E += s.E[i];
    a.I += s.I[i];
    a.R += s.R[i];
    a.D += s.D[i];
  }
  const double dx = s.grid.dx();
  a.S *= dx; a.E *= dx; a.I *= dx; a.R *= dx; a.D *= dx;
  return a;
}

struct Trajectory {
  PeriodicGrid grid;
  std::vector<double> mu;
  /// Full states at t = 0, snapshot_every, ..., t_end.
  std::vector<CompartmentState> snapshots;
  /// One entry per snapshot.
  std::vector<Aggregates> aggregates;
  /// Per node: first time I crosses the threshold (linear interpolation
  /// inside the step), empty if never.
  std::vector<std::optional<double>> first_passage;
  double threshold = 0.0;
  /// max over nodes and steps of |S+E+I+R+D - mu|.
  double max_conservation_error = 0.0;
  /// Aggregate I peak over every step, not just snapshots.
  double peak_infected = 0.0;
  double peak_time = 0.0;
};

/// Integrates from `init` to params.t_end.
inline Trajectory simulate(const DensityProfile& density, const EpidemicParams& params, CompartmentState init) {
  params.validate();
  density.validate();
  require(init.grid == density.grid, "simulate: initial state and density grids differ");
  const double dt_max = max_stable_dt(params, density.max());
  if (params.dt > dt_max * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "epidemic.dt = " << params.dt << " exceeds the stability bound " << dt_max;
    throw ConfigError(msg.str());
  }

  const PeriodicGrid& g = density.grid;
  const KernelProfile kernel = infection_kernel(g, params);
  SeirdIntegrator integrator(density, kernel, params);

  Trajectory traj{g, density.mu_x, {}, {}, {}};
  traj.threshold = params.first_passage_threshold;
  traj.first_passage.assign(g.size(), std::nullopt);

  auto track = [&](const CompartmentState& s) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      traj.max_conservation_error = std::max(traj.max_conservation_error, std::abs(s.total(i) - density.mu_x[i]));
    }
    const double total_i = aggregate(s).I;
    if (total_i > traj.peak_infected) {
      traj.peak_infected = total_i;
      traj.peak_time = s.t;
    }
  };
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (init.I[i] >= traj.threshold) traj.first_passage[i] = init.t;
  }
  track(init);
  traj.snapshots.push_back(init);
  traj.aggregates.push_back(aggregate(init));

  const std::size_t steps = params.total_steps();
  const std::size_t every = params.steps_per_snapshot();
  CompartmentState state = std::move(init);
  const double t0 = state.t;
  std::vector<double> prev_i;
  for (std::size_t k = 1; k <= steps; ++k) {
    prev_i = state.I;
    try {
      integrator.step(state, params.dt);
    } catch (const SolverError& e) {
      std::ostringstream msg;
      msg << e.what() << " at t = " << state.t;
      throw SolverError(msg.str());
    }
    // Avoid accumulating dt round-off in the time stamps.
    state.t = t0 + static_cast<double>(k) * params.dt;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (traj.first_passage[i] || state.I[i] < traj.threshold) continue;
      const double frac = (traj.threshold - prev_i[i]) / (state.I[i] - prev_i[i]);
      traj.first_passage[i] = state.t - params.dt + std::clamp(frac, 0.0, 1.0) * params.dt;
    }
    track(state);
    if (k % every == 0 || k == steps) {
      traj.snapshots.push_back(state);
      traj.aggregates.push_back(aggregate(state));
    }
  }
  return traj;
}

inline Trajectory simulate(const DensityProfile& density, const EpidemicParams& params) {
  params.validate();
  density.validate();
  return simulate(density, params, initial_state(density, params));
}

struct SummaryStats {
  double final_deaths = 0.0;
  double peak_infected = 0.0;
  double peak_time = 0.0;
  std::vector<std::optional<double>> first_passage;
  std::size_t reached_nodes = 0;
  /// Position of the earliest and latest first passage (circular mean over
  /// tied nodes); empty if no node is reached.
  std::optional<double> first_reached_x;
  std::optional<double> last_reached_x;
  double final_deaths_argmax_x = 0.0;
  /// max/min of final D over nodes (infinite if some node has no deaths).
  double final_deaths_ratio = 0.0;
};

namespace detail {

inline double circular_mean_where(const PeriodicGrid& g, const std::vector<std::optional<double>>& times, double value) {
  constexpr double kTwoPi = 6.283185307179586;
  double c = 0.0, sn = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (times[i] && *times[i] == value) {
      c += std::cos(kTwoPi * g.node(i));
      sn += std::sin(kTwoPi * g.node(i));
    }
  }
  const double x = std::atan2(sn, c) / kTwoPi;
  return x < 0.0 ? x + 1.0 : x;
}

}  // namespace detail

inline SummaryStats summary_stats(const Trajectory& traj) {
  require(!traj.snapshots.empty(), "summary_stats: empty trajectory");
  const CompartmentState& last = traj.snapshots.back();
  const PeriodicGrid& g = traj.grid;
  SummaryStats s;
  s.final_deaths = traj.aggregates.back().D;
  s.peak_infected = traj.peak_infected;
  s.peak_time = traj.peak_time;
  s.first_passage = traj.first_passage;

  double earliest = std::numeric_limits<double>::infinity();
  double latest = -earliest;
  for (const auto& fp : traj.first_passage) {
    if (!fp) continue;
    ++s.reached_nodes;
    earliest = std::min(earliest, *fp);
    latest = std::max(latest, *fp);
  }
  if (s.reached_nodes > 0) {
    s.first_reached_x = detail::circular_mean_where(g, traj.first_passage, earliest);
    s.last_reached_x = detail::circular_mean_where(g, traj.first_passage, latest);
  }

  const auto hi = std::max_element(last.D.begin(), last.D.end());
  const auto lo = std::min_element(last.D.begin(), last.D.end());
  s.final_deaths_argmax_x = g.node(static_cast<std::size_t>(hi - last.D.begin()));
  s.final_deaths_ratio = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
  return s;
}

}  // namespace mfg_seird::seird
