#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "mfg_seird/error.hpp"
#include "mfg_seird/io.hpp"
#include "mfg_seird/mfg/fixed_point.hpp"
#include "mfg_seird/scenario/config.hpp"
#include "mfg_seird/seird/simulate.hpp"

namespace mfg_seird::scenario {

/// File layout of one run directory.
struct RunArtifacts {
  fs::path dir;

  fs::path config_echo() const { return dir / "config.ini"; }
  fs::path density() const { return dir / "density.csv"; }
  fs::path mfg_density() const { return dir / "mfg_density.csv"; }
  fs::path mfg_marginal() const { return dir / "mfg_marginal.csv"; }
  fs::path mfg_value_policy() const { return dir / "mfg_value_policy.csv"; }
  fs::path mfg_summary() const { return dir / "mfg_summary.txt"; }
  fs::path trajectory() const { return dir / "trajectory.csv"; }
  fs::path aggregates() const { return dir / "aggregates.csv"; }
  fs::path first_passage() const { return dir / "first_passage.csv"; }
  fs::path matrix(std::size_t compartment) const {
    return dir / (std::string(io::kCompartments.at(compartment)) + ".csv");
  }
  fs::path summary() const { return dir / "summary.txt"; }
  fs::path failed_marker() const { return dir / "FAILED"; }
};

struct MfgStage {
  mfg::MfgParams params;
  mfg::MfgSolution solution;
  std::vector<std::pair<double, double>> enclosure_passes;
};

struct PipelineResult {
  RunArtifacts artifacts;
  std::optional<MfgStage> mfg;
  seird::DensityProfile density;
  seird::Trajectory trajectory;
  seird::SummaryStats summary;
};

namespace detail {

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

inline std::string optional_number(const std::optional<double>& v) { return v ? io::format_double(*v) : "none"; }

inline void write_key_values(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string text;
  for (const auto& [k, v] : kv) text += k + " = " + v + '\n';
  write_text(path, text);
}

// Runs `body`; on failure leaves a FAILED marker with the message.
template <class Body>
auto with_failure_marker(const RunArtifacts& art, Body&& body) {
  fs::create_directories(art.dir);
  fs::remove(art.failed_marker());
  try {
    return body();
  } catch (const std::exception& e) {
    write_text(art.failed_marker(), std::string(e.what()) + '\n');
    throw;
  }
}

}  // namespace detail

/// key = value report of a run (summary.txt, mfg_summary.txt).
inline std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

/// Solves the stationary MFG (optionally with adaptive h_max) and writes the
/// MFG artifacts into art.dir.
inline MfgStage solve_mfg_stage(const ScenarioConfig& cfg, const RunArtifacts& art) {
  MfgStage stage = [&]() -> MfgStage {
    if (!cfg.mfg.expand_hmax) return {cfg.mfg, mfg::mfg_fixed_point(cfg.mfg), {}};
    mfg::ExpandedSolution ex = mfg::expand_hmax(cfg.mfg);
    return {std::move(ex.params), std::move(ex.solution), std::move(ex.passes)};
  }();
  const mfg::MfgSolution& sol = stage.solution;
  io::write_density_field(art.mfg_density(), sol.density);
  io::write_spatial_density(art.mfg_marginal(), sol.marginal.grid, sol.marginal.mu_x);
  io::write_value_policy(art.mfg_value_policy(), sol.value, sol.policy);
  detail::write_key_values(
      art.mfg_summary(),
      {{"h_max", io::format_double(stage.params.h_max)},
       {"n_x", std::to_string(stage.params.n_x)},
       {"n_h", std::to_string(stage.params.n_h)},
       {"iterations", std::to_string(sol.iterations)},
       {"fixed_point_distance", io::format_double(sol.trace.back())},
       {"hjb_residual", io::format_double(sol.hjb_residual)},
       {"fp_residual", io::format_double(sol.fp_residual)},
       {"fp_min_before_clip", io::format_double(sol.fp_min_before_clip)},
       {"mass", io::format_double(mfg::mass(sol.density))},
       {"top_band_mass", io::format_double(mfg::top_band_mass(sol.density, stage.params.enclosure_band))},
       {"enclosure_passes", std::to_string(stage.enclosure_passes.size())}});
  return stage;
}

/// `solve-mfg`: MFG artifacts only.
inline MfgStage run_mfg_only(const ScenarioConfig& cfg) {
  const RunArtifacts art{cfg.output_dir};
  return detail::with_failure_marker(art, [&] {
    detail::write_text(art.config_echo(), echo_config(cfg));
    return solve_mfg_stage(cfg, art);
  });
}

/// Builds the epidemic density on the epidemic grid.
inline seird::DensityProfile epidemic_density(const ScenarioConfig& cfg, const std::optional<MfgStage>& stage) {
  const PeriodicGrid grid(cfg.epidemic.n_x);
  switch (cfg.density_source) {
    case DensitySource::uniform: return seird::DensityProfile::uniform(grid);
    case DensitySource::mfg: {
      const auto& m = stage.value().solution.marginal;
      return seird::resample_density(m.grid, m.mu_x, grid, seird::DensityProfile::Source::mfg);
    }
    case DensitySource::file: {
      const mfg::SpatialDensity d = io::read_spatial_density(cfg.density_file);
      for (double v : d.mu_x) require(v > 0.0, "[density] file: population density must be positive everywhere");
      require(std::abs(d.mass() - 1.0) <= 1e-8, "[density] file: density must have unit mass");
      return seird::resample_density(d.grid, d.mu_x, grid, seird::DensityProfile::Source::file);
    }
  }
  throw ConfigError("unknown density source");
}

inline void write_epidemic_artifacts(const RunArtifacts& art, const ScenarioConfig& cfg, const PipelineResult& r) {
  io::write_spatial_density(art.density(), r.density.grid, r.density.mu_x);
  io::write_trajectory_long(art.trajectory(), r.trajectory);
  for (std::size_t c = 0; c < 5; ++c) io::write_space_time(art.matrix(c), io::space_time(r.trajectory, c));

  std::vector<std::vector<double>> agg;
  for (const auto& a : r.trajectory.aggregates) agg.push_back({a.t, a.S, a.E, a.I, a.R, a.D});
  io::write_csv(art.aggregates(), {"t", "S", "E", "I", "R", "D"}, agg);

  std::vector<std::vector<double>> fp;
  for (std::size_t i = 0; i < r.trajectory.grid.size(); ++i) {
    if (r.trajectory.first_passage[i]) fp.push_back({r.trajectory.grid.node(i), *r.trajectory.first_passage[i]});
  }
  io::write_csv(art.first_passage(), {"x", "t"}, fp);

  const seird::SummaryStats& s = r.summary;
  detail::write_key_values(art.summary(),
                           {{"scenario", cfg.name},
                            {"density_source", to_string(cfg.density_source)},
                            {"beta_mode", cfg.epidemic.beta_mode == seird::BetaMode::constant ? "constant" : "density"},
                            {"final_deaths", io::format_double(s.final_deaths)},
                            {"peak_infected", io::format_double(s.peak_infected)},
                            {"peak_time", io::format_double(s.peak_time)},
                            {"first_passage_threshold", io::format_double(r.trajectory.threshold)},
                            {"reached_nodes", std::to_string(s.reached_nodes)},
                            {"first_passage_earliest_x", detail::optional_number(s.first_reached_x)},
                            {"first_passage_latest_x", detail::optional_number(s.last_reached_x)},
                            {"final_deaths_argmax_x", io::format_double(s.final_deaths_argmax_x)},
                            {"final_deaths_max_min_ratio", io::format_double(s.final_deaths_ratio)},
                            {"density_argmax_x", io::format_double(r.density.grid.node(static_cast<std::size_t>(
                                                     std::max_element(r.density.mu_x.begin(), r.density.mu_x.end()) -
                                                     r.density.mu_x.begin())))},
                            {"max_conservation_error", io::format_double(r.trajectory.max_conservation_error)}});
}

/// Density (uniform, MFG marginal or file) followed by the epidemic run;
/// every artifact is written to cfg.output_dir.
inline PipelineResult run_pipeline(const ScenarioConfig& cfg) {
  const RunArtifacts art{cfg.output_dir};
  return detail::with_failure_marker(art, [&] {
    detail::write_text(art.config_echo(), echo_config(cfg));
    std::optional<MfgStage> stage;
    if (cfg.density_source == DensitySource::mfg) stage = solve_mfg_stage(cfg, art);
    seird::DensityProfile density = epidemic_density(cfg, stage);
    seird::Trajectory traj = seird::simulate(density, cfg.epidemic);
    seird::SummaryStats stats = seird::summary_stats(traj);
    PipelineResult r{art, std::move(stage), std::move(density), std::move(traj), std::move(stats)};
    write_epidemic_artifacts(art, cfg, r);
    return r;
  });
}

// ---- comparison -------------------------------------------------------

/// Final-time D and the density read back from a run directory.
struct RunSnapshot {
  std::vector<double> x;
  std::vector<double> mu;
  double t_end = 0.0;
  std::array<std::vector<double>, 5> final_state;
};

inline RunSnapshot load_run(const fs::path& dir) {
  const RunArtifacts art{dir};
  require(fs::is_directory(dir), "not a run directory: " + dir.string());
  require(!fs::exists(art.failed_marker()), "run failed (FAILED marker present): " + dir.string());
  RunSnapshot s;
  const mfg::SpatialDensity d = io::read_spatial_density(art.density());
  s.mu = d.mu_x;
  for (std::size_t c = 0; c < 5; ++c) {
    const io::SpaceTimeMatrix m = io::read_space_time(art.matrix(c));
    require(!m.t.empty(), art.matrix(c).string() + ": no snapshots");
    if (c == 0) {
      s.x = m.x;
      s.t_end = m.t.back();
    }
    require(m.x == s.x, art.matrix(c).string() + ": grid differs from the other compartments");
    s.final_state[c] = m.values.back();
  }
  require(s.x.size() == s.mu.size(), dir.string() + ": density and trajectory grids differ");
  return s;
}

/// Share of final deaths within torus distance `radius` of argmax mu.
inline double localization_ratio(const std::vector<double>& x, const std::vector<double>& mu,
                                  const std::vector<double>& deaths, double radius = 0.1) {
  const std::size_t peak = static_cast<std::size_t>(std::max_element(mu.begin(), mu.end()) - mu.begin());
  double near = 0.0, total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    total += deaths[i];
    if (torus_distance(x[i], x[peak]) <= radius + 1e-12) near += deaths[i];
  }
  return total > 0.0 ? near / total : 0.0;
}

inline double spatial_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double a : v) mean += a;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double a : v) var += (a - mean) * (a - mean);
  return var / static_cast<double>(v.size());
}

struct CompareReport {
  /// Sup-norm gap of the final S, E, I, R, D fields.
  std::array<double, 5> final_gap{};
  double localization_a = 0.0;
  double localization_b = 0.0;
  double deaths_variance_a = 0.0;
  double deaths_variance_b = 0.0;
};

inline CompareReport compare_runs(const RunSnapshot& a, const RunSnapshot& b) {
  if (a.x.size() != b.x.size()) throw ConfigError("compare: runs use different grids");
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    if (std::abs(a.x[i] - b.x[i]) > 1e-12) throw ConfigError("compare: runs use different grids");
  }
  if (std::abs(a.t_end - b.t_end) > 1e-9) throw ConfigError("compare: runs use different horizons");
  CompareReport r;
  for (std::size_t c = 0; c < 5; ++c) {
    for (std::size_t i = 0; i < a.x.size(); ++i) {
      r.final_gap[c] = std::max(r.final_gap[c], std::abs(a.final_state[c][i] - b.final_state[c][i]));
    }
  }
  r.localization_a = localization_ratio(a.x, a.mu, a.final_state[4]);
  r.localization_b = localization_ratio(b.x, b.mu, b.final_state[4]);
  r.deaths_variance_a = spatial_variance(a.final_state[4]);
  r.deaths_variance_b = spatial_variance(b.final_state[4]);
  return r;
}

inline CompareReport compare_runs(const fs::path& a, const fs::path& b) { return compare_runs(load_run(a), load_run(b)); }

inline std::string format_report(const CompareReport& r) {
  std::ostringstream os;
  for (std::size_t c = 0; c < 5; ++c) os << "final_gap_" << io::kCompartments[c] << " = " << io::format_double(r.final_gap[c]) << '\n';
  os << "localization_a = " << io::format_double(r.localization_a) << '\n'
     << "localization_b = " << io::format_double(r.localization_b) << '\n'
     << "final_deaths_variance_a = " << io::format_double(r.deaths_variance_a) << '\n'
     << "final_deaths_variance_b = " << io::format_double(r.deaths_variance_b) << '\n';
  return os.str();
}

}  // namespace mfg_seird::scenario
