#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mfg_seird/mfg_seird.hpp"

using namespace mfg_seird;
using namespace mfg_seird::scenario;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mfg_seird_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string config_error(const std::string& text, const fs::path& base = fs::temp_directory_path()) {
  try {
    parse_config_text(text, base);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

// Small uniform-density run that finishes in well under a second.
std::string quick_run_config(const fs::path& out) {
  return "[density]\nsource = uniform\n[epidemic]\nn_x = 64\nt_end = 10\n[output]\nname = quick\ndir = " +
         out.string() + "\n";
}

}  // namespace

TEST(Config, EmptySectionsGiveReferenceDefaults) {
  const ScenarioConfig c = parse_config_text("[density]\n[mfg]\n[epidemic]\n[output]\n", fs::temp_directory_path());
  EXPECT_EQ(c.epidemic.theta, 0.25);
  EXPECT_EQ(c.epidemic.lambda_rec, 0.075);
  EXPECT_EQ(c.epidemic.delta, 0.025);
  EXPECT_EQ(c.epidemic.beta0, 0.9);
  EXPECT_EQ(c.epidemic.chi, 0.04);
  EXPECT_EQ(c.epidemic.i0, 0.01);
  EXPECT_EQ(c.epidemic.r0, 0.1);
  EXPECT_EQ(c.epidemic.center, 0.3);
  EXPECT_EQ(c.epidemic.t_end, 100.0);
  EXPECT_EQ(c.mfg.alpha, 0.5);
  EXPECT_EQ(c.mfg.xi_spill, 0.1);
  EXPECT_EQ(c.mfg.gamma, 0.15);
  EXPECT_EQ(c.mfg.sigma_h, 0.7);
  EXPECT_EQ(c.mfg.eps_x, 0.5);
  EXPECT_EQ(c.mfg.zeta, 0.15);
  EXPECT_EQ(c.mfg.p_crra, 0.1);
  EXPECT_EQ(c.mfg.h_max, 15.0);
  EXPECT_EQ(c.mfg.eta.eps1, 0.3);
  EXPECT_EQ(c.mfg.amenity, mfg::Amenity::sin_peak());
  EXPECT_EQ(c.density_source, DensitySource::mfg);
  EXPECT_TRUE(c.output_dir.is_absolute());
}

TEST(Config, DensityDependentBeta) {
  const ScenarioConfig c = parse_config_text("[epidemic]\nbeta_mode = density\n", fs::temp_directory_path());
  EXPECT_EQ(c.epidemic.beta_mode, seird::BetaMode::density);
  EXPECT_NEAR(seird::beta_of_mu(2.0, c.epidemic), 0.9 * std::sqrt(6.0) / std::sqrt(2.0), 1e-15);
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_NE(config_error("[mfg]\nrh0 = 1\n").find("rh0"), std::string::npos);
  EXPECT_NE(config_error("[mfg]\nrho = fast\n").find("[mfg] rho"), std::string::npos);
  EXPECT_NE(config_error("[epidemic]\nn_x = 12.5\n").find("[epidemic] n_x"), std::string::npos);
  EXPECT_NE(config_error("[epidemic]\nchi = 0.7\n").find("epidemic.chi"), std::string::npos);
  EXPECT_NE(config_error("[epidemic]\nbeta_mode = linear\n").find("constant|density"), std::string::npos);
  EXPECT_NE(config_error("[mfg]\nexpand_hmax = maybe\n").find("expand_hmax"), std::string::npos);
  EXPECT_NE(config_error("[plots]\nx = 1\n").find("[plots]"), std::string::npos);
  EXPECT_NE(config_error("[mfg]\nrho = 1\nrho = 2\n").find("duplicate"), std::string::npos);
  EXPECT_NE(config_error("[mfg]\nalpha = 0.95\n").find("alpha"), std::string::npos);
}

TEST(Config, ReferencedFilesMustExist) {
  EXPECT_NE(config_error("[density]\nsource = file\nfile = nope.csv\n").find("does not exist"), std::string::npos);
  EXPECT_NE(config_error("[density]\nsource = file\n").find("requires file"), std::string::npos);
  EXPECT_NE(config_error("[mfg]\namenity = file\namenity_file = nope.csv\n").find("amenity_file"), std::string::npos);
}

TEST(Config, RelativePathsResolveAgainstConfigFile) {
  const fs::path dir = scratch_dir("config_paths");
  fs::create_directories(dir / "data");
  write_file(dir / "data" / "amenity.csv", "x,A\n0,1\n0.5,2\n");
  write_file(dir / "run.ini",
             "[mfg]\namenity = file\namenity_file = data/amenity.csv ; local table\n[output]\ndir = results\n");
  const ScenarioConfig c = parse_config(dir / "run.ini");
  EXPECT_EQ(c.amenity_file, (dir / "data" / "amenity.csv").lexically_normal());
  EXPECT_EQ(c.output_dir, (dir / "results").lexically_normal());
  EXPECT_NEAR(c.mfg.amenity(0.25), 1.5, 1e-15);
}

TEST(Config, EchoRoundTrip) {
  const fs::path dir = scratch_dir("config_echo");
  write_file(dir / "amenity.csv", "x,A\n0,1\n0.5,2\n");
  write_file(dir / "run.ini",
             "# comment\n[density]\nsource = uniform\n[mfg]\nrho = 0.1\namenity = file\namenity_file = amenity.csv\n"
             "amenity_scale = 1.25\nn_x = 48\n[epidemic]\ndt = 0.005\nbeta_mode = density\nbeta_argument = living\n"
             "[output]\nname = echo\n");
  const ScenarioConfig c = parse_config(dir / "run.ini");
  write_file(dir / "echo.ini", echo_config(c));
  const ScenarioConfig again = parse_config(dir / "echo.ini");
  EXPECT_EQ(again, c);
  EXPECT_EQ(echo_config(again), echo_config(c));
}

TEST(Config, BuiltinScenarios) {
  const ScenarioConfig f3 = builtin_scenario("fig3", "out3");
  EXPECT_EQ(f3.density_source, DensitySource::uniform);
  EXPECT_EQ(f3.epidemic.beta_mode, seird::BetaMode::constant);
  const ScenarioConfig f4 = builtin_scenario("fig4", "out4");
  EXPECT_EQ(f4.density_source, DensitySource::mfg);
  EXPECT_EQ(f4.epidemic.beta_mode, seird::BetaMode::constant);
  const ScenarioConfig f5 = builtin_scenario("fig5", "out5");
  EXPECT_EQ(f5.density_source, DensitySource::mfg);
  EXPECT_EQ(f5.epidemic.beta_mode, seird::BetaMode::density);
  EXPECT_THROW(builtin_scenario("fig6", "x"), ConfigError);
}

TEST(Io, ShortestRoundTripNumbers) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int k = 0; k < 10000; ++k) {
    const double v = U(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(io::parse_double(io::format_double(v), "v"), v);
  }
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_THROW(io::parse_double("1.5x", "v"), ConfigError);
  EXPECT_THROW(io::parse_double("", "v"), ConfigError);
  EXPECT_THROW(io::parse_double("nan", "v"), ConfigError);
  EXPECT_EQ(io::parse_double(" +2.5 ", "v"), 2.5);
}

TEST(Io, DensityFieldRoundTrip) {
  const fs::path dir = scratch_dir("io_density");
  const RectGrid g(PeriodicGrid(12), 9, 7.5);
  mfg::DensityField mu(g);
  for (std::size_t n = 0; n < g.size(); ++n) mu.values[n] = std::sin(0.37 * static_cast<double>(n)) + 1.0;
  io::write_density_field(dir / "mu.csv", mu);
  const mfg::DensityField back = io::read_density_field(dir / "mu.csv");
  EXPECT_EQ(back.grid, g);
  EXPECT_EQ(back.values, mu.values);

  std::vector<double> m(g.nx());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = 1.0 / 3.0 + 0.01 * static_cast<double>(i);
  io::write_spatial_density(dir / "mx.csv", g.spatial(), m);
  const mfg::SpatialDensity sd = io::read_spatial_density(dir / "mx.csv");
  EXPECT_EQ(sd.grid, g.spatial());
  EXPECT_EQ(sd.mu_x, m);
}

TEST(Io, MalformedCsvRejected) {
  const fs::path dir = scratch_dir("io_bad");
  write_file(dir / "a.csv", "x,mu_x\n0,1\n0.5\n");
  EXPECT_THROW(io::read_spatial_density(dir / "a.csv"), ConfigError);
  write_file(dir / "b.csv", "x,mu_x\n0,1\n0.3,1\n0.5,1\n0.6,1\n0.7,1\n0.8,1\n0.85,1\n0.9,1\n");
  EXPECT_THROW(io::read_spatial_density(dir / "b.csv"), ConfigError);
  EXPECT_THROW(io::read_spatial_density(dir / "missing.csv"), ConfigError);
}

TEST(Pipeline, ArtifactsExistAndParseBack) {
  const fs::path dir = scratch_dir("pipeline_artifacts");
  const PipelineResult r = run_pipeline(parse_config_text(quick_run_config(dir / "run"), dir));
  const RunArtifacts& a = r.artifacts;
  EXPECT_FALSE(fs::exists(a.failed_marker()));
  EXPECT_EQ(parse_config(a.config_echo()).epidemic.t_end, 10.0);
  EXPECT_EQ(io::read_spatial_density(a.density()).mu_x, r.density.mu_x);
  const io::CsvTable traj = io::read_csv(a.trajectory());
  EXPECT_EQ(traj.header, (std::vector<std::string>{"t", "x", "S", "E", "I", "R", "D"}));
  EXPECT_EQ(traj.rows.size(), r.trajectory.snapshots.size() * 64);
  for (std::size_t c = 0; c < 5; ++c) {
    const io::SpaceTimeMatrix m = io::read_space_time(a.matrix(c));
    ASSERT_EQ(m.t.size(), r.trajectory.snapshots.size());
    for (std::size_t s = 0; s < m.t.size(); ++s) {
      EXPECT_EQ(m.t[s], r.trajectory.snapshots[s].t);
      EXPECT_EQ(m.values[s], *r.trajectory.snapshots[s].fields()[c]);
    }
  }
  const auto summary = read_key_values(a.summary());
  EXPECT_EQ(io::parse_double(summary.at("final_deaths"), "final_deaths"), r.summary.final_deaths);
  EXPECT_EQ(io::parse_double(summary.at("peak_time"), "peak_time"), r.summary.peak_time);
  EXPECT_TRUE(summary.count("final_deaths_argmax_x"));
  EXPECT_EQ(io::read_csv(a.first_passage()).rows.size(), r.summary.reached_nodes);
}

TEST(Pipeline, DeterministicBytes) {
  const fs::path dir = scratch_dir("pipeline_determinism");
  run_pipeline(parse_config_text(quick_run_config(dir / "a"), dir));
  run_pipeline(parse_config_text(quick_run_config(dir / "b"), dir));
  for (const char* f : {"density.csv", "trajectory.csv", "S.csv", "I.csv", "D.csv", "summary.txt", "first_passage.csv"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
}

TEST(Pipeline, FileDensitySource) {
  const fs::path dir = scratch_dir("pipeline_file");
  const PeriodicGrid g(32);
  std::vector<double> mu(g.size());
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += (mu[i] = 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * g.node(i)));
  for (double& v : mu) v /= s * g.dx();
  io::write_spatial_density(dir / "mu.csv", g, mu);
  const PipelineResult r = run_pipeline(parse_config_text(
      "[density]\nsource = file\nfile = mu.csv\n[epidemic]\nn_x = 64\nt_end = 5\n[output]\ndir = run\n", dir));
  EXPECT_EQ(r.density.source, seird::DensityProfile::Source::file);
  EXPECT_NEAR(r.density.mu_x[0], mu[0], 1e-12);
  EXPECT_NEAR(r.density.mu_x[1], 0.5 * (mu[0] + mu[1]), 1e-3);
}

TEST(Pipeline, MfgSourceWritesFields) {
  const fs::path dir = scratch_dir("pipeline_mfg");
  const PipelineResult r = run_pipeline(parse_config_text(
      "[mfg]\nn_x = 16\nn_h = 16\n[epidemic]\nn_x = 64\nt_end = 2\n[output]\ndir = run\n", dir));
  ASSERT_TRUE(r.mfg.has_value());
  const mfg::DensityField mu = io::read_density_field(r.artifacts.mfg_density());
  EXPECT_EQ(mu.values, r.mfg->solution.density.values);
  EXPECT_EQ(io::read_csv(r.artifacts.mfg_value_policy()).rows.size(), 16u * 16u);
  EXPECT_NEAR(r.density.grid.dx() * std::accumulate(r.density.mu_x.begin(), r.density.mu_x.end(), 0.0), 1.0, 1e-12);
}

TEST(Pipeline, SolverFailureLeavesMarker) {
  const fs::path dir = scratch_dir("pipeline_failed");
  const ScenarioConfig c =
      parse_config_text("[mfg]\nn_x = 16\nn_h = 16\nmax_iters = 1\n[output]\ndir = run\n", dir);
  EXPECT_THROW(run_pipeline(c), SolverError);
  EXPECT_TRUE(fs::exists(dir / "run" / "FAILED"));
  EXPECT_TRUE(fs::exists(dir / "run" / "config.ini"));
  EXPECT_THROW(load_run(dir / "run"), ConfigError);
}

TEST(Compare, SelfComparisonHasZeroGaps) {
  const fs::path dir = scratch_dir("compare_self");
  run_pipeline(parse_config_text(quick_run_config(dir / "a"), dir));
  const CompareReport r = compare_runs(dir / "a", dir / "a");
  for (double g : r.final_gap) EXPECT_EQ(g, 0.0);
  EXPECT_EQ(r.localization_a, r.localization_b);
  EXPECT_GT(r.localization_a, 0.0);
}

TEST(Compare, GridMismatchRejected) {
  const fs::path dir = scratch_dir("compare_mismatch");
  run_pipeline(parse_config_text(quick_run_config(dir / "a"), dir));
  run_pipeline(parse_config_text(
      "[density]\nsource = uniform\n[epidemic]\nn_x = 128\nt_end = 10\n[output]\ndir = " + (dir / "b").string(), dir));
  EXPECT_THROW(compare_runs(dir / "a", dir / "b"), ConfigError);
}

TEST(Compare, LocalizationRatio) {
  const std::vector<double> x{0.0, 0.25, 0.5, 0.75};
  const std::vector<double> mu{1.0, 2.0, 1.0, 0.5};
  EXPECT_DOUBLE_EQ(localization_ratio(x, mu, {1.0, 2.0, 1.0, 0.0}), 0.5);
}

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MFG_SEIRD_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli");
  write_file(dir / "ok.ini", quick_run_config(dir / "ok"));
  write_file(dir / "bad.ini", "[epidemic]\nchi = -1\n");
  write_file(dir / "diverge.ini", "[mfg]\nn_x = 16\nn_h = 16\nmax_iters = 1\n[output]\ndir = diverge\n");

  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("run --config " + (dir / "ok.ini").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "summary.txt"));
  EXPECT_EQ(run_cli("run --config " + (dir / "bad.ini").string()), 1);
  EXPECT_EQ(run_cli("run --config " + (dir / "missing.ini").string()), 1);
  EXPECT_EQ(run_cli("solve-mfg --config " + (dir / "diverge.ini").string()), 2);
  EXPECT_EQ(run_cli("run --config " + (dir / "diverge.ini").string()), 2);
  EXPECT_EQ(run_cli("run --scenario fig7 --out " + (dir / "x").string()), 1);
  EXPECT_EQ(run_cli("compare " + (dir / "ok").string() + " " + (dir / "ok").string()), 0);
  EXPECT_EQ(run_cli("compare " + (dir / "ok").string() + " " + (dir / "diverge").string()), 1);
}

TEST(Cli, BuiltinScenarioRun) {
  const fs::path dir = scratch_dir("cli_fig3");
  EXPECT_EQ(run_cli("run --scenario fig3 --out " + (dir / "fig3").string()), 0);
  const auto s = read_key_values(dir / "fig3" / "summary.txt");
  EXPECT_EQ(s.at("scenario"), "fig3");
  EXPECT_EQ(s.at("density_source"), "uniform");
}
