#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "mfg_seird/error.hpp"
#include "mfg_seird/mfg/fokker_planck.hpp"
#include "mfg_seird/mfg/hjb.hpp"

namespace mfg_seird::mfg {

struct MfgSolution {
  ValueField value;
  DensityField density;
  PolicyField policy;
  SpatialDensity marginal;
  /// Spillover average F(x) the returned value/policy were computed with.
  std::vector<double> interaction;
  /// ||FP(HJB(mu_k)) - mu_k||_1 per outer iteration.
  std::vector<double> trace;
  double hjb_residual = 0.0;
  double fp_residual = 0.0;
  double fp_min_before_clip = 0.0;
  std::size_t iterations = 0;
};

/// Quadrature L1 distance between two densities on the same grid.
inline double l1_distance(const DensityField& a, const DensityField& b) {
  const RectGrid& g = a.grid;
  double s = 0.0;
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.nh(); ++j) s += std::abs(a(i, j) - b(i, j)) * g.h_weight(j);
  }
  return s * g.dx();
}

namespace detail {

inline std::string format_trace(const std::vector<double>& trace) {
  std::ostringstream os;
  os << " (iterations " << trace.size() << ", last distances:";
  const std::size_t from = trace.size() > 8 ? trace.size() - 8 : 0;
  for (std::size_t k = from; k < trace.size(); ++k) os << ' ' << trace[k];
  os << ')';
  return os.str();
}

}  // namespace detail

/// Damped fixed point mu <- (1 - theta) mu + theta FP(HJB(mu)), started from
/// the uniform density and V = 0. Converged when the undamped map moves mu
/// by at most tol_fixed_point in L1; the returned density is that last
/// undamped Fokker-Planck solution.
inline MfgSolution mfg_fixed_point(const MfgParams& params) {
  params.validate();
  const RectGrid g = params.grid();
  DensityField mu = uniform_density(g);
  ValueField V(g);
  std::vector<double> trace;

  constexpr std::size_t kStagnationWindow = 20;
  for (std::size_t k = 1; k <= params.max_iters; ++k) {
    const ControlledGenerator gen = ControlledGenerator::for_density(params, mu);
    HjbResult hjb = hjb_solve(gen, V);
    FpResult fp = fp_solve(gen, hjb.policy);
    const double dist = l1_distance(fp.density, mu);
    trace.push_back(dist);
    if (!std::isfinite(dist)) throw SolverError("mfg_fixed_point: non-finite iterate" + detail::format_trace(trace));

    if (dist <= params.tol_fixed_point) {
      MfgSolution sol{std::move(hjb.value), std::move(fp.density), std::move(hjb.policy),
                      SpatialDensity{g.spatial(), {}}, gen.interaction(), std::move(trace)};
      sol.marginal = x_marginal(sol.density);
      sol.hjb_residual = hjb.residual;
      sol.fp_residual = fp.residual;
      sol.fp_min_before_clip = fp.min_before_clip;
      sol.iterations = k;
      return sol;
    }
    if (trace.size() > kStagnationWindow) {
      const double progress = trace[trace.size() - 1 - kStagnationWindow] - dist;
      if (progress < 1e-3 * params.tol_fixed_point) {
        throw SolverError("mfg_fixed_point: stagnation" + detail::format_trace(trace));
      }
    }

    for (std::size_t n = 0; n < mu.values.size(); ++n) {
      mu.values[n] = (1.0 - params.damping) * mu.values[n] + params.damping * fp.density.values[n];
    }
    V = std::move(hjb.value);
  }
  throw SolverError("mfg_fixed_point: iteration limit reached" + detail::format_trace(trace));
}

/// Mass of the density in the top `band` fraction of [0, h_max].
inline double top_band_mass(const DensityField& mu, double band) {
  const RectGrid& g = mu.grid;
  const double cut = (1.0 - band) * g.h_max();
  double s = 0.0;
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.nh(); ++j) {
      if (g.h(j) >= cut - 1e-12 * g.h_max()) s += mu(i, j) * g.h_weight(j);
    }
  }
  return s * g.dx();
}

struct ExpandedSolution {
  MfgParams params;
  MfgSolution solution;
  /// (h_max, top-band mass) for every pass.
  std::vector<std::pair<double, double>> passes;
};

/// Re-solves with doubled h_max (and n_h, keeping dh) until the top band
/// holds less than enclosure_tol of the mass.
inline ExpandedSolution expand_hmax(MfgParams params) {
  params.validate();
  const double cap = params.hmax_cap_factor * params.h_max;
  std::vector<std::pair<double, double>> passes;
  for (;;) {
    MfgSolution sol = mfg_fixed_point(params);
    const double band = top_band_mass(sol.density, params.enclosure_band);
    passes.emplace_back(params.h_max, band);
    if (band < params.enclosure_tol) return {params, std::move(sol), std::move(passes)};
    if (2.0 * params.h_max > cap * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "density not enclosed: top-band mass " << band << " at h_max = " << params.h_max
          << " (cap " << cap << ")";
      throw SolverError(msg.str());
    }
    params.h_max *= 2.0;
    params.n_h = 2 * (params.n_h - 1) + 1;
  }
}

}  // namespace mfg_seird::mfg
