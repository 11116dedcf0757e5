#pragma once

// Spatial SEIRD system on the torus with nonlocal incidence
//   inc = beta(.) S / (mu - D) * (K_chi * I)
//   S' = -inc, E' = inc - theta E, I' = theta E - (lambda + delta) I,
//   R' = lambda I, D' = delta I,
// integrated with classical RK4 at fixed step.

#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "mfg_seird/error.hpp"
#include "mfg_seird/seird/params.hpp"
#include "mfg_seird/torus.hpp"

namespace mfg_seird::seird {

struct CompartmentState {
  PeriodicGrid grid;
  std::vector<double> S, E, I, R, D;
  double t = 0.0;

  explicit CompartmentState(PeriodicGrid g)
      : grid(g), S(g.size(), 0.0), E(g.size(), 0.0), I(g.size(), 0.0), R(g.size(), 0.0), D(g.size(), 0.0) {}

  std::array<std::vector<double>*, 5> fields() { return {&S, &E, &I, &R, &D}; }
  std::array<const std::vector<double>*, 5> fields() const { return {&S, &E, &I, &R, &D}; }

  double total(std::size_t i) const { return S[i] + E[i] + I[i] + R[i] + D[i]; }
};

inline KernelProfile infection_kernel(const PeriodicGrid& grid, const EpidemicParams& p) {
  return build_infection_kernel(grid, p.chi, p.kernel_smoothing_cells * grid.dx());
}

namespace detail {

inline double transmission(double mu, double dead, const EpidemicParams& p) {
  return beta_of_mu(p.beta_argument == BetaArgument::living ? mu - dead : mu, p);
}

// Shared by incidence() and the integrator: convolved = K * I.
inline void incidence_from(const std::vector<double>& mu, const std::vector<double>& S, const std::vector<double>& D,
                           const std::vector<double>& convolved, const EpidemicParams& p, std::vector<double>& out) {
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double living = mu[i] - D[i];
    if (!(living >= 1e-12)) {
      std::ostringstream msg;
      msg << "population exhausted at node " << i << " (mu - D = " << living << ")";
      throw SolverError(msg.str());
    }
    out[i] = transmission(mu[i], D[i], p) * S[i] / living * convolved[i];
  }
}

}  // namespace detail

inline ScalarField incidence(const CompartmentState& state, const DensityProfile& density, const KernelProfile& kernel,
                             const EpidemicParams& p) {
  require(state.grid == density.grid, "incidence: state and density grids differ");
  const ScalarField conv = periodic_convolve(kernel, ScalarField(state.grid, state.I));
  ScalarField out(state.grid);
  detail::incidence_from(density.mu_x, state.S, state.D, conv.values, p, out.values);
  return out;
}

/// I(0) = i0 * smoothed indicator of B(center, r0), S(0) = mu - I(0).
inline CompartmentState initial_state(const DensityProfile& density, const EpidemicParams& p) {
  const PeriodicGrid& g = density.grid;
  const ScalarField cluster = mollified_indicator(g, p.center, p.r0, p.cluster_smoothing_cells * g.dx());
  CompartmentState s(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double infected = p.i0 * cluster[i];
    if (!(infected < density.mu_x[i])) throw ConfigError("initial cluster exceeds local population");
    s.I[i] = infected;
    s.S[i] = density.mu_x[i] - infected;
  }
  return s;
}

/// Fixed-step RK4 integrator owning its stage buffers.
class SeirdIntegrator {
 public:
  SeirdIntegrator(const DensityProfile& density, const KernelProfile& kernel, const EpidemicParams& params)
      : density_(density), kernel_(kernel), params_(params), n_(density.grid.size()) {
    require(kernel.grid == density.grid, "integrator: kernel and density grids differ");
    for (auto& k : stages_) {
      for (auto& f : k) f.assign(n_, 0.0);
    }
    for (auto& f : work_) f.assign(n_, 0.0);
    conv_.assign(n_, 0.0);
    inc_.assign(n_, 0.0);
  }

  /// Advances `state` by dt in place.
  void step(CompartmentState& state, double dt) {
    using Fields = std::array<std::vector<double>, 5>;
    auto load = [&](const CompartmentState& s, Fields& into) {
      into[0] = s.S; into[1] = s.E; into[2] = s.I; into[3] = s.R; into[4] = s.D;
    };
    Fields y;
    load(state, y);

    rhs(y, stages_[0]);
    axpy(y, 0.5 * dt, stages_[0], work_);
    rhs(work_, stages_[1]);
    axpy(y, 0.5 * dt, stages_[1], work_);
    rhs(work_, stages_[2]);
    axpy(y, dt, stages_[2], work_);
    rhs(work_, stages_[3]);

    auto out = state.fields();
    for (std::size_t c = 0; c < 5; ++c) {
      auto& dst = *out[c];
      for (std::size_t i = 0; i < n_; ++i) {
        dst[i] = y[c][i] + dt / 6.0 *
                               (stages_[0][c][i] + 2.0 * stages_[1][c][i] + 2.0 * stages_[2][c][i] + stages_[3][c][i]);
      }
    }
    state.t += dt;
    check(state);
  }

 private:
  using Fields = std::array<std::vector<double>, 5>;

  void rhs(const Fields& y, Fields& dy) {
    const auto& [S, E, I, R, D] = y;
    const auto n = static_cast<std::ptrdiff_t>(n_);
    const double dx = density_.grid.dx();
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (const auto& tap : kernel_.taps) {
        std::ptrdiff_t j = i - tap.offset;
        if (j < 0) j += n;
        else if (j >= n) j -= n;
        acc += tap.weight * I[static_cast<std::size_t>(j)];
      }
      conv_[static_cast<std::size_t>(i)] = acc * dx;
    }
    detail::incidence_from(density_.mu_x, S, D, conv_, params_, inc_);
    const double theta = params_.theta, lambda = params_.lambda_rec, delta = params_.delta;
    for (std::size_t i = 0; i < n_; ++i) {
      dy[0][i] = -inc_[i];
      dy[1][i] = inc_[i] - theta * E[i];
      dy[2][i] = theta * E[i] - (lambda + delta) * I[i];
      dy[3][i] = lambda * I[i];
      dy[4][i] = delta * I[i];
    }
    (void)R;
  }

  static void axpy(const Fields& y, double a, const Fields& k, Fields& out) {
    for (std::size_t c = 0; c < 5; ++c) {
      for (std::size_t i = 0; i < y[c].size(); ++i) out[c][i] = y[c][i] + a * k[c][i];
    }
  }

  static void check(const CompartmentState& s) {
    for (const auto* f : s.fields()) {
      for (double v : *f) {
        if (!std::isfinite(v) || v < -1e-8) throw SolverError("step instability; reduce dt");
      }
    }
  }

  const DensityProfile& density_;
  const KernelProfile& kernel_;
  EpidemicParams params_;
  std::size_t n_;
  std::array<Fields, 4> stages_;
  Fields work_;
  std::vector<double> conv_;
  std::vector<double> inc_;
};

inline CompartmentState step(const CompartmentState& state, const DensityProfile& density, const KernelProfile& kernel,
                             const EpidemicParams& params, double dt) {
  SeirdIntegrator integrator(density, kernel, params);
  CompartmentState next = state;
  integrator.step(next, dt);
  return next;
}

}  // namespace mfg_seird::seird
