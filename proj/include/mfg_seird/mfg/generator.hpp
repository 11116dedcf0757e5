#pragma once

// Monotone (Kushner-Dupuis) upwind discretization of the controlled
// diffusion on S^1 x [0, h_max]. The generator is a Markov-chain rate
// matrix over the active nodes j = 1 .. n_h-1:
//   - x: periodic; rates eps^2/(2dx^2) + v^+/dx (right), eps^2/(2dx^2) + v^-/dx (left);
//   - h: the drift f h^alpha F^xi - zeta h is split into its nonnegative
//        controlled part (forward difference) and the depreciation (backward
//        difference): rates sigma^2 h^2/(2dh^2) + f h^alpha F^xi/dh (up),
//        sigma^2 h^2/(2dh^2) + zeta h/dh (down);
//   - h = 0 is the Dirichlet boundary of the value function (V = 0): the
//     HJB matrix kills mass leaving row j = 1, the Fokker-Planck operator
//     drops that transition (no flux through h = 0);
//   - h = h_max is reflecting: no upward transition out of the top row.
// The HJB policy-evaluation matrix is rho*I - G (with killing) and the
// stationary Fokker-Planck operator is G^T (without killing), so mass is
// conserved by construction.

#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mfg_seird/mfg/fields.hpp"
#include "mfg_seird/mfg/hamiltonian.hpp"
#include "mfg_seird/mfg/params.hpp"

namespace mfg_seird::mfg {

struct NodeRates {
  double x_up = 0.0;
  double x_down = 0.0;
  double h_up = 0.0;
  double h_down = 0.0;

  double total() const noexcept { return x_up + x_down + h_up + h_down; }
};

/// Maximizer of the upwind discrete Hamiltonian at one node.
struct NodeControl {
  double speed = 0.0;
  double share_up = 1.0;
  double investment = 0.0;
};

class ControlledGenerator {
 public:
  ControlledGenerator(const MfgParams& params, const RectGrid& grid, std::vector<double> interaction)
      : params_(params), grid_(grid), interaction_(std::move(interaction)) {
    require(interaction_.size() == grid_.nx(), "interaction field length does not match grid");
    const double dx = grid_.dx(), dh = grid_.dh();
    diff_x_ = 0.5 * params_.eps_x * params_.eps_x / (dx * dx);
    amenity_.resize(grid_.nx());
    for (std::size_t i = 0; i < grid_.nx(); ++i) amenity_[i] = params_.amenity(grid_.x(i));
    diff_h_.resize(grid_.nh());
    for (std::size_t j = 0; j < grid_.nh(); ++j) {
      const double h = grid_.h(j);
      diff_h_[j] = 0.5 * params_.sigma_h * params_.sigma_h * h * h / (dh * dh);
    }
    coeffs_.reserve(grid_.size());
    for (std::size_t i = 0; i < grid_.nx(); ++i) {
      for (std::size_t j = 0; j < grid_.nh(); ++j) {
        coeffs_.emplace_back(amenity_[i], grid_.h(j), interaction_[i], params_);
      }
    }
  }

  /// Builds the generator for the interaction field induced by `density`.
  static ControlledGenerator for_density(const MfgParams& params, const DensityField& density) {
    return ControlledGenerator(params, density.grid, interaction_field(density, params.eta));
  }

  const RectGrid& grid() const noexcept { return grid_; }
  const MfgParams& params() const noexcept { return params_; }
  const std::vector<double>& interaction() const noexcept { return interaction_; }
  const InvestmentCoefficients& coefficients(std::size_t i, std::size_t j) const {
    return coeffs_[grid_.index(i, j)];
  }

  std::size_t active_rows() const noexcept { return grid_.nh() - 1; }
  std::size_t active_size() const noexcept { return grid_.nx() * active_rows(); }
  std::size_t active_index(std::size_t i, std::size_t j) const noexcept { return i * active_rows() + (j - 1); }
  bool is_top(std::size_t j) const noexcept { return j + 1 == grid_.nh(); }

  NodeRates rates(std::size_t i, std::size_t j, const NodeControl& u) const {
    const double dx = grid_.dx(), dh = grid_.dh();
    const auto& c = coefficients(i, j);
    const double investment = u.investment;
    NodeRates r;
    r.x_up = diff_x_ + u.share_up * u.speed / dx;
    r.x_down = diff_x_ + (1.0 - u.share_up) * u.speed / dx;
    r.h_up = is_top(j) ? 0.0 : diff_h_[j] + investment * c.growth / dh;
    r.h_down = diff_h_[j] + c.depreciation / dh;
    return r;
  }

  /// Running payoff u(...) - a(v) under the given controls.
  double payoff(std::size_t i, std::size_t j, const NodeControl& u) const {
    const auto& c = coefficients(i, j);
    return c.utility_k * std::pow(1.0 - u.investment, c.exponent) - movement_cost(u.speed, params_.move_cost_coeff);
  }

  /// Exact maximizer of the upwind discrete Hamiltonian given V.
  NodeControl improve(const ValueField& V, std::size_t i, std::size_t j) const {
    const PeriodicGrid& sg = grid_.spatial();
    const double dx = grid_.dx();
    const double centre = V(i, j);
    const double right = V(sg.wrap(static_cast<std::ptrdiff_t>(i) + 1), j);
    const double left = V(sg.wrap(static_cast<std::ptrdiff_t>(i) - 1), j);

    NodeControl ctl;
    const double p_up = (right - centre) / dx, p_down = (centre - left) / dx;
    const auto move_right = maximize_velocity(p_up, params_.move_cost_coeff, 0.0, params_.v_max);
    const auto move_left = maximize_velocity(p_down, params_.move_cost_coeff, -params_.v_max, 0.0);
    // Both directions pay the same exactly when p_up = -p_down > 0; the
    // tolerance only absorbs round-off in V, so that mirror-symmetric ties
    // are split evenly instead of being decided by the last bit.
    const double slack = 1e-12 * (std::abs(right) + 2.0 * std::abs(centre) + std::abs(left)) / dx;
    if (p_up > 0.0 && p_down < 0.0 && std::abs(p_up + p_down) <= slack) {
      ctl.speed = 0.5 * (move_right.velocity - move_left.velocity);
      ctl.share_up = 0.5;
    } else if (move_right.value > move_left.value) {
      ctl.speed = move_right.velocity;
      ctl.share_up = 1.0;
    } else {
      ctl.speed = -move_left.velocity;
      ctl.share_up = 0.0;
    }

    // Only the controlled part of the h-drift depends on f; it is upwinded
    // forward, so the node problem is the closed-form H1 with q = D+V.
    const double q_up = is_top(j) ? 0.0 : (V(i, j + 1) - V(i, j)) / grid_.dh();
    ctl.investment = maximize_investment(coefficients(i, j), q_up, 0.0, 1.0).investment;
    return ctl;
  }

  PolicyField improve(const ValueField& V) const {
    PolicyField pol(grid_);
    for (std::size_t i = 0; i < grid_.nx(); ++i) {
      for (std::size_t j = 0; j < grid_.nh(); ++j) {
        const auto ctl = improve(V, i, j);
        const std::size_t n = grid_.index(i, j);
        pol.speed[n] = ctl.speed;
        pol.share_up[n] = ctl.share_up;
        pol.investment[n] = ctl.investment;
      }
    }
    return pol;
  }

  /// rho V - (payoff + G V) at every active node under `policy`.
  std::vector<double> hjb_defect(const ValueField& V, const PolicyField& policy) const {
    const PeriodicGrid& sg = grid_.spatial();
    std::vector<double> out(grid_.size(), 0.0);
    for (std::size_t i = 0; i < grid_.nx(); ++i) {
      const std::size_t ip = sg.wrap(static_cast<std::ptrdiff_t>(i) + 1);
      const std::size_t im = sg.wrap(static_cast<std::ptrdiff_t>(i) - 1);
      for (std::size_t j = 1; j < grid_.nh(); ++j) {
        const std::size_t n = grid_.index(i, j);
        const NodeControl u = control_at(policy, n);
        const NodeRates r = rates(i, j, u);
        const double c = V(i, j);
        double flow = r.x_up * (V(ip, j) - c) + r.x_down * (V(im, j) - c) + r.h_down * (V(i, j - 1) - c);
        if (!is_top(j)) flow += r.h_up * (V(i, j + 1) - c);
        out[n] = params_.rho * c - payoff(i, j, u) - flow;
      }
    }
    return out;
  }

  /// Sup-norm residual of the discrete stationary HJB equation.
  double hjb_residual(const ValueField& V) const {
    const auto defect = hjb_defect(V, improve(V));
    double worst = 0.0;
    for (double d : defect) worst = std::max(worst, std::abs(d));
    return worst;
  }

  /// rho*I - G on the active nodes, transitions into h = 0 killed.
  Eigen::SparseMatrix<double> hjb_matrix(const PolicyField& policy) const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(active_size() * 5);
    for_each_transition(policy, [&](std::size_t from, std::ptrdiff_t to, double rate) {
      trip.emplace_back(from, from, rate);
      if (to >= 0) trip.emplace_back(from, static_cast<std::size_t>(to), -rate);
    });
    for (std::size_t a = 0; a < active_size(); ++a) trip.emplace_back(a, a, params_.rho);
    Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(active_size()), static_cast<Eigen::Index>(active_size()));
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
  }

  Eigen::VectorXd hjb_rhs(const PolicyField& policy) const {
    Eigen::VectorXd b(static_cast<Eigen::Index>(active_size()));
    for (std::size_t i = 0; i < grid_.nx(); ++i) {
      for (std::size_t j = 1; j < grid_.nh(); ++j) {
        const std::size_t n = grid_.index(i, j);
        b[static_cast<Eigen::Index>(active_index(i, j))] = payoff(i, j, control_at(policy, n));
      }
    }
    return b;
  }

  /// Transpose of the conservative generator: (G^T pi)_k = inflow - outflow.
  Eigen::SparseMatrix<double> fp_matrix(const PolicyField& policy) const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(active_size() * 5);
    for_each_transition(policy, [&](std::size_t from, std::ptrdiff_t to, double rate) {
      if (to < 0) return;
      trip.emplace_back(from, from, -rate);
      trip.emplace_back(static_cast<std::size_t>(to), from, rate);
    });
    Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(active_size()), static_cast<Eigen::Index>(active_size()));
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
  }

  /// Calls fn(from, to, rate) for every transition of the active chain;
  /// to == -1 marks the exit through the h = 0 boundary.
  template <class Fn>
  void for_each_transition(const PolicyField& policy, Fn&& fn) const {
    const PeriodicGrid& sg = grid_.spatial();
    for (std::size_t i = 0; i < grid_.nx(); ++i) {
      const std::size_t ip = sg.wrap(static_cast<std::ptrdiff_t>(i) + 1);
      const std::size_t im = sg.wrap(static_cast<std::ptrdiff_t>(i) - 1);
      for (std::size_t j = 1; j < grid_.nh(); ++j) {
        const std::size_t n = grid_.index(i, j);
        const NodeRates r = rates(i, j, control_at(policy, n));
        const std::size_t from = active_index(i, j);
        fn(from, static_cast<std::ptrdiff_t>(active_index(ip, j)), r.x_up);
        fn(from, static_cast<std::ptrdiff_t>(active_index(im, j)), r.x_down);
        if (!is_top(j)) fn(from, static_cast<std::ptrdiff_t>(active_index(i, j + 1)), r.h_up);
        fn(from, j == 1 ? std::ptrdiff_t{-1} : static_cast<std::ptrdiff_t>(active_index(i, j - 1)), r.h_down);
      }
    }
  }

  static NodeControl control_at(const PolicyField& policy, std::size_t n) noexcept {
    return {policy.speed[n], policy.share_up[n], policy.investment[n]};
  }

 private:
  MfgParams params_;
  RectGrid grid_;
  std::vector<double> interaction_;
  std::vector<double> amenity_;
  std::vector<double> diff_h_;
  double diff_x_ = 0.0;
  std::vector<InvestmentCoefficients> coeffs_;
};

}  // namespace mfg_seird::mfg
