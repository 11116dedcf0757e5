#pragma once

// Closed-form maximizers of the two control Hamiltonians:
//   H0(p)      = sup_{|v| <= v_max} { -c v^2 / 2 + v p }
//   H1(x,h,F,q) = sup_{f in [0,1]} { (f h^a F^xi - zeta h) q
//                                    + u(A(x) [(1-f) h^a]^(1-gamma) F^gamma) }
// with CRRA utility u(z) = z^(1-p) / (1-p).

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mfg_seird/mfg/params.hpp"

namespace mfg_seird::mfg {

inline double utility(double z, double p_crra) {
  if (z < 0.0) throw std::domain_error("utility: negative consumption");
  return std::pow(z, 1.0 - p_crra) / (1.0 - p_crra);
}

inline double movement_cost(double v, double coeff) noexcept { return 0.5 * coeff * v * v; }

struct VelocityChoice {
  double value = 0.0;
  double velocity = 0.0;
};

/// Maximizes -c v^2/2 + v p over v in [lo, hi].
inline VelocityChoice maximize_velocity(double p, double coeff, double lo, double hi) noexcept {
  const double v = std::clamp(p / coeff, lo, hi);
  return {v * p - movement_cost(v, coeff), v};
}

inline VelocityChoice hamiltonian_h0(double p, double coeff, double v_max) noexcept {
  return maximize_velocity(p, coeff, -v_max, v_max);
}

inline VelocityChoice hamiltonian_h0(double p, const MfgParams& params) noexcept {
  return hamiltonian_h0(p, params.move_cost_coeff, params.v_max);
}

inline double optimal_velocity(double p, const MfgParams& params) noexcept {
  return hamiltonian_h0(p, params).velocity;
}

/// Node-local coefficients of the investment problem.
///   growth      g = h^alpha F^xi          (drift gained per unit f)
///   utility_k   K = (A h^{alpha(1-gamma)} F^gamma)^{1-p} / (1-p)
///   exponent    m = (1-gamma)(1-p)
/// so that the utility term equals K (1-f)^m.
struct InvestmentCoefficients {
  double growth = 0.0;
  double utility_k = 0.0;
  double exponent = 1.0;
  double depreciation = 0.0;  // zeta * h

  InvestmentCoefficients(double amenity, double h, double F, const MfgParams& p)
      : exponent((1.0 - p.gamma) * (1.0 - p.p_crra)), depreciation(p.zeta * h) {
    if (h > 0.0 && F > 0.0) {
      growth = std::pow(h, p.alpha) * std::pow(F, p.xi_spill);
      const double base = amenity * std::pow(h, p.alpha * (1.0 - p.gamma)) * std::pow(F, p.gamma);
      utility_k = std::pow(base, 1.0 - p.p_crra) / (1.0 - p.p_crra);
    }
  }

  double drift(double f) const noexcept { return f * growth - depreciation; }

  /// Investment level at which the h-drift changes sign (may exceed 1).
  double neutral_investment() const noexcept {
    return growth > 0.0 ? depreciation / growth : (depreciation > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  }
};

struct InvestmentChoice {
  double value = 0.0;  // drift(f) q + K (1-f)^m
  double investment = 0.0;
};

/// Maximizes drift(f) q + K (1-f)^m over f in [lo, hi] (a concave problem).
inline InvestmentChoice maximize_investment(const InvestmentCoefficients& c, double q, double lo, double hi) noexcept {
  double f;
  if (c.utility_k <= 0.0) {
    // Utility term vanishes: the objective is linear in f.
    f = q > 0.0 ? hi : lo;
  } else if (q * c.growth <= 0.0) {
    f = lo;
  } else {
    const double ratio = q * c.growth / (c.exponent * c.utility_k);
    const double stationary = 1.0 - std::pow(ratio, -1.0 / (1.0 - c.exponent));
    f = std::clamp(stationary, lo, hi);
  }
  return {c.drift(f) * q + c.utility_k * std::pow(1.0 - f, c.exponent), f};
}

inline InvestmentChoice hamiltonian_h1_at(double amenity, double h, double F, double q, const MfgParams& params) {
  if (h < 0.0 || F < 0.0) throw std::domain_error("hamiltonian_h1: h and F must be nonnegative");
  return maximize_investment(InvestmentCoefficients(amenity, h, F, params), q, 0.0, 1.0);
}

inline InvestmentChoice hamiltonian_h1(double x, double h, double F, double q, const MfgParams& params) {
  return hamiltonian_h1_at(params.amenity(x), h, F, q, params);
}

inline double optimal_investment(double x, double h, double F, double q, const MfgParams& params) {
  return hamiltonian_h1(x, h, F, q, params).investment;
}

}  // namespace mfg_seird::mfg
