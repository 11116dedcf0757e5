#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mfg_seird/error.hpp"
#include "mfg_seird/torus.hpp"

namespace mfg_seird::mfg {

/// Real values on a RectGrid, row-major in x then h. The tag keeps value
/// functions and densities from being mixed up.
template <class Tag>
struct RectField {
  RectGrid grid;
  std::vector<double> values;

  explicit RectField(RectGrid g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  RectField(RectGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    require(values.size() == grid.size(), "field length does not match grid");
  }

  double& operator()(std::size_t i, std::size_t j) { return values[grid.index(i, j)]; }
  double operator()(std::size_t i, std::size_t j) const { return values[grid.index(i, j)]; }
};

struct ValueTag {};
struct DensityTag {};
using ValueField = RectField<ValueTag>;
using DensityField = RectField<DensityTag>;

/// Feedback controls per node. Movement is a relaxed control: speed s in
/// [0, v_max], sent to +x with probability share_up and to -x otherwise.
/// share_up is 1/2 only where both directions are optimal.
struct PolicyField {
  RectGrid grid;
  std::vector<double> speed;
  std::vector<double> share_up;
  std::vector<double> investment;

  explicit PolicyField(RectGrid g)
      : grid(g), speed(g.size(), 0.0), share_up(g.size(), 1.0), investment(g.size(), 0.0) {}

  /// Mean velocity (2 share_up - 1) s.
  double drift(std::size_t n) const noexcept { return (2.0 * share_up[n] - 1.0) * speed[n]; }
};

/// x-marginal of a density on (x, h).
struct SpatialDensity {
  PeriodicGrid grid;
  std::vector<double> mu_x;

  double mass() const noexcept {
    double s = 0.0;
    for (double v : mu_x) s += v;
    return s * grid.dx();
  }
};

/// Quadrature mass: rectangle rule in x, trapezoid in h.
inline double mass(const DensityField& mu) {
  const RectGrid& g = mu.grid;
  double s = 0.0;
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.nh(); ++j) s += mu(i, j) * g.h_weight(j);
  }
  return s * g.dx();
}

/// Constant density of unit mass.
inline DensityField uniform_density(const RectGrid& g) { return DensityField(g, 1.0 / g.h_max()); }

inline SpatialDensity x_marginal(const DensityField& mu) {
  const RectGrid& g = mu.grid;
  SpatialDensity out{g.spatial(), std::vector<double>(g.nx(), 0.0)};
  for (std::size_t i = 0; i < g.nx(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.nh(); ++j) s += mu(i, j) * g.h_weight(j);
    out.mu_x[i] = s;
  }
  return out;
}

/// h-marginal: integral over x for each h node.
inline std::vector<double> h_marginal(const DensityField& mu) {
  const RectGrid& g = mu.grid;
  std::vector<double> out(g.nh(), 0.0);
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.nh(); ++j) out[j] += mu(i, j) * g.dx();
  }
  return out;
}

/// Per-column moments of the density: zeroth (mass) and first (capital).
struct ColumnMoments {
  std::vector<double> mass;
  std::vector<double> capital;
};

inline ColumnMoments column_moments(const DensityField& mu) {
  const RectGrid& g = mu.grid;
  ColumnMoments m{std::vector<double>(g.nx(), 0.0), std::vector<double>(g.nx(), 0.0)};
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.nh(); ++j) {
      const double w = mu(i, j) * g.h_weight(j) * g.dx();
      m.mass[i] += w;
      m.capital[i] += w * g.h(j);
    }
  }
  return m;
}

namespace detail {

inline double weighted_mean(const ColumnMoments& m, const PeriodicGrid& grid, double x, const EtaParams& eta) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double w = eta_weight(torus_distance(x, grid.node(k)), eta);
    num += w * m.capital[k];
    den += w * m.mass[k];
  }
  if (!(den >= 1e-14)) throw SolverError("empty interaction neighborhood");
  return num / den;
}

}  // namespace detail

/// eta-weighted mean human capital seen from position x.
inline double interaction_F(double x, const DensityField& mu, const EtaParams& eta) {
  return detail::weighted_mean(column_moments(mu), mu.grid.spatial(), x, eta);
}

/// interaction_F at every spatial node. The eta weights only depend on the
/// node offset, so they are tabulated once.
inline std::vector<double> interaction_field(const DensityField& mu, const EtaParams& eta) {
  const RectGrid& g = mu.grid;
  const PeriodicGrid& sg = g.spatial();
  const std::size_t n = sg.size();
  const ColumnMoments m = column_moments(mu);
  std::vector<double> by_offset(n);
  for (std::size_t o = 0; o < n; ++o) by_offset[o] = eta_weight(torus_distance(sg.node(o), 0.0), eta);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double w = by_offset[(i + n - k) % n];
      num += w * m.capital[k];
      den += w * m.mass[k];
    }
    if (!(den >= 1e-14)) throw SolverError("empty interaction neighborhood");
    out[i] = num / den;
  }
  return out;
}

}  // namespace mfg_seird::mfg
