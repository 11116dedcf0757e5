#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "mfg_seird/error.hpp"
#include "mfg_seird/torus.hpp"

namespace mfg_seird::mfg {

/// Local amenity profile A(x) > 0 on the torus.
class Amenity {
 public:
  enum class Kind { sin_peak, uniform, table };

  static Amenity sin_peak(double scale = 1.0) { return Amenity(Kind::sin_peak, {}, {}, scale); }
  static Amenity uniform(double scale = 1.0) { return Amenity(Kind::uniform, {}, {}, scale); }

  /// Periodic linear interpolation through (x, A) samples; x need not be
  /// sorted on input but must lie in [0, 1).
  static Amenity table(std::vector<double> xs, std::vector<double> values, std::string source = {}) {
    require(xs.size() == values.size() && xs.size() >= 2, "amenity table needs at least two (x, A) rows");
    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
    std::vector<double> sx, sv;
    for (auto k : order) {
      require(xs[k] >= 0.0 && xs[k] < 1.0, "amenity table x must lie in [0, 1)");
      require(values[k] > 0.0, "amenity values must be positive");
      if (!sx.empty()) require(xs[k] > sx.back(), "amenity table has duplicate x");
      sx.push_back(xs[k]);
      sv.push_back(values[k]);
    }
    Amenity a(Kind::table, std::move(sx), std::move(sv), 1.0);
    a.source_ = std::move(source);
    return a;
  }

  /// Table holding the samples of `values` at the nodes of `grid`.
  static Amenity on_grid(const PeriodicGrid& grid, const std::vector<double>& values) {
    std::vector<double> xs(grid.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = grid.node(i);
    return table(std::move(xs), values);
  }

  double operator()(double x) const {
    double s = std::fmod(x, 1.0);
    if (s < 0.0) s += 1.0;
    switch (kind_) {
      case Kind::sin_peak: return scale_ * (0.5 * std::sin(2.0 * std::numbers::pi * (s - 0.25)) + 1.0);
      case Kind::uniform: return scale_;
      case Kind::table: break;
    }
    // Locate the bracketing samples with wrap-around.
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), s);
    const std::size_t hi = static_cast<std::size_t>(it - xs_.begin()) % xs_.size();
    const std::size_t lo = (hi + xs_.size() - 1) % xs_.size();
    double span = xs_[hi] - xs_[lo];
    double off = s - xs_[lo];
    if (span <= 0.0) span += 1.0;
    if (off < 0.0) off += 1.0;
    const double t = off / span;
    return scale_ * ((1.0 - t) * values_[lo] + t * values_[hi]);
  }

  Amenity scaled(double c) const {
    require(c > 0.0, "amenity scale must be positive");
    Amenity a = *this;
    a.scale_ *= c;
    return a;
  }

  Kind kind() const noexcept { return kind_; }
  double scale() const noexcept { return scale_; }
  const std::string& source() const noexcept { return source_; }
  const std::vector<double>& xs() const noexcept { return xs_; }
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const Amenity&, const Amenity&) = default;

 private:
  Amenity(Kind k, std::vector<double> xs, std::vector<double> v, double scale)
      : kind_(k), xs_(std::move(xs)), values_(std::move(v)), scale_(scale) {}

  Kind kind_;
  std::vector<double> xs_;
  std::vector<double> values_;
  double scale_ = 1.0;
  std::string source_;
};

/// Parameters of the stationary human-capital MFG. Defaults reproduce the
/// reference parameter table; rho, the movement cost and the solver
/// tolerances are not part of it and carry our own choices.
struct MfgParams {
  // Economics.
  double rho = 0.05;
  double sigma_h = 0.7;
  double eps_x = 0.5;
  double alpha = 0.5;
  double xi_spill = 0.1;
  double gamma = 0.15;
  double zeta = 0.15;
  double p_crra = 0.1;
  double v_max = 1.0;
  double move_cost_coeff = 1.0;
  EtaParams eta{};
  Amenity amenity = Amenity::sin_peak();

  // Discretization.
  double h_max = 15.0;
  std::size_t n_x = 128;
  std::size_t n_h = 128;

  // Outer damped fixed point.
  double damping = 0.5;
  double tol_fixed_point = 1e-9;
  std::size_t max_iters = 1000;

  // Inner HJB policy iteration.
  double tol_inner = 1e-8;
  std::size_t max_inner_iters = 60;

  // Adaptive truncation.
  bool expand_hmax = false;
  double enclosure_band = 0.1;
  double enclosure_tol = 1e-4;
  double hmax_cap_factor = 8.0;

  void validate() const {
    require(rho > 0.0, "mfg.rho must be positive");
    require(sigma_h > 0.0, "mfg.sigma_h must be positive");
    require(eps_x > 0.0, "mfg.eps_x must be positive");
    require(alpha >= 0.5 && alpha < 1.0, "mfg.alpha must lie in [1/2, 1)");
    require(xi_spill > 0.0 && xi_spill < 1.0, "mfg.xi_spill must lie in (0, 1)");
    require(alpha + xi_spill < 1.0, "mfg: alpha + xi_spill must be < 1");
    require(gamma > 0.0 && gamma < 1.0, "mfg.gamma must lie in (0, 1)");
    require(zeta > 0.0, "mfg.zeta must be positive");
    require(p_crra > 0.0 && p_crra < 1.0, "mfg.p_crra must lie in (0, 1)");
    require(v_max > 0.0, "mfg.v_max must be positive");
    require(move_cost_coeff > 0.0, "mfg.move_cost_coeff must be positive");
    eta.validate();
    require(h_max > 0.0, "mfg.h_max must be positive");
    require(n_x >= PeriodicGrid::kMinNodes, "mfg.n_x must be >= 8");
    require(n_h >= RectGrid::kMinNodes, "mfg.n_h must be >= 8");
    require(damping > 0.0 && damping <= 1.0, "mfg.damping must lie in (0, 1]");
    require(tol_fixed_point > 0.0, "mfg.tol_fixed_point must be positive");
    require(tol_inner > 0.0, "mfg.tol_inner must be positive");
    require(max_iters > 0 && max_inner_iters > 0, "mfg iteration limits must be positive");
    require(enclosure_band > 0.0 && enclosure_band < 1.0, "mfg.enclosure_band must lie in (0, 1)");
    require(enclosure_tol > 0.0, "mfg.enclosure_tol must be positive");
    require(hmax_cap_factor >= 1.0, "mfg.hmax_cap_factor must be >= 1");
  }

  RectGrid grid() const { return RectGrid(PeriodicGrid(n_x), n_h, h_max); }

  friend bool operator==(const MfgParams&, const MfgParams&) = default;
};

}  // namespace mfg_seird::mfg
