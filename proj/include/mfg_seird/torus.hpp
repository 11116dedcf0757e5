#pragma once

// Periodic discretization of the unit torus, torus kernels and periodic
// convolution shared by the MFG and epidemic solvers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "mfg_seird/error.hpp"

namespace mfg_seird {

/// Uniform grid of n nodes x_i = i/n on the torus of length 1.
class PeriodicGrid {
 public:
  static constexpr std::size_t kMinNodes = 8;

  explicit PeriodicGrid(std::size_t nodes) : n_(nodes) {
    require(nodes >= kMinNodes, "periodic grid needs at least 8 nodes, got " + std::to_string(nodes));
  }

  std::size_t size() const noexcept { return n_; }
  double dx() const noexcept { return 1.0 / static_cast<double>(n_); }
  double node(std::size_t i) const noexcept { return static_cast<double>(i) * dx(); }

  /// Index arithmetic modulo n.
  std::size_t wrap(std::ptrdiff_t i) const noexcept {
    const auto n = static_cast<std::ptrdiff_t>(n_);
    const std::ptrdiff_t r = i % n;
    return static_cast<std::size_t>(r < 0 ? r + n : r);
  }

  /// Node nearest to a torus position.
  std::size_t nearest(double x) const noexcept {
    return wrap(static_cast<std::ptrdiff_t>(std::llround(x * static_cast<double>(n_))));
  }

  friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;

 private:
  std::size_t n_;
};

/// Tensor grid on S^1 x [0, h_max]; h_j = j * h_max / (n_h - 1).
class RectGrid {
 public:
  static constexpr std::size_t kMinNodes = 8;

  RectGrid(PeriodicGrid spatial, std::size_t n_h, double h_max)
      : spatial_(spatial), n_h_(n_h), h_max_(h_max) {
    require(n_h >= kMinNodes, "h grid needs at least 8 nodes, got " + std::to_string(n_h));
    require(h_max > 0.0 && std::isfinite(h_max), "h_max must be positive");
  }

  const PeriodicGrid& spatial() const noexcept { return spatial_; }
  std::size_t nx() const noexcept { return spatial_.size(); }
  std::size_t nh() const noexcept { return n_h_; }
  std::size_t size() const noexcept { return nx() * n_h_; }
  double h_max() const noexcept { return h_max_; }
  double dx() const noexcept { return spatial_.dx(); }
  double dh() const noexcept { return h_max_ / static_cast<double>(n_h_ - 1); }
  double x(std::size_t i) const noexcept { return spatial_.node(i); }
  double h(std::size_t j) const noexcept {
    return j + 1 == n_h_ ? h_max_ : static_cast<double>(j) * dh();
  }

  /// Trapezoid weight in h (half weight on both h boundaries).
  double h_weight(std::size_t j) const noexcept {
    return (j == 0 || j + 1 == n_h_) ? 0.5 * dh() : dh();
  }

  /// Row-major in x, then h.
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * n_h_ + j; }

  friend bool operator==(const RectGrid&, const RectGrid&) = default;

 private:
  PeriodicGrid spatial_;
  std::size_t n_h_;
  double h_max_;
};

/// One real value per torus node.
struct ScalarField {
  PeriodicGrid grid;
  std::vector<double> values;

  explicit ScalarField(PeriodicGrid g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  ScalarField(PeriodicGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    require(values.size() == grid.size(), "field length does not match grid");
  }

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const noexcept { return values.size(); }

  /// Rectangle-rule integral over the torus.
  double integral() const noexcept {
    double s = 0.0;
    for (double v : values) s += v;
    return s * grid.dx();
  }
};

/// Rotate a periodic sample vector by k nodes: out[i] = in[i - k].
template <class T>
std::vector<T> rotate_nodes(std::span<const T> in, std::ptrdiff_t k) {
  const auto n = static_cast<std::ptrdiff_t>(in.size());
  std::vector<T> out(in.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = in[static_cast<std::size_t>((((i - k) % n) + n) % n)];
  }
  return out;
}

/// Arc-length distance on the unit torus; inputs are reduced mod 1.
inline double torus_distance(double x, double y) noexcept {
  double d = std::fmod(x - y, 1.0);
  if (d < 0.0) d += 1.0;
  return std::min(d, 1.0 - d);
}

/// Cosine ramp: 1 at s <= 0, 0 at s >= 1, C^1 in between.
inline double cosine_smoothstep(double s) noexcept {
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * s));
}

/// Piecewise-linear interaction weight eta on [0, 1/2].
struct EtaParams {
  double eps1 = 0.3;
  double eps2 = 1e-3;
  double eps3 = 0.1;

  void validate() const {
    require(eps1 > 0.0 && eps1 < 0.5, "eta: eps1 must lie in (0, 1/2)");
    require(eps2 > 0.0 && eps2 < 1.0, "eta: eps2 must lie in (0, 1)");
    require(eps3 >= 0.0 && 0.5 - eps3 > eps1, "eta: need 1/2 - eps3 > eps1");
  }

  friend bool operator==(const EtaParams&, const EtaParams&) = default;
};

inline double eta_weight(double d, const EtaParams& p) noexcept {
  const double shoulder = 0.5 - p.eps3;
  if (d <= p.eps1) return 1.0;
  if (d >= shoulder) return p.eps2;
  const double s = (d - p.eps1) / (shoulder - p.eps1);
  return 1.0 + s * (p.eps2 - 1.0);
}

inline double eta_weight(double d, double eps1, double eps2, double eps3) {
  const EtaParams p{eps1, eps2, eps3};
  p.validate();
  return eta_weight(d, p);
}

/// Nonnegative symmetric kernel sampled on the torus nodes. samples[i] is
/// the kernel value at torus offset i*dx.
struct KernelProfile {
  PeriodicGrid grid;
  std::vector<double> samples;
  double radius = 0.0;
  double mass = 0.0;

  /// Signed offsets in (-n/2, n/2] with nonzero weight.
  struct Tap {
    std::ptrdiff_t offset;
    double weight;
  };
  std::vector<Tap> taps;

  KernelProfile(PeriodicGrid g, std::vector<double> s, double r) : grid(g), samples(std::move(s)), radius(r) {
    require(samples.size() == grid.size(), "kernel length does not match grid");
    const auto n = static_cast<std::ptrdiff_t>(grid.size());
    double sum = 0.0;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const double w = samples[static_cast<std::size_t>(i)];
      require(w >= 0.0, "kernel samples must be nonnegative");
      sum += w;
      if (w > 0.0) taps.push_back({i <= n / 2 ? i : i - n, w});
    }
    mass = sum * grid.dx();
  }

  std::size_t support_size() const noexcept { return taps.size(); }
};

namespace detail {

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr std::array<double, 8> kGlNodes{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                                -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                                0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGlWeights{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                  0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                  0.2223810344533745, 0.1012285362903763};

// Hat of half-width chi and unit area, convolved with a raised-cosine
// mollifier of half-width w. Integrated piecewise between the kinks.
inline double mollified_hat(double d, double chi, double w) {
  auto hat = [chi](double y) { return std::max(0.0, 1.0 - std::abs(y) / chi) / chi; };
  if (w <= 0.0) return hat(d);
  auto phi = [w](double s) { return (1.0 + std::cos(std::numbers::pi * s / w)) / (2.0 * w); };

  std::vector<double> breaks{-w, w};
  for (double k : {d - chi, d, d + chi}) {
    if (k > -w && k < w) breaks.push_back(k);
  }
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double a = breaks[b], c = breaks[b + 1];
    const double mid = 0.5 * (a + c), half = 0.5 * (c - a);
    for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
      const double s = mid + half * kGlNodes[q];
      total += half * kGlWeights[q] * phi(s) * hat(d - s);
    }
  }
  return total;
}

}  // namespace detail

/// Default smoothing width tied to resolution.
inline double default_moll_width(const PeriodicGrid& grid) noexcept { return 2.0 * grid.dx(); }

/// Mollified hat kernel K_chi(x) = K(x/chi)/chi, renormalized to unit
/// discrete mass. Support half-width is chi + moll_width.
inline KernelProfile build_infection_kernel(const PeriodicGrid& grid, double chi, double moll_width) {
  require(chi > 0.0 && chi < 0.5, "kernel radius chi must lie in (0, 1/2)");
  require(moll_width >= 0.0 && chi + moll_width < 0.5, "kernel mollification width too large");
  if (chi < 2.0 * grid.dx()) {
    throw ConfigError("kernel under-resolved: chi = " + std::to_string(chi) + " < 2*dx = " +
                      std::to_string(2.0 * grid.dx()));
  }
  const std::size_t n = grid.size();
  std::vector<double> samples(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = torus_distance(grid.node(i), 0.0);
    if (d < chi + moll_width) samples[i] = detail::mollified_hat(d, chi, moll_width);
  }
  // Enforce exact mirror symmetry before normalizing.
  for (std::size_t i = 1; i < n - i; ++i) samples[n - i] = samples[i];

  double sum = 0.0;
  for (double s : samples) sum += s;
  const double scale = 1.0 / (sum * grid.dx());
  for (double& s : samples) s *= scale;
  return KernelProfile(grid, std::move(samples), chi + moll_width);
}

inline KernelProfile build_infection_kernel(const PeriodicGrid& grid, double chi) {
  return build_infection_kernel(grid, chi, default_moll_width(grid));
}

/// Smoothed indicator of the torus ball B(center, r): 1 within r - w, 0
/// beyond r, cosine ramp in between.
inline ScalarField mollified_indicator(const PeriodicGrid& grid, double center, double r, double moll_width) {
  require(r > 0.0 && r < 0.5, "indicator radius must lie in (0, 1/2)");
  require(moll_width >= 0.0 && moll_width < r, "indicator mollification width must be below the radius");
  ScalarField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = torus_distance(grid.node(i), center);
    out[i] = moll_width > 0.0 ? cosine_smoothstep((d - (r - moll_width)) / moll_width) : (d < r ? 1.0 : 0.0);
  }
  return out;
}

/// result[i] = sum_j K[(i-j) mod n] f[j] dx.
inline ScalarField periodic_convolve(const KernelProfile& kernel, const ScalarField& field) {
  if (!(kernel.grid == field.grid)) throw ConfigError("periodic_convolve: kernel and field grids differ");
  const PeriodicGrid& g = field.grid;
  const auto n = static_cast<std::ptrdiff_t>(g.size());
  const double dx = g.dx();
  ScalarField out(g);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (const auto& tap : kernel.taps) {
      std::ptrdiff_t j = i - tap.offset;
      if (j < 0) j += n;
      else if (j >= n) j -= n;
      acc += tap.weight * field.values[static_cast<std::size_t>(j)];
    }
    out.values[static_cast<std::size_t>(i)] = acc * dx;
  }
  return out;
}

/// Periodic linear interpolation of samples given at the nodes of `from`.
inline double periodic_interpolate(const PeriodicGrid& from, std::span<const double> values, double x) {
  double s = std::fmod(x, 1.0);
  if (s < 0.0) s += 1.0;
  const double pos = s * static_cast<double>(from.size());
  const auto i0 = static_cast<std::ptrdiff_t>(std::floor(pos));
  const double t = pos - static_cast<double>(i0);
  return (1.0 - t) * values[from.wrap(i0)] + t * values[from.wrap(i0 + 1)];
}

}  // namespace mfg_seird
