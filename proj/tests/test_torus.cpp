#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mfg_seird/torus.hpp"

using namespace mfg_seird;

TEST(TorusDistance, Examples) {
  EXPECT_NEAR(torus_distance(0.1, 0.9), 0.2, 1e-15);
  EXPECT_EQ(torus_distance(0.3, 0.3), 0.0);
  EXPECT_EQ(torus_distance(0.0, 0.5), 0.5);
  EXPECT_NEAR(torus_distance(1.1, -0.1), 0.2, 1e-15);
}

TEST(TorusDistance, MetricOnAllNodePairs) {
  const PeriodicGrid g(64);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double d = torus_distance(g.node(i), g.node(j));
      EXPECT_EQ(d, torus_distance(g.node(j), g.node(i)));
      EXPECT_LE(d, 0.5);
      for (std::size_t k = 0; k < g.size(); k += 7) {
        EXPECT_LE(d, torus_distance(g.node(i), g.node(k)) + torus_distance(g.node(k), g.node(j)) + 1e-15);
      }
    }
  }
}

TEST(PeriodicGrid, IndexArithmetic) {
  const PeriodicGrid g(16);
  EXPECT_EQ(g.dx() * 16.0, 1.0);
  EXPECT_EQ(g.wrap(16), 0u);
  EXPECT_EQ(g.wrap(-1), 15u);
  EXPECT_EQ(g.wrap(35), 3u);
  EXPECT_THROW(PeriodicGrid(7), ConfigError);
}

TEST(RectGrid, EndpointsExact) {
  const RectGrid g(PeriodicGrid(8), 13, 15.0);
  EXPECT_EQ(g.h(0), 0.0);
  EXPECT_EQ(g.h(12), 15.0);
  EXPECT_THROW(RectGrid(PeriodicGrid(8), 7, 1.0), ConfigError);
}

TEST(Eta, Examples) {
  const EtaParams p{};
  EXPECT_EQ(eta_weight(0.0, p), 1.0);
  EXPECT_EQ(eta_weight(0.5, p), p.eps2);
  const double mid = 0.5 * (p.eps1 + (0.5 - p.eps3));
  EXPECT_NEAR(eta_weight(mid, p), 0.5 * (1.0 + p.eps2), 1e-15);
}

TEST(Eta, NonincreasingAndLipschitz) {
  const EtaParams p{};
  const double slope = (1.0 - p.eps2) / (0.5 - p.eps3 - p.eps1);
  double prev = eta_weight(0.0, p);
  for (int k = 1; k <= 5000; ++k) {
    const double d = 0.5 * k / 5000.0;
    const double w = eta_weight(d, p);
    EXPECT_LE(w, prev);
    EXPECT_LE(prev - w, slope * 0.5 / 5000.0 + 1e-12);
    prev = w;
  }
}

TEST(Eta, InvalidParametersRejected) {
  EXPECT_THROW(eta_weight(0.1, 0.5, 1e-3, 0.1), ConfigError);
  EXPECT_THROW(eta_weight(0.1, 0.3, 0.0, 0.1), ConfigError);
  EXPECT_THROW(eta_weight(0.1, 0.3, 1e-3, 0.25), ConfigError);
}

TEST(InfectionKernel, UnitMassForEveryRadius) {
  const PeriodicGrid g(512);
  for (double chi : {0.02, 0.04, 0.08}) {
    const KernelProfile k = build_infection_kernel(g, chi);
    EXPECT_NEAR(k.mass, 1.0, 1e-8) << "chi = " << chi;
  }
}

TEST(InfectionKernel, SymmetricNonnegativeCompact) {
  const PeriodicGrid g(512);
  const double w = default_moll_width(g);
  const KernelProfile k = build_infection_kernel(g, 0.04, w);
  EXPECT_NEAR(k.radius, 0.04 + w, 1e-15);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_GE(k.samples[i], 0.0);
    EXPECT_EQ(k.samples[i], k.samples[(g.size() - i) % g.size()]);
    if (torus_distance(g.node(i), 0.0) > 0.04 + w) { EXPECT_EQ(k.samples[i], 0.0); }
  }
  // 2 chi / dx + 1 = 41 nodes for the sharp hat, widened by the mollifier.
  EXPECT_GE(k.support_size(), 41u);
  EXPECT_LE(k.support_size(), 41u + 2 * static_cast<std::size_t>(std::ceil(w / g.dx())));
}

TEST(InfectionKernel, UnderResolvedRejected) {
  const PeriodicGrid g(64);
  EXPECT_THROW(build_infection_kernel(g, 1.5 * g.dx()), ConfigError);
  EXPECT_NO_THROW(build_infection_kernel(g, 2.0 * g.dx()));
}

TEST(MollifiedIndicator, Shape) {
  const PeriodicGrid g(512);
  const double center = 0.3, r = 0.1, w = default_moll_width(g);
  const ScalarField f = mollified_indicator(g, center, r, w);
  EXPECT_EQ(f[g.nearest(center)], 1.0);
  EXPECT_EQ(f[g.nearest(0.8)], 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = torus_distance(g.node(i), center);
    EXPECT_GE(f[i], 0.0);
    EXPECT_LE(f[i], 1.0);
    if (d <= r - w) { EXPECT_EQ(f[i], 1.0); }
    if (d >= r) { EXPECT_EQ(f[i], 0.0); }
  }
  const ScalarField at_node = mollified_indicator(g, g.node(100), r, w);
  for (std::size_t s = 1; s < 80; ++s) EXPECT_EQ(at_node[100 + s], at_node[100 - s]);
}

TEST(MollifiedIndicator, MonotoneTransition) {
  const PeriodicGrid g(1024);
  const ScalarField f = mollified_indicator(g, 0.0, 0.1, 0.02);
  for (std::size_t i = 1; i < g.size() / 2; ++i) EXPECT_LE(f[i], f[i - 1]);
}

TEST(Convolution, ConstantAndZeroFields) {
  const PeriodicGrid g(256);
  const KernelProfile k = build_infection_kernel(g, 0.04);
  const ScalarField c = periodic_convolve(k, ScalarField(g, std::vector<double>(g.size(), 2.5)));
  const ScalarField z = periodic_convolve(k, ScalarField(g));
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(c[i], 2.5 * k.mass, 1e-14);
    EXPECT_EQ(z[i], 0.0);
  }
}

TEST(Convolution, SmoothFieldWithinChiSquared) {
  const PeriodicGrid g(2048);
  for (double chi : {4.0 * g.dx(), 8.0 * g.dx(), 16.0 * g.dx()}) {
    const KernelProfile k = build_infection_kernel(g, chi);
    ScalarField f(g);
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::sin(2.0 * std::numbers::pi * g.node(i));
    const ScalarField out = periodic_convolve(k, f);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(out[i] - f[i]));
    // Symmetric unit-mass kernel: sin is damped by 1 - O((2 pi)^2 var), var <= radius^2 / 6.
    EXPECT_LE(err, std::pow(2.0 * std::numbers::pi * k.radius, 2) / 6.0) << "chi = " << chi;
  }
}

TEST(Convolution, RotationEquivarianceExact) {
  const PeriodicGrid g(512);
  const KernelProfile k = build_infection_kernel(g, 0.04);
  ScalarField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::exp(-std::pow(torus_distance(g.node(i), 0.37) / 0.05, 2));
  const ScalarField base = periodic_convolve(k, f);
  for (std::ptrdiff_t shift : {1, 17, 255, 511}) {
    const ScalarField rotated(g, rotate_nodes<double>(f.values, shift));
    const ScalarField out = periodic_convolve(k, rotated);
    const auto expected = rotate_nodes<double>(base.values, shift);
    for (std::size_t i = 0; i < g.size(); ++i) ASSERT_EQ(out[i], expected[i]) << "shift " << shift << " node " << i;
  }
}

TEST(Convolution, NonnegativeAndLinear) {
  const PeriodicGrid g(128);
  const KernelProfile k = build_infection_kernel(g, 0.05);
  ScalarField a(g), b(g), sum(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    a[i] = (i % 5 == 0) ? 1.0 : 0.0;
    b[i] = 0.5 + 0.5 * std::cos(6.0 * g.node(i));
    sum[i] = 2.0 * a[i] + 3.0 * b[i];
  }
  const ScalarField ca = periodic_convolve(k, a), cb = periodic_convolve(k, b), cs = periodic_convolve(k, sum);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_GE(ca[i], 0.0);
    EXPECT_NEAR(cs[i], 2.0 * ca[i] + 3.0 * cb[i], 1e-13);
  }
}

TEST(Convolution, GridMismatchRejected) {
  const KernelProfile k = build_infection_kernel(PeriodicGrid(128), 0.05);
  EXPECT_THROW(periodic_convolve(k, ScalarField(PeriodicGrid(64))), ConfigError);
}

TEST(PeriodicInterpolate, ExactAtNodesAndWraps) {
  const PeriodicGrid g(32);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = static_cast<double>(i * i);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(periodic_interpolate(g, v, g.node(i)), v[i]);
  EXPECT_NEAR(periodic_interpolate(g, v, 1.0 - 0.5 * g.dx()), 0.5 * v.back(), 1e-12);
}
