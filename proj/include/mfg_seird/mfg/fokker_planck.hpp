#pragma once

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "mfg_seird/error.hpp"
#include "mfg_seird/mfg/generator.hpp"

namespace mfg_seird::mfg {

struct FpResult {
  DensityField density;
  /// Smallest cell mass (normalized) before negative round-off was clipped.
  double min_before_clip = 0.0;
  /// Sup-norm of G^T pi for the normalized cell masses pi.
  double residual = 0.0;
};

/// Stationary distribution of the controlled chain: G^T pi = 0, sum pi = 1,
/// then density = pi / (dx * h-weight). The first balance equation is
/// replaced by the normalization; the system is nonsingular exactly when
/// the stationary distribution is unique.
inline FpResult fp_solve(const ControlledGenerator& gen, const PolicyField& policy) {
  const RectGrid& g = gen.grid();
  require(policy.grid == g, "fp_solve: policy grid mismatch");
  for (std::size_t n = 0; n < g.size(); ++n) {
    require(policy.speed[n] >= 0.0 && policy.speed[n] <= gen.params().v_max * (1.0 + 1e-12),
            "fp_solve: speed out of bounds");
    require(policy.share_up[n] >= 0.0 && policy.share_up[n] <= 1.0, "fp_solve: direction share out of bounds");
    require(policy.investment[n] >= 0.0 && policy.investment[n] <= 1.0, "fp_solve: investment out of bounds");
  }

  const Eigen::SparseMatrix<double> GT = gen.fp_matrix(policy);
  const auto size = static_cast<Eigen::Index>(gen.active_size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(GT.nonZeros() + size));
  for (Eigen::Index col = 0; col < GT.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(GT, col); it; ++it) {
      if (it.row() != 0) trip.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Eigen::Index k = 0; k < size; ++k) trip.emplace_back(0, k, 1.0);
  Eigen::SparseMatrix<double> A(size, size);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SolverError("non-unique stationary density");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  rhs[0] = 1.0;
  Eigen::VectorXd pi = lu.solve(rhs);
  if (!pi.allFinite()) throw SolverError("non-unique stationary density");

  FpResult out{DensityField(g)};
  out.min_before_clip = pi.minCoeff() / pi.sum();
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  out.residual = (GT * pi).cwiseAbs().maxCoeff();

  for (std::size_t i = 0; i < g.nx(); ++i) {
    out.density(i, 0) = 0.0;
    for (std::size_t j = 1; j < g.nh(); ++j) {
      out.density(i, j) = pi[static_cast<Eigen::Index>(gen.active_index(i, j))] / (g.dx() * g.h_weight(j));
    }
  }
  return out;
}

}  // namespace mfg_seird::mfg
