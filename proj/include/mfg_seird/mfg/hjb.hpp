#pragma once

#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>
#include <string>

#include "mfg_seird/error.hpp"
#include "mfg_seird/mfg/generator.hpp"

namespace mfg_seird::mfg {

struct HjbResult {
  ValueField value;
  PolicyField policy;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool used_fallback = false;
};

namespace detail {

inline void scatter_active(const ControlledGenerator& gen, const Eigen::VectorXd& x, ValueField& V) {
  const RectGrid& g = gen.grid();
  for (std::size_t i = 0; i < g.nx(); ++i) {
    V(i, 0) = 0.0;
    for (std::size_t j = 1; j < g.nh(); ++j) V(i, j) = x[static_cast<Eigen::Index>(gen.active_index(i, j))];
  }
}

inline void check_finite(const Eigen::VectorXd& x, const char* where) {
  if (!x.allFinite()) throw SolverError(std::string(where) + ": non-finite values in solution");
}

}  // namespace detail

/// Howard policy iteration on the upwind discrete HJB equation. Each sweep
/// solves the linear policy-evaluation system and then improves the policy
/// with the closed-form node maximizers. If the sweep limit is hit, falls
/// back to implicit pseudo-time (damped value) iteration.
inline HjbResult hjb_solve(const ControlledGenerator& gen, const ValueField& v_init) {
  const MfgParams& params = gen.params();
  const RectGrid& g = gen.grid();
  require(v_init.grid == g, "hjb_solve: initial value field grid mismatch");

  HjbResult out{ValueField(g), PolicyField(g)};
  ValueField V = v_init;
  for (std::size_t i = 0; i < g.nx(); ++i) V(i, 0) = 0.0;
  for (double v : V.values) {
    if (!std::isfinite(v)) throw SolverError("hjb_solve: non-finite initial value field");
  }

  PolicyField policy = gen.improve(V);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analyzed = false;
  double residual = gen.hjb_residual(V);

  for (std::size_t it = 1; it <= params.max_inner_iters; ++it) {
    Eigen::SparseMatrix<double> A = gen.hjb_matrix(policy);
    A.makeCompressed();
    if (!analyzed) {
      lu.analyzePattern(A);
      analyzed = true;
    }
    lu.factorize(A);
    if (lu.info() != Eigen::Success) throw SolverError("hjb_solve: policy evaluation matrix is singular");
    const Eigen::VectorXd x = lu.solve(gen.hjb_rhs(policy));
    detail::check_finite(x, "hjb_solve");
    detail::scatter_active(gen, x, V);

    policy = gen.improve(V);
    residual = gen.hjb_residual(V);
    if (residual <= params.tol_inner) {
      out.value = std::move(V);
      out.policy = std::move(policy);
      out.residual = residual;
      out.iterations = it;
      return out;
    }
  }

  // Fallback: (1/tau + rho - G) V_new = V/tau + payoff, tau doubling.
  double tau = 1.0;
  const std::size_t fallback_iters = 20 * params.max_inner_iters;
  for (std::size_t it = 1; it <= fallback_iters; ++it) {
    Eigen::SparseMatrix<double> A = gen.hjb_matrix(policy);
    for (Eigen::Index k = 0; k < A.rows(); ++k) A.coeffRef(k, k) += 1.0 / tau;
    A.makeCompressed();
    lu.factorize(A);
    if (lu.info() != Eigen::Success) throw SolverError("hjb_solve: pseudo-time matrix is singular");
    Eigen::VectorXd rhs = gen.hjb_rhs(policy);
    for (std::size_t i = 0; i < g.nx(); ++i) {
      for (std::size_t j = 1; j < g.nh(); ++j) rhs[static_cast<Eigen::Index>(gen.active_index(i, j))] += V(i, j) / tau;
    }
    const Eigen::VectorXd x = lu.solve(rhs);
    detail::check_finite(x, "hjb_solve");
    detail::scatter_active(gen, x, V);
    policy = gen.improve(V);
    residual = gen.hjb_residual(V);
    if (residual <= params.tol_inner) {
      out.value = std::move(V);
      out.policy = std::move(policy);
      out.residual = residual;
      out.iterations = params.max_inner_iters + it;
      out.used_fallback = true;
      return out;
    }
    tau = std::min(2.0 * tau, 1e12);
  }
  std::ostringstream msg;
  msg << "hjb_solve: no convergence, last residual " << residual;
  throw SolverError(msg.str());
}

inline HjbResult hjb_solve(const DensityField& density, const MfgParams& params, const ValueField& v_init) {
  return hjb_solve(ControlledGenerator::for_density(params, density), v_init);
}

}  // namespace mfg_seird::mfg
