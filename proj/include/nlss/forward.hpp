#pragma once

// Picard fixed-point solver for the nonlinear volume integral equation
// u = G[f] - G[V u + alpha u^2], where G is the outgoing volume potential.
// The guard detects loss of contraction instead of gating on kappa.

#include <utility>
#include <vector>

#include "nlss/ops.hpp"

namespace nlss {

struct SolverConfig {
  Real kappa = 8.0;
  Real tol = 1e-10;
  int max_iter = 50;
  Real contraction_guard = 0.99;
  bool record_iterates = true;  // keep per-iterate sup norms for diagnostics
};

struct SolveReport {
  int iterations_used = 0;
  std::vector<Real> sup_diffs;           // ||u_{j+1} - u_j||_inf per update
  std::vector<Real> contraction_ratios;  // sup_diffs[j+1] / sup_diffs[j]
  std::vector<Real> sup_iterates;        // ||u_j||_inf including u_0
  Real final_residual = 0.0;  // ||u - G f + G[V u + alpha u^2]||_inf
  Real born_term_norm = 0.0;  // ||u_0||_inf
  Real remainder_norm = 0.0;  // ||u - u_0||_inf
};

// u_0 = G[f].
CVec born_term(const Grid2D& grid, Real kappa, const CVec& f);

// Iterates u_{j+1} = u_0 - G[V u_j + alpha u_j^2] until the sup-norm update
// drops below tol. V may be complex (the perturbed problem needs it); f may
// be complex for the same reason. Throws NonContraction when an update
// ratio exceeds the guard from the third update on, MaxIterExceeded at the
// iteration cap.
std::pair<CVec, SolveReport> picard_solve(const VolumeOperator& op,
                                          const SolverConfig& config,
                                          const CVec& f, const CVec& V,
                                          const RVec& alpha);

std::pair<CVec, SolveReport> picard_solve(const Grid2D& grid,
                                          const SolverConfig& config,
                                          const CVec& f, const CVec& V,
                                          const RVec& alpha);

// ||u - u_0||_inf for each kappa (the dispersive remainder decays with
// frequency). Propagates solver errors per kappa.
std::vector<std::pair<Real, Real>> resolvent_scaling_study(
    const Grid2D& grid, const CVec& f, const CVec& V, const RVec& alpha,
    const std::vector<Real>& kappas, const SolverConfig& base_config);

// Least-squares slope of log(values) against log(keys); the remainder study
// feeds this to measure the empirical decay order.
Real fit_loglog_slope(const std::vector<std::pair<Real, Real>>& samples);

// Max over all retained iterate sup norms across the given runs.
Real uniform_bound_check(const std::vector<SolveReport>& reports);

}  // namespace nlss
