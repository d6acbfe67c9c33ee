#pragma once

// Tikhonov-regularized Gauss-Newton reconstruction of the complex potential
// q = 2 alpha u from linearized point-source boundary data, the numerical
// check that kappa^2 stays clear of the Dirichlet spectrum of -Delta + q,
// and the final division/stencil chain recovering the source f.

#include <optional>
#include <utility>
#include <vector>

#include "nlss/measure.hpp"

namespace nlss {

struct ReconstructionConfig {
  Real regularization_lambda = 1e-8;
  int max_gn_iterations = 6;
  Real step_tol = 1e-8;
  BVec support_mask;  // prior support of q, a subset of supp alpha
};

struct RecoveryResult {
  CVec q_hat;   // potential estimate on the full grid
  CVec u_hat;   // q_hat / (2 alpha) on the alpha_floor mask
  RVec f_hat;   // real part of the recovered right-hand side
  Real data_misfit = 0.0;
  std::optional<Real> f_error_rel;
  Real imag_residual_sup = 0.0;  // consistency diagnostic, f is real
};

// Dense machinery for the linear scattered-field model on a fixed support:
// per source m, w_m solves (I + Gss diag(q)) w = inc_m and the predicted
// data is -T (q .* w_m). Shared by the forward map, its Jacobian, and the
// Born initialization.
class LinearScattering {
 public:
  LinearScattering(const Grid2D& grid, Real kappa,
                   const BoundaryLayout& layout, const BVec& support_mask);

  int support_size() const { return Ns_; }
  const std::vector<int>& support() const { return supp_; }

  // Predicted data for the potential values q on the support, flattened
  // m-major: entry m*M + k is the trace at receiver k for source m.
  Eigen::VectorXcd forward(const Eigen::VectorXcd& q_s) const;

  // Dense Jacobian of forward at q_s (M^2 x Ns).
  CMat jacobian(const Eigen::VectorXcd& q_s) const;

  // Born (linear-in-q) data map, the zero-potential Jacobian.
  const CMat& born_jacobian() const { return born_jacobian_; }

  const Grid2D& grid() const { return grid_; }
  const BoundaryLayout& layout() const { return layout_; }

  // Solution fields w_m on the support, one column per source.
  CMat scattering_solutions(const Eigen::VectorXcd& q_s) const;

 private:
  Eigen::PartialPivLU<CMat> factor(const Eigen::VectorXcd& q_s) const;

  Grid2D grid_;
  Real kappa_;
  BoundaryLayout layout_;
  std::vector<int> supp_;
  int Ns_;
  CMat Gss_;   // support-to-support kernel, h^2 weights + self weight
  CMat T_;     // M x Ns support-to-receiver kernel with h^2 weights
  CMat inc_;   // Ns x M incident fields per source
  CMat born_jacobian_;
};

// F(q): per-source boundary traces of the linear scattered field, as an
// M x M matrix (receiver row, source column). q is a full-grid field; its
// nonzero cells define the support.
CMat forward_linear_map(const Grid2D& grid, Real kappa, const CVec& q,
                        const BoundaryLayout& layout);

struct ReconstructionReport {
  std::vector<Real> misfit_history;  // regularized objective per accepted step
  Real data_misfit = 0.0;            // final ||F(q) - data||_2
  int iterations = 0;
};

// Minimizes ||F(q) - data||^2 + lambda ||q||^2 over the support mask by
// Gauss-Newton with backtracking, starting from the regularized Born
// inversion. Returns the full-grid potential estimate.
std::pair<CVec, ReconstructionReport> reconstruct_potential(
    const LinearizedData& data, const ReconstructionConfig& config,
    const Grid2D& grid);

struct AssumptionAResult {
  Complex nearest_eigenvalue{0.0, 0.0};
  Real gap = 0.0;           // |nearest_eigenvalue - kappa^2|
  bool converged = false;   // shift-invert iteration settled
  bool satisfied = false;   // gap > 1e-3 * kappa^2 and converged
};

// Assembles the Dirichlet operator -Delta_h + q on the inside cells (ghost
// closure: a neighbor center outside the disk reflects with weight 2/h^2 on
// the diagonal, placing the wall at the shared edge midpoint) and locates
// the eigenvalue nearest kappa^2 by shift-invert power iteration.
AssumptionAResult check_assumption_A(const Grid2D& grid, const CVec& q,
                                     Real kappa);

// u_hat = q_hat/(2 alpha) where |alpha| >= alpha_floor * max|alpha|, then
// f_hat = Re(-Delta_h u_hat - kappa^2 u_hat + alpha u_hat^2) on that mask
// shrunk by one stencil cell. The imaginary part is returned as a
// diagnostic. ground_truth, when given, fills f_error_rel.
RecoveryResult recover_source(const CVec& q_hat, const RVec& alpha,
                              Real kappa, const Grid2D& grid,
                              Real alpha_floor,
                              const RVec* ground_truth = nullptr);

}  // namespace nlss
