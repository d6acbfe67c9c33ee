#pragma once

// Boundary data synthesis with reference point sources on the measurement
// circle, the finite-difference linearization in the source amplitude, and
// the non-radiating counterexample generator.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "nlss/forward.hpp"

namespace nlss {

struct MeasurementSet {
  Real kappa = 0.0;
  Real R = 0.0;
  BoundaryLayout layout;
  std::vector<Real> epsilons;  // ascending, epsilons[0] == 0
  // traces[m * epsilons.size() + e] is the length-M total boundary trace for
  // source m at amplitude epsilons[e].
  std::vector<CVec> traces;

  const CVec& trace(int m, int e) const {
    return traces[static_cast<std::size_t>(m) * epsilons.size() + e];
  }
};

struct LinearizedData {
  Real kappa = 0.0;
  Real R = 0.0;
  BoundaryLayout layout;
  // Extrapolated scattered-response traces, one length-M vector per source.
  std::vector<CVec> v_traces;
  // Interior scattered fields, filled only on verification runs.
  std::vector<CVec> v_fields;
};

// Solves the amplitude-epsilon perturbed problem: the point source at x0
// contributes an exact incident field, folded into a complex linear
// potential 2 eps alpha inc and an extra source -eps^2 alpha inc^2. Returns
// the interior solution and the total trace eps*inc + (scattered trace).
std::pair<CVec, CVec> solve_perturbed(const VolumeOperator& op,
                                      const SolverConfig& config,
                                      const CVec& f, const RVec& alpha,
                                      const BoundaryLayout& layout,
                                      int source_index, Real epsilon);

// Runs solve_perturbed over every (source, epsilon) pair in deterministic
// m-major order. noise_level > 0 adds complex Gaussian noise to the
// scattered part of each nonzero-epsilon trace, scaled per trace so that
// the perturbation is noise_level times the RMS of the informative signal
// (the total trace is dominated by the known incident term, which carries
// no information about the scene).
MeasurementSet synthesize_measurements(const Grid2D& grid,
                                       const SolverConfig& config,
                                       const CVec& f, const RVec& alpha,
                                       const BoundaryLayout& layout,
                                       const std::vector<Real>& epsilons,
                                       Real noise_level = 0.0,
                                       std::uint64_t seed = 0);

// Difference quotients (trace_eps - trace_0)/eps - inc, fitted over the
// nonzero epsilons with the linear model v + c*eps; the intercept is the
// linearized scattered trace. interior_runs, when provided, must hold the
// per-(m, eps) interior fields (m-major, nonzero epsilons only) together
// with the unperturbed field, and the same extrapolation fills v_fields.
LinearizedData linearize(const MeasurementSet& mset,
                         const std::vector<CVec>* interior_runs = nullptr,
                         const CVec* u_unperturbed = nullptr);

// Direct dense solve of the linearized scattered field for one source:
// v = -G[q (v + inc)] with q = 2 alpha u, restricted to supp alpha and then
// evaluated on the full grid through its density. Returns the field and the
// sup-norm stencil residual of the linearized equation over the interior.
std::pair<CVec, Real> verify_linearized(const Grid2D& grid,
                                        const SolverConfig& config,
                                        const CVec& u, const RVec& alpha,
                                        const BoundaryLayout& layout,
                                        int source_index);

// f0 = -Delta_h phi - kappa^2 phi + alpha phi^2, zeroed on the outer cell
// ring where the stencil is undefined. Its exact outgoing solution is phi
// itself, which vanishes on the boundary, so f0 radiates only through
// discretization error. phi must be supported in B_{R-4h}.
RVec nonradiating_rhs(const Grid2D& grid, Real kappa, const RVec& phi,
                      const RVec& alpha);

// Builds nonradiating_rhs(phi), solves the nonlinear problem it drives, and
// returns f0 together with the sup of its boundary trace sampled at 64
// receivers.
std::pair<RVec, Real> nonradiating_source(const Grid2D& grid,
                                          const SolverConfig& config,
                                          const RVec& phi, const RVec& alpha);

}  // namespace nlss
