#pragma once

// Discrete integral and differential operators on the grid: the weakly
// singular volume potential (Nystrom with an equal-area self-cell weight),
// boundary trace evaluation, and the 5-point Helmholtz stencil.

#include "nlss/grid.hpp"

namespace nlss {

// rho |-> integral of Phi_kappa(|x - y|) rho(y) dy, tabulated on center
// differences so one table drives every target cell. Application is direct
// summation over the nonzero density cells in row-major order, which keeps
// outputs bit-stable for any thread count.
class VolumeOperator {
 public:
  VolumeOperator(const Grid2D& grid, Real kappa, bool conjugated = false);

  // Potential at every cell center.
  CVec apply(const CVec& density) const;

  // Potential at arbitrary points strictly away from the support (plain
  // h^2-weighted summation; the integrand is smooth there).
  CVec apply_at(const CVec& density, const RVec& px, const RVec& py) const;

  const Grid2D& grid() const { return grid_; }
  Real kappa() const { return kappa_; }
  Complex self_weight() const { return self_weight_; }

 private:
  Grid2D grid_;
  Real kappa_;
  Complex self_weight_;
  CVec table_;  // (2n-1)^2 kernel values times h^2, indexed by center offset
  int stride_;
};

// One-shot convenience wrapper around VolumeOperator.
CVec volume_potential(const Grid2D& grid, Real kappa, const CVec& density);

// Trace of the volume potential at the boundary layout points. Errors if
// any nonzero density cell lies outside B_{R-2h}: the plain h^2 summation
// needs the kernel smooth at the receivers.
CVec trace_on_boundary(const Grid2D& grid, Real kappa, const CVec& density,
                       const BoundaryLayout& layout);

// -Delta_h f - kappa^2 f with the 5-point Laplacian; the outermost cell
// ring of the square lacks neighbors and is returned as zero (callers
// exclude it from norms via stencil_valid_mask).
CVec discrete_helmholtz(const Grid2D& grid, Real kappa, const CVec& field);

// Phi_kappa(|center - x0|) at every cell center.
CVec incident_field(const Grid2D& grid, Real kappa, Real x0, Real y0);

// Phi_kappa(|p_k - x0|) at the layout points, with the convention that a
// receiver coincident with the source reads 0 (the singular column of the
// data matrix is never used by the linearization).
CVec incident_trace(const BoundaryLayout& layout, Real kappa, Real x0,
                    Real y0);

}  // namespace nlss
