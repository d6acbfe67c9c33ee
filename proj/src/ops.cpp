#include "nlss/ops.hpp"

#include <cmath>
#include <vector>

#include "nlss/threads.hpp"

namespace nlss {

VolumeOperator::VolumeOperator(const Grid2D& grid, Real kappa, bool conjugated)
    : grid_(grid), kappa_(kappa), stride_(2 * grid.n - 1) {
  if (!(kappa > 0.0)) throw UsageError("VolumeOperator: kappa must be positive");
  const int n = grid_.n;
  const Real h = grid_.h;
  self_weight_ = self_cell_weight(kappa, h);
  table_.resize(stride_ * stride_);
  const Real w = h * h;
  for (int dr = -(n - 1); dr <= n - 1; ++dr) {
    for (int dc = -(n - 1); dc <= n - 1; ++dc) {
      int k = (dr + n - 1) * stride_ + (dc + n - 1);
      if (dr == 0 && dc == 0) {
        table_(k) = self_weight_;
      } else {
        Real r = h * std::hypot(static_cast<Real>(dr), static_cast<Real>(dc));
        table_(k) = greens(kappa, r) * w;
      }
    }
  }
  if (conjugated) table_ = table_.conjugate();
}

CVec VolumeOperator::apply(const CVec& density) const {
  const int n = grid_.n;
  const int N = grid_.cells();
  if (density.size() != N) {
    throw UsageError("VolumeOperator::apply: density size mismatch");
  }
  // Support cells, in row-major order; the per-target sum runs over this
  // fixed order regardless of which thread owns the target.
  std::vector<int> supp;
  supp.reserve(N);
  for (int i = 0; i < N; ++i) {
    if (density(i) != Complex(0.0, 0.0)) supp.push_back(i);
  }
  CVec out = CVec::Zero(N);
  if (supp.empty()) return out;

  const int offset = n - 1;
  parallel_for(N, default_threads(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t t = lo; t < hi; ++t) {
      const int tr = static_cast<int>(t) / n;
      const int tc = static_cast<int>(t) % n;
      Complex acc(0.0, 0.0);
      for (int s : supp) {
        const int sr = s / n;
        const int sc = s % n;
        acc += table_((tr - sr + offset) * stride_ + (tc - sc + offset)) *
               density(s);
      }
      out(t) = acc;
    }
  });
  return out;
}

CVec VolumeOperator::apply_at(const CVec& density, const RVec& px,
                              const RVec& py) const {
  const int N = grid_.cells();
  if (density.size() != N) {
    throw UsageError("VolumeOperator::apply_at: density size mismatch");
  }
  std::vector<int> supp;
  for (int i = 0; i < N; ++i) {
    if (density(i) != Complex(0.0, 0.0)) supp.push_back(i);
  }
  const Real w = grid_.h * grid_.h;
  CVec out = CVec::Zero(px.size());
  for (Eigen::Index k = 0; k < px.size(); ++k) {
    Complex acc(0.0, 0.0);
    for (int s : supp) {
      Real r = std::hypot(px(k) - grid_.x(s), py(k) - grid_.y(s));
      acc += greens(kappa_, r) * density(s);
    }
    out(k) = acc * w;
  }
  return out;
}

CVec volume_potential(const Grid2D& grid, Real kappa, const CVec& density) {
  return VolumeOperator(grid, kappa).apply(density);
}

CVec trace_on_boundary(const Grid2D& grid, Real kappa, const CVec& density,
                       const BoundaryLayout& layout) {
  const Real limit = grid.R - 2.0 * grid.h;
  std::vector<int> supp;
  for (int i = 0; i < grid.cells(); ++i) {
    if (density(i) == Complex(0.0, 0.0)) continue;
    if (std::hypot(grid.x(i), grid.y(i)) > limit) {
      throw SupportViolation(
          "trace_on_boundary: density support reaches within 2h of the "
          "boundary circle; the plain quadrature is invalid there");
    }
    supp.push_back(i);
  }
  const Real w = grid.h * grid.h;
  CVec out = CVec::Zero(layout.M);
  for (int m = 0; m < layout.M; ++m) {
    Complex acc(0.0, 0.0);
    for (int s : supp) {
      Real r = std::hypot(layout.x(m) - grid.x(s), layout.y(m) - grid.y(s));
      acc += greens(kappa, r) * density(s);
    }
    out(m) = acc * w;
  }
  return out;
}

CVec discrete_helmholtz(const Grid2D& grid, Real kappa, const CVec& field) {
  const int n = grid.n;
  if (field.size() != grid.cells()) {
    throw UsageError("discrete_helmholtz: field size mismatch");
  }
  const Real inv_h2 = 1.0 / (grid.h * grid.h);
  const Real k2 = kappa * kappa;
  CVec out = CVec::Zero(grid.cells());
  for (int row = 1; row + 1 < n; ++row) {
    for (int col = 1; col + 1 < n; ++col) {
      const int i = grid.index(row, col);
      Complex lap = (field(i - n) + field(i + n) + field(i - 1) +
                     field(i + 1) - 4.0 * field(i)) *
                    inv_h2;
      out(i) = -lap - k2 * field(i);
    }
  }
  return out;
}

CVec incident_field(const Grid2D& grid, Real kappa, Real x0, Real y0) {
  CVec out(grid.cells());
  for (int i = 0; i < grid.cells(); ++i) {
    out(i) = greens(kappa, std::hypot(grid.x(i) - x0, grid.y(i) - y0));
  }
  return out;
}

CVec incident_trace(const BoundaryLayout& layout, Real kappa, Real x0,
                    Real y0) {
  CVec out = CVec::Zero(layout.M);
  for (int m = 0; m < layout.M; ++m) {
    Real r = std::hypot(layout.x(m) - x0, layout.y(m) - y0);
    out(m) = r > 1e-12 * layout.R ? greens(kappa, r) : Complex(0.0, 0.0);
  }
  return out;
}

}  // namespace nlss
