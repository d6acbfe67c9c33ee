#pragma once

// Cell-centered discretization of the square [-R, R]^2 covering the disk
// B_R, plus the uniform boundary sampling used for sources and receivers.
// Fields are flat Eigen arrays over the n*n cells in row-major order:
// index = row*n + col, with x varying along columns and y along rows.

#include <Eigen/Dense>
#include <cmath>

#include "nlss/errors.hpp"
#include "nlss/specfun.hpp"

namespace nlss {

using RVec = Eigen::ArrayXd;
using CVec = Eigen::ArrayXcd;
using BVec = Eigen::Array<bool, Eigen::Dynamic, 1>;
using CMat = Eigen::MatrixXcd;

struct Grid2D {
  Real R = 0.0;
  int n = 0;
  Real h = 0.0;
  RVec x, y;    // per-cell center coordinates, flat row-major
  BVec inside;  // center strictly inside B_R

  int cells() const { return n * n; }
  int index(int row, int col) const { return row * n + col; }
};

inline Grid2D build_grid(Real R, int n) {
  if (!(R > 0.0)) throw UsageError("build_grid: R must be positive");
  if (n < 4 || n % 2 != 0) {
    throw UsageError(
        "build_grid: n must be an even integer >= 4 (even n keeps the "
        "origin off cell centers)");
  }
  Grid2D g;
  g.R = R;
  g.n = n;
  g.h = 2.0 * R / n;
  g.x.resize(g.cells());
  g.y.resize(g.cells());
  g.inside.resize(g.cells());
  for (int row = 0; row < n; ++row) {
    Real yc = -R + (row + 0.5) * g.h;
    for (int col = 0; col < n; ++col) {
      Real xc = -R + (col + 0.5) * g.h;
      int i = g.index(row, col);
      g.x(i) = xc;
      g.y(i) = yc;
      g.inside(i) = std::hypot(xc, yc) < R;
    }
  }
  return g;
}

struct BoundaryLayout {
  Real R = 0.0;
  int M = 0;
  RVec x, y;  // points at angles 2 pi m / M on the circle of radius R

  Real px(int m) const { return x(m); }
  Real py(int m) const { return y(m); }
};

inline BoundaryLayout boundary_layout(Real R, int M) {
  if (!(R > 0.0) || M < 1) {
    throw UsageError("boundary_layout: R must be positive and M >= 1");
  }
  BoundaryLayout b;
  b.R = R;
  b.M = M;
  b.x.resize(M);
  b.y.resize(M);
  for (int m = 0; m < M; ++m) {
    Real th = 2.0 * kPi * m / M;
    b.x(m) = R * std::cos(th);
    b.y(m) = R * std::sin(th);
  }
  return b;
}

// Cells of the square with all four stencil neighbors present.
inline BVec stencil_valid_mask(const Grid2D& g) {
  BVec m = BVec::Constant(g.cells(), false);
  for (int row = 1; row + 1 < g.n; ++row)
    for (int col = 1; col + 1 < g.n; ++col) m(g.index(row, col)) = true;
  return m;
}

}  // namespace nlss
