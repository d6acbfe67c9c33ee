#pragma once

// Hankel function H0^(1) and the outgoing 2D Helmholtz Green's function
// Phi_kappa(r) = (i/4) H0^(1)(kappa r), normalized so that
// -Delta Phi - kappa^2 Phi = delta exactly.

#include <complex>
#include <vector>

namespace nlss {

using Real = double;
using Complex = std::complex<double>;

inline constexpr Real kPi = 3.141592653589793238462643383279502884;
inline constexpr Real kEulerGamma = 0.5772156649015328606;

// H0^(1)(z) = J0(z) + i Y0(z), relative error <= 1e-10 on [1e-8, 1e4].
// Ascending series below the crossover, a Laplace-type integral
// representation evaluated by generalized Gauss-Laguerre quadrature above.
Complex hankel1_0(Real z);

// H1^(1)(z) = J1(z) + i Y1(z), same scheme. Used by the closed form of the
// self-cell weight and by the Wronskian check.
Complex hankel1_1(Real z);

// (i/4) H0^(1)(kappa r).
Complex greens(Real kappa, Real r);

// max over samples of |H0^(1)(kappa r)| * sqrt(kappa r). Requires
// kappa*r >= 1 for every sample; this is the empirical far-field constant.
Real kernel_bound_check(Real kappa, const std::vector<Real>& r_samples);

// Integral of Phi_kappa over the disk of radius a = h/sqrt(pi) centered at
// the singularity (equal area to one grid cell), by adaptive dyadic
// Gauss-Legendre quadrature of 2 pi r Phi(r) on [0, a]. The closed form
// i pi a H1(kappa a)/(2 kappa) - 1/kappa^2 serves as its oracle in tests.
Complex self_cell_weight(Real kappa, Real h);

namespace detail {

// Both evaluation branches, exposed for the crossover continuity check.
Complex hankel1_0_series(Real z);
Complex hankel1_0_integral(Real z);
Complex hankel1_1_series(Real z);
Complex hankel1_1_integral(Real z);

inline constexpr Real kBranchCrossover = 5.0;

// Gauss rules from the Golub-Welsch symmetric tridiagonal eigenproblem.
struct QuadRule {
  std::vector<Real> nodes, weights;
};
QuadRule gauss_legendre(int n);                    // weight 1 on [-1, 1]
QuadRule gauss_laguerre(int n, Real alpha);        // weight t^alpha e^-t on [0, inf)

}  // namespace detail

}  // namespace nlss
