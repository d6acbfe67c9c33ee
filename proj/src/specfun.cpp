#include "nlss/specfun.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nlss/errors.hpp"

namespace nlss {
namespace detail {

QuadRule gauss_legendre(int n) {
  // Jacobi matrix of the Legendre recurrence; eigenvalues are the nodes,
  // weights are 2 * (first eigenvector component)^2.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    Real b = k / std::sqrt(4.0 * k * k - 1.0);
    T(k - 1, k) = b;
    T(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = es.eigenvalues()(k);
    Real v0 = es.eigenvectors()(0, k);
    rule.weights[k] = 2.0 * v0 * v0;
  }
  return rule;
}

QuadRule gauss_laguerre(int n, Real alpha) {
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) T(k, k) = 2.0 * k + alpha + 1.0;
  for (int k = 1; k < n; ++k) {
    Real b = std::sqrt(k * (k + alpha));
    T(k - 1, k) = b;
    T(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  Real mu0 = std::tgamma(alpha + 1.0);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = es.eigenvalues()(k);
    Real v0 = es.eigenvectors()(0, k);
    rule.weights[k] = mu0 * v0 * v0;
  }
  return rule;
}

Complex hankel1_0_series(Real z) {
  // J0 = sum (-1)^k q^k/(k!)^2 with q = z^2/4;
  // Y0 = (2/pi)[(ln(z/2) + gamma) J0 + sum (-1)^{k+1} H_k q^k/(k!)^2].
  Real q = 0.25 * z * z;
  Real t = 1.0, j0 = 1.0, s = 0.0, Hk = 0.0;
  Real sign = -1.0;
  for (int k = 1; k <= 200; ++k) {
    t *= q / (static_cast<Real>(k) * k);
    j0 += sign * t;
    Hk += 1.0 / k;
    s += -sign * Hk * t;
    if (t < 1e-20 * std::max(1.0, std::abs(j0))) break;
    sign = -sign;
  }
  Real y0 = (2.0 / kPi) * ((std::log(0.5 * z) + kEulerGamma) * j0 + s);
  return Complex(j0, y0);
}

Complex hankel1_1_series(Real z) {
  // J1 = (z/2) sum (-1)^k q^k/(k!(k+1)!);
  // Y1 = (2/pi)(ln(z/2)+gamma) J1 - 2/(pi z)
  //      - (z/(2 pi)) sum (-1)^k (H_k + H_{k+1}) q^k/(k!(k+1)!).
  Real q = 0.25 * z * z;
  Real t = 1.0, j1s = 1.0;
  Real Hk = 0.0, Hk1 = 1.0;
  Real s = Hk + Hk1;
  Real sign = -1.0;
  for (int k = 1; k <= 200; ++k) {
    t *= q / (static_cast<Real>(k) * (k + 1));
    j1s += sign * t;
    Hk += 1.0 / k;
    Hk1 += 1.0 / (k + 1);
    s += sign * (Hk + Hk1) * t;
    if (t < 1e-20) break;
    sign = -sign;
  }
  Real j1 = 0.5 * z * j1s;
  Real y1 = (2.0 / kPi) * (std::log(0.5 * z) + kEulerGamma) * j1 -
            2.0 / (kPi * z) - z / (2.0 * kPi) * s;
  return Complex(j1, y1);
}

namespace {

constexpr int kLaguerreNodes = 48;

const QuadRule& laguerre_minus_half() {
  static const QuadRule rule = gauss_laguerre(kLaguerreNodes, -0.5);
  return rule;
}

const QuadRule& laguerre_plus_half() {
  static const QuadRule rule = gauss_laguerre(kLaguerreNodes, 0.5);
  return rule;
}

}  // namespace

Complex hankel1_0_integral(Real z) {
  // H0(z) = sqrt(2/(pi z)) e^{i(z - pi/4)} / Gamma(1/2)
  //         * int_0^inf e^-t t^{-1/2} (1 + i t/(2z))^{-1/2} dt.
  const QuadRule& rule = laguerre_minus_half();
  Complex acc(0.0, 0.0);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    Complex g = std::pow(Complex(1.0, rule.nodes[k] / (2.0 * z)), -0.5);
    acc += rule.weights[k] * g;
  }
  Real gamma_half = std::sqrt(kPi);
  Complex phase = std::exp(Complex(0.0, z - 0.25 * kPi));
  return std::sqrt(2.0 / (kPi * z)) * phase * acc / gamma_half;
}

Complex hankel1_1_integral(Real z) {
  const QuadRule& rule = laguerre_plus_half();
  Complex acc(0.0, 0.0);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    Complex g = std::pow(Complex(1.0, rule.nodes[k] / (2.0 * z)), 0.5);
    acc += rule.weights[k] * g;
  }
  Real gamma_three_half = 0.5 * std::sqrt(kPi);
  Complex phase = std::exp(Complex(0.0, z - 0.75 * kPi));
  return std::sqrt(2.0 / (kPi * z)) * phase * acc / gamma_three_half;
}

}  // namespace detail

namespace {

void require_positive_finite(Real z, const char* who) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw std::domain_error(std::string(who) +
                            ": argument must be positive and finite, got " +
                            std::to_string(z));
  }
}

}  // namespace

Complex hankel1_0(Real z) {
  require_positive_finite(z, "hankel1_0");
  return z <= detail::kBranchCrossover ? detail::hankel1_0_series(z)
                                       : detail::hankel1_0_integral(z);
}

Complex hankel1_1(Real z) {
  require_positive_finite(z, "hankel1_1");
  return z <= detail::kBranchCrossover ? detail::hankel1_1_series(z)
                                       : detail::hankel1_1_integral(z);
}

Complex greens(Real kappa, Real r) {
  require_positive_finite(kappa, "greens");
  require_positive_finite(r, "greens");
  return Complex(0.0, 0.25) * hankel1_0(kappa * r);
}

Real kernel_bound_check(Real kappa, const std::vector<Real>& r_samples) {
  require_positive_finite(kappa, "kernel_bound_check");
  Real worst = 0.0;
  for (Real r : r_samples) {
    require_positive_finite(r, "kernel_bound_check");
    Real z = kappa * r;
    if (z < 1.0) {
      throw std::domain_error(
          "kernel_bound_check: sample with kappa*r = " + std::to_string(z) +
          " below 1; the bound applies to the far/moderate field only");
    }
    Real value = std::abs(hankel1_0(z)) * std::sqrt(z);
    if (value > worst) worst = value;
  }
  return worst;
}

Complex self_cell_weight(Real kappa, Real h) {
  require_positive_finite(kappa, "self_cell_weight");
  require_positive_finite(h, "self_cell_weight");
  const Real a = h / std::sqrt(kPi);
  // Dyadic panels [a 2^-(k+1), a 2^-k] tame the logarithmic singularity at
  // r = 0; the integrand 2 pi r Phi(r) vanishes like r log r, so the
  // remainder below the last panel is negligible at depth ~50.
  static const detail::QuadRule rule = detail::gauss_legendre(16);
  Complex total(0.0, 0.0);
  Real hi = a;
  for (int depth = 0; depth < 60; ++depth) {
    Real lo = 0.5 * hi;
    Complex panel(0.0, 0.0);
    Real mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      Real r = mid + half * rule.nodes[k];
      panel += rule.weights[k] * (2.0 * kPi * r) * greens(kappa, r);
    }
    panel *= half;
    total += panel;
    if (std::abs(panel) < 1e-16 * std::abs(total) && depth > 4) break;
    hi = lo;
  }
  return total;
}

}  // namespace nlss
