#include "nlss/measure.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "nlss/rng.hpp"

namespace nlss {

std::pair<CVec, CVec> solve_perturbed(const VolumeOperator& op,
                                      const SolverConfig& config,
                                      const CVec& f, const RVec& alpha,
                                      const BoundaryLayout& layout,
                                      int source_index, Real epsilon) {
  if (epsilon < 0.0) throw UsageError("solve_perturbed: epsilon must be >= 0");
  const Grid2D& grid = op.grid();
  const Real x0 = layout.px(source_index);
  const Real y0 = layout.py(source_index);
  const Real limit = grid.R - 2.0 * grid.h;
  for (int i = 0; i < grid.cells(); ++i) {
    if (alpha(i) != 0.0 && std::hypot(grid.x(i), grid.y(i)) > limit) {
      throw SupportViolation(
          "solve_perturbed: supp alpha must stay within B_{R-2h} so the "
          "incident field is bounded on it");
    }
  }
  CVec inc = incident_field(grid, config.kappa, x0, y0);
  CVec v_eff = (2.0 * epsilon) * alpha.cast<Complex>() * inc;
  CVec f_eff = f - (epsilon * epsilon) * alpha.cast<Complex>() * inc * inc;
  auto [u_eps, rep] = picard_solve(op, config, f_eff, v_eff, alpha);

  CVec rho = f_eff - v_eff * u_eps - alpha.cast<Complex>() * u_eps * u_eps;
  CVec trace = epsilon * incident_trace(layout, config.kappa, x0, y0) +
               trace_on_boundary(grid, config.kappa, rho, layout);
  return {std::move(u_eps), std::move(trace)};
}

MeasurementSet synthesize_measurements(const Grid2D& grid,
                                       const SolverConfig& config,
                                       const CVec& f, const RVec& alpha,
                                       const BoundaryLayout& layout,
                                       const std::vector<Real>& epsilons,
                                       Real noise_level, std::uint64_t seed) {
  if (epsilons.empty() || epsilons.front() != 0.0) {
    throw UsageError(
        "synthesize_measurements: epsilon schedule must start at 0");
  }
  for (std::size_t e = 1; e < epsilons.size(); ++e) {
    if (epsilons[e] <= epsilons[e - 1]) {
      throw UsageError(
          "synthesize_measurements: epsilon schedule must be strictly "
          "ascending");
    }
  }
  VolumeOperator op(grid, config.kappa);
  MeasurementSet out;
  out.kappa = config.kappa;
  out.R = grid.R;
  out.layout = layout;
  out.epsilons = epsilons;
  const std::size_t E = epsilons.size();
  out.traces.resize(static_cast<std::size_t>(layout.M) * E);

  // The unperturbed trace does not depend on the source; solve once.
  auto [u_base, rep_base] = picard_solve(op, config, f, CVec::Zero(grid.cells()), alpha);
  CVec rho_base = f - alpha.cast<Complex>() * u_base * u_base;
  CVec trace_base = trace_on_boundary(grid, config.kappa, rho_base, layout);

  GaussianRng rng(seed);
  for (int m = 0; m < layout.M; ++m) {
    out.traces[m * E] = trace_base;
    CVec inct = incident_trace(layout, config.kappa, layout.px(m), layout.py(m));
    for (std::size_t e = 1; e < E; ++e) {
      const Real eps = epsilons[e];
      CVec trace;
      try {
        trace = solve_perturbed(op, config, f, alpha, layout,
                                m, eps).second;
      } catch (const Error& err) {
        throw Error(err.code(), "synthesize_measurements: pair (m=" +
                                    std::to_string(m) +
                                    ", eps=" + std::to_string(eps) +
                                    ") failed: " + err.what());
      }
      if (noise_level > 0.0) {
        CVec signal = trace - trace_base - eps * inct;
        Real rms = std::sqrt(signal.abs2().mean());
        Real sigma = noise_level * rms / std::sqrt(2.0);
        for (int k = 0; k < layout.M; ++k) {
          trace(k) += sigma * rng.cnormal();
        }
      }
      out.traces[m * E + e] = std::move(trace);
    }
  }
  return out;
}

LinearizedData linearize(const MeasurementSet& mset,
                         const std::vector<CVec>* interior_runs,
                         const CVec* u_unperturbed) {
  const std::size_t E = mset.epsilons.size();
  if (E < 3) {
    throw IllConditionedExtrapolation(
        "linearize: need at least two nonzero epsilon samples");
  }
  const int M = mset.layout.M;
  const std::size_t K = E - 1;  // nonzero epsilons

  // Least squares for the model v + c*eps; the 2x2 normal system is formed
  // once. Its conditioning bounds the extrapolation amplification.
  Real s0 = static_cast<Real>(K), s1 = 0.0, s2 = 0.0;
  for (std::size_t e = 1; e < E; ++e) {
    s1 += mset.epsilons[e];
    s2 += mset.epsilons[e] * mset.epsilons[e];
  }
  const Real tr = s0 + s2;
  const Real det = s0 * s2 - s1 * s1;
  if (!(det > 0.0)) {
    throw IllConditionedExtrapolation(
        "linearize: epsilon samples are degenerate");
  }
  const Real disc = std::sqrt(tr * tr - 4.0 * det);
  const Real cond = (tr + disc) / (tr - disc);
  if (cond > 1e10) {
    throw IllConditionedExtrapolation(
        "linearize: epsilon samples too close, extrapolation condition " +
        std::to_string(cond));
  }

  LinearizedData out;
  out.kappa = mset.kappa;
  out.R = mset.R;
  out.layout = mset.layout;
  out.v_traces.resize(M);

  // Intercept weights of the fit: v = sum_e w_e * row_e with
  // w = (A^T A)^{-1} A^T applied to the first coordinate.
  std::vector<Real> w(K);
  for (std::size_t e = 0; e < K; ++e) {
    const Real eps = mset.epsilons[e + 1];
    w[e] = (s2 - s1 * eps) / det;
  }

  for (int m = 0; m < M; ++m) {
    CVec inct = incident_trace(mset.layout, mset.kappa, mset.layout.px(m),
                               mset.layout.py(m));
    const CVec& t0 = mset.trace(m, 0);
    CVec v = CVec::Zero(M);
    for (std::size_t e = 0; e < K; ++e) {
      const Real eps = mset.epsilons[e + 1];
      CVec quotient = (mset.trace(m, static_cast<int>(e) + 1) - t0) / eps - inct;
      v += w[e] * quotient;
    }
    out.v_traces[m] = std::move(v);
  }

  if (interior_runs != nullptr) {
    if (u_unperturbed == nullptr ||
        interior_runs->size() != static_cast<std::size_t>(M) * K) {
      throw UsageError(
          "linearize: interior runs require the unperturbed field and one "
          "field per (source, nonzero epsilon) pair");
    }
    out.v_fields.resize(M);
    for (int m = 0; m < M; ++m) {
      CVec v = CVec::Zero(u_unperturbed->size());
      for (std::size_t e = 0; e < K; ++e) {
        const Real eps = mset.epsilons[e + 1];
        v += w[e] * (((*interior_runs)[m * K + e] - *u_unperturbed) / eps);
      }
      out.v_fields[m] = std::move(v);
    }
  }
  return out;
}

std::pair<CVec, Real> verify_linearized(const Grid2D& grid,
                                        const SolverConfig& config,
                                        const CVec& u, const RVec& alpha,
                                        const BoundaryLayout& layout,
                                        int source_index) {
  const int N = grid.cells();
  CVec q = 2.0 * alpha.cast<Complex>() * u;
  std::vector<int> supp;
  for (int i = 0; i < N; ++i) {
    if (alpha(i) != 0.0) supp.push_back(i);
  }
  const int Ns = static_cast<int>(supp.size());
  if (Ns == 0) {
    return {CVec::Zero(N), 0.0};
  }
  const Real x0 = layout.px(source_index);
  const Real y0 = layout.py(source_index);
  const Complex self_w = self_cell_weight(config.kappa, grid.h);
  const Real w = grid.h * grid.h;

  Eigen::VectorXcd qs(Ns), inc_s(Ns);
  for (int a = 0; a < Ns; ++a) {
    qs(a) = q(supp[a]);
    inc_s(a) = greens(config.kappa,
                      std::hypot(grid.x(supp[a]) - x0, grid.y(supp[a]) - y0));
  }
  CMat Gss(Ns, Ns);
  for (int a = 0; a < Ns; ++a) {
    Gss(a, a) = self_w;
    for (int b = a + 1; b < Ns; ++b) {
      Complex g = greens(config.kappa,
                         std::hypot(grid.x(supp[a]) - grid.x(supp[b]),
                                    grid.y(supp[a]) - grid.y(supp[b]))) *
                  w;
      Gss(a, b) = g;
      Gss(b, a) = g;
    }
  }
  CMat A = CMat::Identity(Ns, Ns) + Gss * qs.asDiagonal();
  Eigen::PartialPivLU<CMat> lu(A);
  // A singular restricted operator is the discrete shadow of a Dirichlet
  // eigenvalue at kappa^2; detect it through the pivot spread.
  Real umax = 0.0, umin = std::numeric_limits<Real>::infinity();
  for (int a = 0; a < Ns; ++a) {
    Real p = std::abs(lu.matrixLU()(a, a));
    umax = std::max(umax, p);
    umin = std::min(umin, p);
  }
  if (!(umin > umax * 1e-14)) {
    throw AssumptionAViolated(
        "verify_linearized: the linearized scattering system is singular");
  }
  Eigen::VectorXcd rhs = -(Gss * qs.cwiseProduct(inc_s));
  Eigen::VectorXcd v_s = lu.solve(rhs);

  // Represent v everywhere through its density and check the linearized
  // equation under the stencil.
  CVec density = CVec::Zero(N);
  for (int a = 0; a < Ns; ++a) {
    density(supp[a]) = qs(a) * (v_s(a) + inc_s(a));
  }
  VolumeOperator op(grid, config.kappa);
  CVec v_full = -op.apply(density);

  CVec inc = incident_field(grid, config.kappa, x0, y0);
  CVec defect = discrete_helmholtz(grid, config.kappa, v_full) + q * (v_full + inc);
  BVec valid = stencil_valid_mask(grid);
  Real residual = 0.0;
  for (int i = 0; i < N; ++i) {
    if (valid(i)) residual = std::max(residual, std::abs(defect(i)));
  }
  return {std::move(v_full), residual};
}

RVec nonradiating_rhs(const Grid2D& grid, Real kappa, const RVec& phi,
                      const RVec& alpha) {
  if (phi.size() != grid.cells() || alpha.size() != grid.cells()) {
    throw UsageError("nonradiating_rhs: field sizes do not match the grid");
  }
  const Real limit = grid.R - 4.0 * grid.h;
  for (int i = 0; i < grid.cells(); ++i) {
    if (phi(i) != 0.0 && std::hypot(grid.x(i), grid.y(i)) > limit) {
      throw SupportViolation(
          "nonradiating_rhs: phi must be supported in B_{R-4h}");
    }
  }
  CVec stencil = discrete_helmholtz(grid, kappa, phi.cast<Complex>());
  RVec f0 = stencil.real() + alpha * phi * phi;
  BVec valid = stencil_valid_mask(grid);
  for (int i = 0; i < grid.cells(); ++i) {
    if (!valid(i)) f0(i) = 0.0;
  }
  return f0;
}

std::pair<RVec, Real> nonradiating_source(const Grid2D& grid,
                                          const SolverConfig& config,
                                          const RVec& phi, const RVec& alpha) {
  RVec f0 = nonradiating_rhs(grid, config.kappa, phi, alpha);
  if ((f0 == 0.0).all()) {
    return {std::move(f0), 0.0};
  }
  VolumeOperator op(grid, config.kappa);
  auto [u, rep] = picard_solve(op, config, f0.cast<Complex>(),
                               CVec::Zero(grid.cells()), alpha);
  CVec rho = f0.cast<Complex>() - alpha.cast<Complex>() * u * u;
  BoundaryLayout dense = boundary_layout(grid.R, 64);
  CVec trace = trace_on_boundary(grid, config.kappa, rho, dense);
  return {std::move(f0), trace.abs().maxCoeff()};
}

}  // namespace nlss
