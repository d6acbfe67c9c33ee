#include "nlss/forward.hpp"

#include <cmath>

namespace nlss {

CVec born_term(const Grid2D& grid, Real kappa, const CVec& f) {
  return volume_potential(grid, kappa, f);
}

std::pair<CVec, SolveReport> picard_solve(const VolumeOperator& op,
                                          const SolverConfig& config,
                                          const CVec& f, const CVec& V,
                                          const RVec& alpha) {
  if (config.max_iter < 1 || !(config.tol > 0.0) ||
      !(config.contraction_guard > 0.0) || !(config.contraction_guard < 1.0)) {
    throw UsageError("picard_solve: invalid solver configuration");
  }
  SolveReport rep;
  CVec u0 = op.apply(f);
  CVec u = u0;
  rep.born_term_norm = u0.abs().maxCoeff();
  if (config.record_iterates) rep.sup_iterates.push_back(rep.born_term_norm);

  bool converged = false;
  while (rep.iterations_used < config.max_iter) {
    CVec interaction = V * u + alpha.cast<Complex>() * u * u;
    CVec un = u0 - op.apply(interaction);
    Real d = (un - u).abs().maxCoeff();
    rep.sup_diffs.push_back(d);
    u = std::move(un);
    ++rep.iterations_used;
    if (config.record_iterates) rep.sup_iterates.push_back(u.abs().maxCoeff());
    if (d <= config.tol) {
      converged = true;
      break;
    }
    const std::size_t k = rep.sup_diffs.size();
    if (k >= 3 && d > config.contraction_guard * rep.sup_diffs[k - 2]) {
      throw NonContraction(d / rep.sup_diffs[k - 2], rep.iterations_used);
    }
  }
  if (!converged) throw MaxIterExceeded(config.max_iter);

  for (std::size_t j = 0; j + 1 < rep.sup_diffs.size(); ++j) {
    rep.contraction_ratios.push_back(rep.sup_diffs[j + 1] / rep.sup_diffs[j]);
  }
  CVec interaction = V * u + alpha.cast<Complex>() * u * u;
  rep.final_residual = (u - u0 + op.apply(interaction)).abs().maxCoeff();
  rep.remainder_norm = (u - u0).abs().maxCoeff();
  return {std::move(u), std::move(rep)};
}

std::pair<CVec, SolveReport> picard_solve(const Grid2D& grid,
                                          const SolverConfig& config,
                                          const CVec& f, const CVec& V,
                                          const RVec& alpha) {
  VolumeOperator op(grid, config.kappa);
  return picard_solve(op, config, f, V, alpha);
}

std::vector<std::pair<Real, Real>> resolvent_scaling_study(
    const Grid2D& grid, const CVec& f, const CVec& V, const RVec& alpha,
    const std::vector<Real>& kappas, const SolverConfig& base_config) {
  std::vector<std::pair<Real, Real>> out;
  out.reserve(kappas.size());
  for (Real kappa : kappas) {
    SolverConfig cfg = base_config;
    cfg.kappa = kappa;
    auto [u, rep] = picard_solve(grid, cfg, f, V, alpha);
    out.emplace_back(kappa, rep.remainder_norm);
  }
  return out;
}

Real fit_loglog_slope(const std::vector<std::pair<Real, Real>>& samples) {
  if (samples.size() < 2) {
    throw UsageError("fit_loglog_slope: need at least two samples");
  }
  Real sx = 0, sy = 0, sxx = 0, sxy = 0;
  const Real n = static_cast<Real>(samples.size());
  for (const auto& [k, v] : samples) {
    Real lx = std::log(k), ly = std::log(v);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Real uniform_bound_check(const std::vector<SolveReport>& reports) {
  Real bound = 0.0;
  for (const auto& rep : reports) {
    for (Real s : rep.sup_iterates) {
      if (s > bound) bound = s;
    }
  }
  return bound;
}

}  // namespace nlss
