#include "nlss/verify.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "json.hpp"
#include "nlss/inverse.hpp"
#include "nlss/pipeline.hpp"
#include "nlss/rng.hpp"

namespace nlss {
namespace {

VerifyEntry le(const std::string& name, Real measured, Real threshold,
               const std::string& note = "") {
  VerifyEntry e;
  e.name = name;
  e.measured = measured;
  e.threshold = threshold;
  e.cmp = "<=";
  e.pass = measured <= threshold;
  e.note = note;
  return e;
}

VerifyEntry ge(const std::string& name, Real measured, Real threshold,
               const std::string& note = "") {
  VerifyEntry e;
  e.name = name;
  e.measured = measured;
  e.threshold = threshold;
  e.cmp = ">=";
  e.pass = measured >= threshold;
  e.note = note;
  return e;
}

// The reference interior configuration all suites probe: unit disk, n = 64,
// kappa = 8, truncated Gaussian source inside a smoothed plateau coefficient.
ExperimentManifest desk_manifest() { return ExperimentManifest{}; }

void suite_specfun(std::vector<VerifyEntry>& out) {
  {
    const int P = 10000;
    Real sup = 0.0;
    for (int i = 0; i < P; ++i) {
      const Real z = std::pow(10.0, 4.0 * i / (P - 1));
      sup = std::max(sup, std::abs(hankel1_0(z)) * std::sqrt(z));
    }
    out.push_back(le("specfun.kernel_bound_sup", sup, 0.80,
                     "sup of |H0(z)| sqrt(z) over z in [1, 1e4]"));
  }
  {
    const Real v = std::abs(hankel1_0(1e3)) * std::sqrt(1e3);
    out.push_back(le("specfun.kernel_asymptote_err",
                     std::abs(v - std::sqrt(2.0 / kPi)), 1e-3,
                     "|H0| envelope against sqrt(2/pi) at z = 1e3"));
  }
  {
    const Complex h0_1 = hankel1_0(1.0);
    const Complex h0_10 = hankel1_0(10.0);
    const Complex ref_1(0.7651976865579666, 0.08825696421567696);
    const Complex ref_10(-0.2459357644513483, 0.05567116728359939);
    const Real err = std::max(std::abs(h0_1 - ref_1), std::abs(h0_10 - ref_10));
    out.push_back(le("specfun.hankel_oracle_err", err, 1e-11,
                     "H0 against frozen J0 + i Y0 values at z = 1 and 10"));
  }
  {
    const Complex g = greens(1.0, 1.0);
    const Complex ref(-0.02206424105, 0.19129942164);
    out.push_back(le("specfun.greens_oracle_err", std::abs(g - ref), 1e-9,
                     "outgoing kernel at kappa = r = 1"));
  }
  {
    const Real lo = 5.0 * (1.0 - 1e-9);
    const Real hi = 5.0 * (1.0 + 1e-9);
    const Real jump = std::abs(hankel1_0(hi) - hankel1_0(lo));
    out.push_back(le("specfun.branch_continuity", jump, 1e-7,
                     "series/integral handoff mismatch at z = 5"));
  }
  {
    const Real kappa = 8.0;
    const Real h = 1.0 / 32.0;
    const Real a = h / std::sqrt(kPi);
    const Complex closed =
        Complex(0.0, kPi) * a * hankel1_1(kappa * a) / (2.0 * kappa) -
        1.0 / (kappa * kappa);
    const Complex quad = self_cell_weight(kappa, h);
    out.push_back(le("specfun.self_weight_err",
                     std::abs(quad - closed) / std::abs(closed), 1e-10,
                     "singular-cell quadrature against the closed form"));
  }
}

void suite_forward(std::vector<VerifyEntry>& out) {
  const ExperimentManifest m = desk_manifest();
  const LoadedScene sc = load_scene(m);
  const auto [u, report] =
      picard_solve(sc.grid, sc.config, sc.f.cast<Complex>(), sc.V, sc.alpha);
  (void)u;
  Real max_ratio = 0.0;
  for (Real r : report.contraction_ratios) max_ratio = std::max(max_ratio, r);
  out.push_back(le("forward.desk_max_contraction_ratio", max_ratio, 0.9,
                   "every update shrinks by at least this factor"));
  Real envelope = 0.0;
  for (std::size_t k = 0; k < report.sup_diffs.size(); ++k) {
    const Real bound = report.sup_diffs[0] * std::pow(0.9, Real(k));
    envelope = std::max(envelope, report.sup_diffs[k] / bound);
  }
  out.push_back(le("forward.desk_geometric_envelope", envelope, 1.0,
                   "updates stay under the geometric decay envelope"));
  out.push_back(le("forward.desk_residual", report.final_residual, 1e-8,
                   "fixed-point residual of the converged iterate"));

  {
    const auto study = resolvent_scaling_study(
        sc.grid, sc.f.cast<Complex>(), sc.V, sc.alpha,
        {8.0, 16.0, 32.0, 64.0}, sc.config);
    const Real slope = fit_loglog_slope(study);
    out.push_back(le("forward.remainder_decay_slope", slope, -0.3,
                     "log-log slope of the nonlinear remainder in kappa"));
  }

  {
    // Probe past the validity edge: at kappa = 1 the integral operator is no
    // longer small, and a 40x source amplitude drives the fixed point out of
    // the contractive regime. This entry is declared an expected failure:
    // the suite passes only when the probe diverges.
    ExperimentManifest probe = desk_manifest();
    probe.scene.kappa = 1.0;
    GaussianShape g;
    g.amplitude = 40.0;
    probe.scene.f = g;
    const LoadedScene psc = load_scene(probe);
    VerifyEntry e;
    try {
      const auto [pu, prep] = picard_solve(psc.grid, psc.config,
                                           psc.f.cast<Complex>(), psc.V,
                                           psc.alpha);
      (void)pu;
      Real ratio = 0.0;
      for (Real r : prep.contraction_ratios) ratio = std::max(ratio, r);
      e = le("forward.low_kappa_probe", ratio, 1.0,
             "contraction at kappa = 1 with 40x amplitude");
    } catch (const NonContraction& ex) {
      e = le("forward.low_kappa_probe", ex.ratio, 1.0,
             "contraction at kappa = 1 with 40x amplitude");
    } catch (const MaxIterExceeded&) {
      e = le("forward.low_kappa_probe", 1.0, 1.0,
             "probe hit the iteration cap without a divergence verdict");
    }
    e.expected_failure = true;
    out.push_back(e);
  }
}

// Weighted least-squares intercept of quotient traces against epsilon, the
// same model the measurement-set extrapolation uses, applied to one source.
CVec intercept_of(const std::vector<Real>& eps, const std::vector<CVec>& quot) {
  const int E = static_cast<int>(eps.size());
  Real s1 = 0.0, s2 = 0.0;
  for (Real e : eps) {
    s1 += e;
    s2 += e * e;
  }
  const Real det = E * s2 - s1 * s1;
  CVec v = CVec::Zero(quot.front().size());
  for (int e = 0; e < E; ++e) {
    const Real w = (s2 - s1 * eps[static_cast<std::size_t>(e)]) / det;
    v += w * quot[static_cast<std::size_t>(e)];
  }
  return v;
}

void suite_linearize(std::vector<VerifyEntry>& out) {
  const ExperimentManifest m = desk_manifest();
  const LoadedScene sc = load_scene(m);
  const VolumeOperator op(sc.grid, sc.config.kappa);
  const CVec f = sc.f.cast<Complex>();

  const auto [u0, rep0] = picard_solve(op, sc.config, f, sc.V, sc.alpha);
  (void)rep0;

  // Dense direct solve of the linearized equation for source 0, and its
  // boundary trace through the same density.
  const int src = 0;
  const Real x0 = sc.layout.px(src);
  const Real y0 = sc.layout.py(src);
  const auto [v_direct, resid] =
      verify_linearized(sc.grid, sc.config, u0, sc.alpha, sc.layout, src);
  out.push_back(le("linearize.direct_solve_residual", resid, 1e-3,
                   "stencil residual of the dense linearized field"));
  const CVec q = 2.0 * sc.alpha.cast<Complex>() * u0;
  const CVec inc = incident_field(sc.grid, sc.config.kappa, x0, y0);
  const CVec density = q * (v_direct + inc);
  const CVec v_direct_trace =
      -trace_on_boundary(sc.grid, sc.config.kappa, density, sc.layout);

  const auto [base_u, base_trace] =
      solve_perturbed(op, sc.config, f, sc.alpha, sc.layout, src, 0.0);
  (void)base_u;
  const CVec inc_trace =
      incident_trace(sc.layout, sc.config.kappa, x0, y0);

  std::vector<Real> eps = {5e-3, 1e-2, 2e-2};
  std::vector<CVec> quotients;
  for (Real e : eps) {
    const auto [ue, tr] =
        solve_perturbed(op, sc.config, f, sc.alpha, sc.layout, src, e);
    (void)ue;
    quotients.push_back((tr - base_trace) / e - inc_trace);
  }

  const Real err_half =
      (quotients[0] - v_direct_trace).matrix().norm();  // eps = 5e-3
  const Real err_full =
      (quotients[1] - v_direct_trace).matrix().norm();  // eps = 1e-2
  const Real ratio = err_full / err_half;
  out.push_back(le("linearize.quotient_rate", std::abs(ratio - 2.0), 0.4,
                   "first-order error ratio between eps = 1e-2 and 5e-3"));

  const CVec v_fit = intercept_of(eps, quotients);
  const Real rel = (v_fit - v_direct_trace).matrix().norm() /
                   v_direct_trace.matrix().norm();
  out.push_back(le("linearize.extrapolation_err", rel, 0.02,
                   "extrapolated trace against the dense direct solve"));

  {
    // Window bump whose exact radiated field vanishes: the boundary trace of
    // its source must sit at discretization-error level while the source
    // itself is O(1) in L2.
    BumpsShape window;
    PowerBump b;
    b.amplitude = 0.5;
    b.radius = 0.45;
    b.exponent = 4;
    window.bumps.push_back(b);
    const RVec phi = evaluate_shape(ShapeSpec{window}, sc.grid);
    const auto [f0, boundary_sup] =
        nonradiating_source(sc.grid, sc.config, phi, sc.alpha);
    out.push_back(le("linearize.nonradiating_boundary_sup", boundary_sup,
                     1e-3, "radiated trace of the silent source"));
    out.push_back(ge("linearize.nonradiating_source_l2",
                     f0.matrix().norm() * sc.grid.h, 0.1,
                     "L2 mass of the silent source"));
  }
}

void suite_inverse(std::vector<VerifyEntry>& out) {
  // Small probe scene keeps the dense algebra quick without changing any
  // structural property being checked.
  ExperimentManifest pm = desk_manifest();
  pm.scene.n = 32;
  const LoadedScene psc = load_scene(pm);
  const auto [u_small, rep_small] = picard_solve(
      psc.grid, psc.config, psc.f.cast<Complex>(), psc.V, psc.alpha);
  (void)rep_small;
  const CVec q_small = 2.0 * psc.alpha.cast<Complex>() * u_small;

  BVec mask = BVec::Constant(psc.grid.cells(), false);
  const Real amax = psc.alpha.abs().maxCoeff();
  for (int i = 0; i < psc.grid.cells(); ++i) {
    mask(i) = std::abs(psc.alpha(i)) >= 0.5 * amax;
  }
  LinearScattering sys(psc.grid, psc.config.kappa, psc.layout, mask);
  Eigen::VectorXcd q_s(sys.support_size());
  for (int s = 0; s < sys.support_size(); ++s) q_s(s) = q_small(sys.support()[s]);

  {
    const CMat J = sys.jacobian(q_s);
    GaussianRng rng(777);
    const Real delta = 1e-6;
    Real worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXcd dir(q_s.size());
      for (int i = 0; i < dir.size(); ++i) dir(i) = rng.cnormal();
      dir /= dir.norm();
      const Eigen::VectorXcd jvp = J * dir;
      const Eigen::VectorXcd fd =
          (sys.forward(q_s + delta * dir) - sys.forward(q_s - delta * dir)) /
          (2.0 * delta);
      worst = std::max(worst, (jvp - fd).norm() / jvp.norm());
    }
    out.push_back(le("inverse.jacobian_fd_err", worst, 1e-4,
                     "Jacobian-vector products against central differences"));
  }

  {
    // Round trip on the exact linear model: data from the true potential
    // must reproduce it through the regularized fit.
    const Eigen::VectorXcd data = sys.forward(q_s);
    LinearizedData ld;
    ld.kappa = psc.config.kappa;
    ld.R = psc.grid.R;
    ld.layout = psc.layout;
    const int M = psc.layout.M;
    ld.v_traces.resize(static_cast<std::size_t>(M));
    for (int mm = 0; mm < M; ++mm) {
      ld.v_traces[static_cast<std::size_t>(mm)] =
          CVec(data.segment(mm * M, M).array());
    }
    ReconstructionConfig rc;
    rc.support_mask = mask;
    const auto [q_hat, rep] = reconstruct_potential(ld, rc, psc.grid);
    (void)rep;
    const Real rel = (q_hat - q_small * mask.cast<Real>().cast<Complex>())
                         .matrix()
                         .norm() /
                     (q_small * mask.cast<Real>().cast<Complex>())
                         .matrix()
                         .norm();
    out.push_back(le("inverse.roundtrip_err", rel, 0.05,
                     "potential recovered from its own exact data"));
  }

  {
    const Grid2D disk_grid = build_grid(1.0, 64);
    const CVec zero_q = CVec::Zero(disk_grid.cells());
    const AssumptionAResult eig = check_assumption_A(disk_grid, zero_q, 2.4);
    const Real j01sq = 5.783185962946785;
    const Real rel = std::abs(eig.nearest_eigenvalue.real() - j01sq) / j01sq;
    out.push_back(le("inverse.disk_eigenvalue_err", rel, 0.02,
                     "first Dirichlet eigenvalue of the unit disk"));
  }

  {
    const ExperimentManifest dm = desk_manifest();
    const LoadedScene sc = load_scene(dm);
    const auto [u, rep] = picard_solve(sc.grid, sc.config,
                                       sc.f.cast<Complex>(), sc.V, sc.alpha);
    (void)rep;
    const CVec q_true = 2.0 * sc.alpha.cast<Complex>() * u;
    const AssumptionAResult eig =
        check_assumption_A(sc.grid, q_true, sc.config.kappa);
    const Real needed = 1e-3 * sc.config.kappa * sc.config.kappa;
    out.push_back(ge("inverse.assumption_gap_desk",
                     eig.converged ? eig.gap : 0.0, needed,
                     "spectral gap around kappa^2 for the desk potential"));
  }
}

}  // namespace

VerifyReport run_verify_suite(const std::string& suite) {
  VerifyReport report;
  report.suite = suite;
  if (suite == "specfun") {
    suite_specfun(report.entries);
  } else if (suite == "forward") {
    suite_forward(report.entries);
  } else if (suite == "linearize") {
    suite_linearize(report.entries);
  } else if (suite == "inverse") {
    suite_inverse(report.entries);
  } else if (suite == "all") {
    suite_specfun(report.entries);
    suite_forward(report.entries);
    suite_linearize(report.entries);
    suite_inverse(report.entries);
  } else {
    throw UsageError("unknown verify suite '" + suite +
                     "' (choose specfun, forward, linearize, inverse, all)");
  }
  return report;
}

std::string verify_report_to_json(const VerifyReport& report) {
  nlohmann::json j;
  j["suite"] = report.suite;
  j["ok"] = report.ok();
  nlohmann::json arr = nlohmann::json::array();
  for (const VerifyEntry& e : report.entries) {
    nlohmann::json item;
    item["name"] = e.name;
    item["measured"] = e.measured;
    item["threshold"] = e.threshold;
    item["cmp"] = e.cmp;
    item["pass"] = e.pass;
    item["expected_failure"] = e.expected_failure;
    item["note"] = e.note;
    arr.push_back(std::move(item));
  }
  j["entries"] = std::move(arr);
  return j.dump(2) + "\n";
}

}  // namespace nlss
