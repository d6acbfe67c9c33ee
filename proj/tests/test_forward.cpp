#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "nlss/forward.hpp"
#include "nlss/scene.hpp"

using nlss::BVec;
using nlss::Complex;
using nlss::CVec;
using nlss::Grid2D;
using nlss::Real;
using nlss::RVec;

namespace {

nlss::LoadedScene desk_scene() {
  return nlss::load_scene(nlss::ExperimentManifest{});
}

}  // namespace

TEST_CASE("zero source converges immediately to the zero field") {
  nlss::LoadedScene sc = desk_scene();
  CVec f = CVec::Zero(sc.grid.cells());
  auto [u, rep] = nlss::picard_solve(sc.grid, sc.config, f, sc.V, sc.alpha);
  CHECK(rep.iterations_used == 1);
  CHECK((u == Complex(0.0, 0.0)).all());
  CHECK(rep.born_term_norm == 0.0);
  CHECK(rep.final_residual == 0.0);
}

TEST_CASE("linear problems converge in one update to the born term") {
  nlss::LoadedScene sc = desk_scene();
  CVec f = sc.f.cast<Complex>();
  CVec zeroV = CVec::Zero(sc.grid.cells());
  RVec zeroA = RVec::Zero(sc.grid.cells());
  auto [u, rep] = nlss::picard_solve(sc.grid, sc.config, f, zeroV, zeroA);
  CVec u0 = nlss::born_term(sc.grid, sc.config.kappa, f);
  CHECK(rep.iterations_used == 1);
  CHECK((u == u0).all());
  CHECK(rep.remainder_norm == 0.0);
}

TEST_CASE("born term of a point density reproduces the kernel table") {
  Grid2D g = nlss::build_grid(1.0, 16);
  const Real kappa = 5.0;
  nlss::VolumeOperator op(g, kappa);
  const int j = g.index(7, 9);
  const Complex c(0.8, -0.3);
  CVec density = CVec::Zero(g.cells());
  density(j) = c;
  CVec u = op.apply(density);
  const Real w = g.h * g.h;
  for (int i = 0; i < g.cells(); ++i) {
    Complex want =
        i == j ? op.self_weight() * c
               : nlss::greens(kappa, std::hypot(g.x(i) - g.x(j),
                                                g.y(i) - g.y(j))) *
                     w * c;
    CHECK(std::abs(u(i) - want) <= 1e-15);
  }
}

TEST_CASE("conjugated operator applies the conjugate kernel") {
  Grid2D g = nlss::build_grid(1.0, 12);
  nlss::VolumeOperator plain(g, 3.0), conj(g, 3.0, /*conjugated=*/true);
  CVec density = CVec::Zero(g.cells());
  density(g.index(5, 5)) = 1.0;
  density(g.index(7, 3)) = 2.5;
  CVec a = plain.apply(density);
  CVec b = conj.apply(density);
  CHECK((b == a.conjugate()).all());
}

TEST_CASE("reference scene contracts geometrically and meets tolerance") {
  nlss::LoadedScene sc = desk_scene();
  auto [u, rep] =
      nlss::picard_solve(sc.grid, sc.config, sc.f.cast<Complex>(), sc.V,
                         sc.alpha);
  CHECK(rep.iterations_used >= 2);
  CHECK(rep.iterations_used <= sc.config.max_iter);
  REQUIRE(!rep.contraction_ratios.empty());
  for (Real r : rep.contraction_ratios) CHECK(r < 0.9);
  for (std::size_t k = 1; k < rep.sup_diffs.size(); ++k) {
    CHECK(rep.sup_diffs[k] < rep.sup_diffs[k - 1]);
  }
  CHECK(rep.final_residual <= 1e-8);
  CHECK(rep.born_term_norm > 0.0);
  CHECK(rep.remainder_norm < rep.born_term_norm);
  CHECK(nlss::uniform_bound_check({rep}) > 0.0);

  // The recorded iterate norms bound the recorded solution.
  Real sup_u = u.abs().maxCoeff();
  CHECK(nlss::uniform_bound_check({rep}) >= sup_u - 1e-12);
}

TEST_CASE("contraction guard raises on a strongly nonlinear scene") {
  nlss::ExperimentManifest m;
  m.scene.kappa = 1.0;
  m.scene.f = nlss::GaussianShape{40.0, 0.2, 0.5, 0.0, 0.0};
  nlss::LoadedScene sc = nlss::load_scene(m);
  bool threw = false;
  try {
    nlss::picard_solve(sc.grid, sc.config, sc.f.cast<Complex>(), sc.V,
                       sc.alpha);
  } catch (const nlss::NonContraction& e) {
    threw = true;
    CHECK(e.ratio > sc.config.contraction_guard);
    CHECK(e.exit_code() == 3);
  }
  CHECK(threw);
}

TEST_CASE("iteration cap raises when the tolerance is unreachable") {
  nlss::LoadedScene sc = desk_scene();
  sc.config.max_iter = 2;
  CHECK_THROWS_AS(nlss::picard_solve(sc.grid, sc.config,
                                     sc.f.cast<Complex>(), sc.V, sc.alpha),
                  nlss::MaxIterExceeded);
}

TEST_CASE("invalid solver configuration is rejected") {
  nlss::LoadedScene sc = desk_scene();
  CVec f = sc.f.cast<Complex>();
  auto run = [&](auto mutate) {
    nlss::SolverConfig cfg = sc.config;
    mutate(cfg);
    CHECK_THROWS_AS(nlss::picard_solve(sc.grid, cfg, f, sc.V, sc.alpha),
                    nlss::UsageError);
  };
  run([](nlss::SolverConfig& c) { c.max_iter = 0; });
  run([](nlss::SolverConfig& c) { c.tol = 0.0; });
  run([](nlss::SolverConfig& c) { c.tol = -1.0; });
  run([](nlss::SolverConfig& c) { c.contraction_guard = 0.0; });
  run([](nlss::SolverConfig& c) { c.contraction_guard = 1.0; });
}

TEST_CASE("nonlinear remainder shrinks as the wavenumber grows") {
  nlss::LoadedScene sc = desk_scene();
  std::vector<Real> kappas{8.0, 16.0, 32.0, 64.0};
  auto study = nlss::resolvent_scaling_study(sc.grid, sc.f.cast<Complex>(),
                                             sc.V, sc.alpha, kappas,
                                             sc.config);
  REQUIRE(study.size() == 4);
  for (std::size_t i = 0; i < study.size(); ++i) {
    CHECK(study[i].first == kappas[i]);
    CHECK(study[i].second > 0.0);
    if (i > 0) CHECK(study[i].second < study[i - 1].second);
  }
  CHECK(nlss::fit_loglog_slope(study) <= -1.0);
}

TEST_CASE("log log slope fit recovers exact power laws") {
  std::vector<std::pair<Real, Real>> samples;
  for (Real k : {2.0, 4.0, 8.0, 16.0}) {
    samples.emplace_back(k, 3.7 * std::pow(k, -2.5));
  }
  CHECK(nlss::fit_loglog_slope(samples) == doctest::Approx(-2.5).epsilon(1e-12));
  CHECK_THROWS_AS(nlss::fit_loglog_slope({{1.0, 1.0}}), nlss::UsageError);
}

TEST_CASE("uniform bound check takes the max across reports") {
  nlss::SolveReport a, b;
  a.sup_iterates = {1.0, 2.0};
  b.sup_iterates = {0.5, 3.0, 0.1};
  CHECK(nlss::uniform_bound_check({a, b}) == 3.0);
  CHECK(nlss::uniform_bound_check({}) == 0.0);
}

TEST_CASE("volume potential satisfies the pde under grid refinement") {
  // Residual of the stencil equation against a smooth compact density;
  // second order is expected from the centered stencil and the equal-area
  // self-cell correction. Measured sups: 5.6e-2 (n=32), 1.46e-2 (n=64).
  const Real kappa = 8.0;
  nlss::PowerBump pb{1.0, 0.35, 4, 0.05, -0.1};
  auto residual_sup = [&](int n) {
    Grid2D g = nlss::build_grid(1.0, n);
    RVec rho = nlss::evaluate_shape(nlss::ShapeSpec{nlss::BumpsShape{{pb}}}, g);
    CVec u = nlss::volume_potential(g, kappa, rho.cast<Complex>());
    CVec res = nlss::discrete_helmholtz(g, kappa, u);
    BVec mask = nlss::stencil_valid_mask(g);
    Real worst = 0.0;
    for (int i = 0; i < g.cells(); ++i) {
      if (!mask(i)) continue;
      worst = std::max(worst, std::abs(res(i) - Complex(rho(i), 0.0)));
    }
    return worst;
  };
  Real coarse = residual_sup(32);
  Real fine = residual_sup(64);
  CHECK(fine <= 0.03);
  CHECK(coarse / fine >= 3.0);
}

TEST_CASE("radially symmetric densities produce constant boundary traces") {
  Grid2D g = nlss::build_grid(1.0, 64);
  nlss::BoundaryLayout layout = nlss::boundary_layout(1.0, 16);
  nlss::GaussianShape gs{1.0, 0.12, 0.80, 0.0, 0.0};
  RVec rho = nlss::evaluate_shape(nlss::ShapeSpec{gs}, g);
  CVec trace =
      nlss::trace_on_boundary(g, 8.0, rho.cast<Complex>(), layout);

  Complex mean = trace.sum() / static_cast<Real>(layout.M);
  Real variation = (trace - mean).abs().maxCoeff() / std::abs(mean);
  CHECK(variation <= 1e-6);

  // The trace is the off-support quadrature evaluated at the layout points.
  nlss::VolumeOperator op(g, 8.0);
  CVec direct = op.apply_at(rho.cast<Complex>(), layout.x, layout.y);
  CHECK((trace == direct).all());
}

TEST_CASE("trace rejects density support near the measurement circle") {
  Grid2D g = nlss::build_grid(1.0, 32);
  nlss::BoundaryLayout layout = nlss::boundary_layout(1.0, 8);
  CVec density = CVec::Zero(g.cells());
  density(g.index(g.n / 2, g.n - 2)) = 1.0;  // within 2h of the circle
  CHECK_THROWS_AS(nlss::trace_on_boundary(g, 8.0, density, layout),
                  nlss::SupportViolation);
}

TEST_CASE("incident fields and traces follow the kernel") {
  Grid2D g = nlss::build_grid(1.0, 16);
  nlss::BoundaryLayout layout = nlss::boundary_layout(1.0, 8);
  const Real kappa = 4.0;
  const int src = 3;
  const Real x0 = layout.px(src), y0 = layout.py(src);

  CVec field = nlss::incident_field(g, kappa, x0, y0);
  for (int i = 0; i < g.cells(); ++i) {
    CHECK(field(i) ==
          nlss::greens(kappa, std::hypot(g.x(i) - x0, g.y(i) - y0)));
  }

  CVec trace = nlss::incident_trace(layout, kappa, x0, y0);
  for (int m = 0; m < layout.M; ++m) {
    if (m == src) {
      CHECK(trace(m) == Complex(0.0, 0.0));
    } else {
      Real r = std::hypot(layout.px(m) - x0, layout.py(m) - y0);
      CHECK(trace(m) == nlss::greens(kappa, r));
    }
  }
}

TEST_CASE("discrete helmholtz is exact on quadratics") {
  Grid2D g = nlss::build_grid(1.0, 20);
  const Real kappa = 3.0;
  CVec u(g.cells());
  for (int i = 0; i < g.cells(); ++i) {
    u(i) = Complex(g.x(i) * g.x(i) + g.y(i) * g.y(i), 0.0);
  }
  CVec out = nlss::discrete_helmholtz(g, kappa, u);
  BVec mask = nlss::stencil_valid_mask(g);
  for (int i = 0; i < g.cells(); ++i) {
    if (!mask(i)) {
      CHECK(out(i) == Complex(0.0, 0.0));
    } else {
      Complex want(-4.0 - kappa * kappa * std::real(u(i)), 0.0);
      CHECK(std::abs(out(i) - want) <= 1e-10);
    }
  }
}

TEST_CASE("perturbed restarts fall back to the same fixed point") {
  // Necessary condition for uniqueness of the bounded solution: iterating
  // the map from a state pushed off the computed fixed point contracts back
  // onto it instead of drifting to a different one.
  nlss::ExperimentManifest m;
  m.scene.n = 32;
  nlss::LoadedScene sc = nlss::load_scene(m);
  nlss::VolumeOperator op(sc.grid, sc.config.kappa);
  CVec f = sc.f.cast<Complex>();
  auto [u_star, rep] = nlss::picard_solve(op, sc.config, f, sc.V, sc.alpha);
  (void)rep;
  CVec u0 = nlss::born_term(sc.grid, sc.config.kappa, f);

  const Real scale = u_star.abs().maxCoeff();
  CVec w = u_star;
  for (int i = 0; i < w.size(); ++i) {
    // Deterministic off-axis perturbation, about 2% of the solution size.
    w(i) += 0.02 * scale *
            Complex(std::cos(0.7 * i), std::sin(1.3 * i));
  }

  Real prev = (w - u_star).abs().maxCoeff();
  for (int it = 0; it < 4; ++it) {
    w = u0 - op.apply(sc.V * w + sc.alpha.cast<Complex>() * w * w);
    const Real dist = (w - u_star).abs().maxCoeff();
    CHECK(dist < prev);
    prev = dist;
  }
  CHECK(prev <= 1e-10 * scale);
}
