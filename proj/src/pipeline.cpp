#include "nlss/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <tuple>
#include <utility>

#include "json.hpp"
#include "nlss/io.hpp"

namespace nlss {

namespace {

template <typename Fn>
auto stage(int index, const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(index, name, e);
  }
}

BVec relative_floor_mask(const RVec& alpha, Real floor) {
  BVec mask = BVec::Constant(alpha.size(), false);
  const Real amax = alpha.abs().maxCoeff();
  if (!(amax > 0.0)) return mask;
  const Real cut = floor * amax;
  for (int i = 0; i < alpha.size(); ++i) {
    if (std::abs(alpha(i)) >= cut) mask(i) = true;
  }
  return mask;
}

}  // namespace

std::string metrics_to_json(const PipelineMetrics& metrics) {
  nlohmann::json j;
  j["data_misfit"] = metrics.data_misfit;
  if (metrics.q_error.has_value()) {
    j["q_error"] = *metrics.q_error;
  } else {
    j["q_error"] = nullptr;
  }
  if (metrics.f_error_rel.has_value()) {
    j["f_error_rel"] = *metrics.f_error_rel;
  } else {
    j["f_error_rel"] = nullptr;
  }
  j["assumption_gap"] = metrics.assumption_gap;
  j["assumption_satisfied"] = metrics.assumption_satisfied;
  j["potential_sup"] = metrics.potential_sup;
  j["imag_residual_sup"] = metrics.imag_residual_sup;
  return j.dump(2) + "\n";
}

PipelineResult run_pipeline(const ExperimentManifest& manifest,
                            const std::string& out_dir) {
  const LoadedScene scene = load_scene(manifest);
  const Grid2D& grid = scene.grid;

  const bool write = !out_dir.empty();
  std::filesystem::path dir(out_dir);
  if (write) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir);
  }
  const auto emit = [&](const char* name, const std::string& text) {
    if (write) write_text_file((dir / name).string(), text);
  };

  PipelineResult result;

  result.measurements = stage(0, "synthesize", [&] {
    return synthesize_measurements(grid, scene.config, scene.f.cast<Complex>(),
                                   scene.alpha, scene.layout,
                                   manifest.measurement.epsilons,
                                   manifest.measurement.noise_level,
                                   manifest.seed);
  });
  emit("measurements.json", measurements_to_json(result.measurements));

  result.linearized =
      stage(1, "linearize", [&] { return linearize(result.measurements); });
  emit("linearized.json", linearized_to_json(result.linearized));

  ReconstructionReport recon_report;
  std::tie(result.q_hat, recon_report) = stage(2, "invert", [&] {
    ReconstructionConfig rc;
    rc.regularization_lambda = manifest.reconstruction.regularization_lambda;
    rc.max_gn_iterations = manifest.reconstruction.max_gn_iterations;
    rc.step_tol = manifest.reconstruction.step_tol;
    rc.support_mask =
        relative_floor_mask(scene.alpha, manifest.reconstruction.support_floor);
    return reconstruct_potential(result.linearized, rc, grid);
  });
  emit("q_hat.json", field_to_json(grid, result.q_hat));
  emit("q_hat.csv", field_to_csv(grid, result.q_hat));

  result.recovery = stage(3, "recover", [&] {
    return recover_source(result.q_hat, scene.alpha, scene.config.kappa, grid,
                          manifest.reconstruction.alpha_floor, &scene.f);
  });
  result.recovery.data_misfit = recon_report.data_misfit;
  emit("recovery.json", recovery_to_json(result.recovery));
  emit("u_hat.csv", field_to_csv(grid, result.recovery.u_hat));
  emit("f_hat.csv", field_to_csv(grid, result.recovery.f_hat.cast<Complex>()));

  // Ground-truth side metrics: the potential the linearization targets is
  // 2 alpha u with u the unperturbed solution.
  PipelineMetrics& metrics = result.metrics;
  metrics.data_misfit = recon_report.data_misfit;
  metrics.f_error_rel = result.recovery.f_error_rel;
  metrics.imag_residual_sup = result.recovery.imag_residual_sup;

  auto [u_base, solve_report] =
      picard_solve(grid, scene.config, scene.f.cast<Complex>(), scene.V,
                   scene.alpha);
  (void)solve_report;
  const CVec q_true = 2.0 * scene.alpha.cast<Complex>() * u_base;
  metrics.potential_sup = q_true.abs().maxCoeff();
  const Real qn = q_true.matrix().norm();
  if (qn > 0.0) {
    metrics.q_error = (result.q_hat - q_true).matrix().norm() / qn;
  }

  const AssumptionAResult gap = check_assumption_A(grid, q_true, scene.config.kappa);
  metrics.assumption_gap = gap.gap;
  metrics.assumption_satisfied = gap.satisfied;

  emit("metrics.json", metrics_to_json(metrics));
  return result;
}

}  // namespace nlss
