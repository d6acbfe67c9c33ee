#pragma once

// End-to-end experiment runner: synthesize boundary measurements, extrapolate
// the linearized data, invert for the potential, and recover the source.
// Each stage's artifacts are written to the output directory so stages can
// also be rerun independently from the files alone.

#include <optional>
#include <string>

#include "nlss/inverse.hpp"
#include "nlss/scene.hpp"

namespace nlss {

// Wraps a failure with the pipeline stage that raised it. The exit code is
// stage-based (21 synthesize, 22 linearize, 23 invert, 24 recover) so
// scripts can tell where a run died; the cause keeps its own code() and its
// message is folded into what().
class StageError : public Error {
 public:
  StageError(int stage_index, const std::string& stage, const Error& cause)
      : Error(cause.code(),
              "pipeline stage '" + stage + "': " + cause.what()),
        stage_(stage),
        exit_(21 + stage_index) {}

  int exit_code() const override { return exit_; }
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
  int exit_;
};

struct PipelineMetrics {
  Real data_misfit = 0.0;
  std::optional<Real> q_error;      // vs 2 alpha u when ground truth known
  std::optional<Real> f_error_rel;  // vs the manifest source
  Real assumption_gap = 0.0;        // |nearest eigenvalue - kappa^2|
  bool assumption_satisfied = false;
  Real potential_sup = 0.0;  // measured sup |2 alpha u|
  Real imag_residual_sup = 0.0;
};

struct PipelineResult {
  MeasurementSet measurements;
  LinearizedData linearized;
  CVec q_hat;
  RecoveryResult recovery;
  PipelineMetrics metrics;
};

std::string metrics_to_json(const PipelineMetrics& metrics);

// Runs all four stages on the manifest scene. When out_dir is nonempty it is
// created if needed and the stage artifacts are written there:
// measurements.json, linearized.json, q_hat.{json,csv}, recovery.json,
// u_hat.csv, f_hat.csv, metrics.json.
PipelineResult run_pipeline(const ExperimentManifest& manifest,
                            const std::string& out_dir = "");

}  // namespace nlss
