#pragma once

// Closed-form scene primitives and the experiment manifest. A manifest is a
// JSON document that pins everything a run depends on: grid, wavenumber,
// source/coefficient shapes, measurement schedule, reconstruction knobs, and
// the noise seed. Identical manifests yield bit-identical outputs.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "nlss/forward.hpp"

namespace nlss {

struct ZeroShape {};

// amplitude * exp(-r^2 / (2 width^2)), truncated to zero where r > cutoff.
struct GaussianShape {
  Real amplitude = 1.0;
  Real width = 0.2;
  Real cutoff = 0.5;
  Real center_x = 0.0;
  Real center_y = 0.0;
};

// Flat top of height amplitude for r <= inner_radius, quintic taper to zero
// at outer_radius (C^2 smooth edge).
struct PlateauShape {
  Real amplitude = 1.0;
  Real inner_radius = 0.5;
  Real outer_radius = 0.65;
  Real center_x = 0.0;
  Real center_y = 0.0;
};

// Hard indicator: amplitude where r < radius, zero elsewhere.
struct DiskShape {
  Real amplitude = 1.0;
  Real radius = 0.5;
  Real center_x = 0.0;
  Real center_y = 0.0;
};

// amplitude * (1 - (r/radius)^2)^exponent inside r < radius, zero outside;
// C^{exponent-1} smooth and compactly supported.
struct PowerBump {
  Real amplitude = 1.0;
  Real radius = 0.4;
  int exponent = 4;
  Real center_x = 0.0;
  Real center_y = 0.0;
};

struct BumpsShape {
  std::vector<PowerBump> bumps;  // evaluated as a plain sum
};

// Source-only shape: the window bump phi is turned into the right-hand side
// nonradiating_rhs(phi, alpha), whose unperturbed boundary data vanishes up
// to discretization error. Needs kappa and alpha, so it is resolved in
// load_scene rather than evaluate_shape.
struct NonradiatingShape {
  PowerBump window;
};

using ShapeSpec = std::variant<ZeroShape, GaussianShape, PlateauShape,
                               DiskShape, BumpsShape, NonradiatingShape>;

// Evaluates a closed-form shape at the grid cell centers. Rejects
// NonradiatingShape (context-dependent, see load_scene).
RVec evaluate_shape(const ShapeSpec& spec, const Grid2D& grid);

struct SceneSpec {
  Real R = 1.0;
  int n = 64;
  Real kappa = 8.0;
  ShapeSpec f = GaussianShape{};
  ShapeSpec alpha = PlateauShape{};
  ShapeSpec V = ZeroShape{};
};

struct MeasurementSpec {
  int M = 16;                                      // boundary points
  std::vector<Real> epsilons{0.0, 5e-3, 1e-2, 2e-2};  // 0 first, ascending
  Real noise_level = 0.0;  // relative complex Gaussian noise on the traces
};

struct ReconstructionSpec {
  Real regularization_lambda = 1e-8;
  int max_gn_iterations = 6;
  Real step_tol = 1e-8;
  Real support_floor = 0.5;  // |alpha| fraction defining the support prior
  Real alpha_floor = 1e-3;   // |alpha| fraction guarding the final division
};

struct ExperimentManifest {
  SceneSpec scene;
  MeasurementSpec measurement;
  ReconstructionSpec reconstruction;
  Real tol = 1e-10;  // fixed-point solver knobs
  int max_iter = 50;
  Real contraction_guard = 0.99;
  std::uint64_t seed = 0;
  std::string outputs = "out";

  SolverConfig solver_config() const {
    SolverConfig c;
    c.kappa = scene.kappa;
    c.tol = tol;
    c.max_iter = max_iter;
    c.contraction_guard = contraction_guard;
    return c;
  }
};

// Parse/serialize the manifest JSON. Parsing is strict: unknown keys, type
// mismatches, and out-of-range values are rejected before anything runs.
// parse(serialize(m)) reproduces m exactly.
ExperimentManifest parse_manifest(const std::string& json_text);
std::string manifest_to_json(const ExperimentManifest& manifest);
ExperimentManifest read_manifest_file(const std::string& path);

// A manifest turned into concrete fields. f resolves NonradiatingShape via
// nonradiating_rhs(phi, alpha); alpha and V must be ordinary shapes.
struct LoadedScene {
  Grid2D grid;
  BoundaryLayout layout;
  RVec f;
  RVec alpha;
  CVec V;
  SolverConfig config;
};

LoadedScene load_scene(const ExperimentManifest& manifest);

}  // namespace nlss
