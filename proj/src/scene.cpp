#include "nlss/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"
#include "nlss/errors.hpp"
#include "nlss/measure.hpp"

namespace nlss {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw UsageError("manifest: " + where + ": " + what);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(where, "unknown key '" + item.key() + "'");
  }
}

Real get_real(const json& obj, const char* key, Real fallback,
              const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(where, std::string("'") + key + "' must be a number");
  const Real x = v.get<Real>();
  if (!std::isfinite(x)) fail(where, std::string("'") + key + "' must be finite");
  return x;
}

int get_int(const json& obj, const char* key, int fallback,
            const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    fail(where, std::string("'") + key + "' must be an integer");
  }
  return v.get<int>();
}

void get_center(const json& obj, Real& cx, Real& cy, const std::string& where) {
  if (!obj.contains("center")) return;
  const json& v = obj.at("center");
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
      !v[1].is_number()) {
    fail(where, "'center' must be an [x, y] pair of numbers");
  }
  cx = v[0].get<Real>();
  cy = v[1].get<Real>();
  if (!std::isfinite(cx) || !std::isfinite(cy)) {
    fail(where, "'center' must be finite");
  }
}

PowerBump parse_bump(const json& j, const std::string& where,
                     bool with_shape_key) {
  if (!j.is_object()) fail(where, "must be an object");
  if (with_shape_key) {
    check_keys(j, {"shape", "amplitude", "radius", "exponent", "center"},
               where);
  } else {
    check_keys(j, {"amplitude", "radius", "exponent", "center"}, where);
  }
  PowerBump b;
  b.amplitude = get_real(j, "amplitude", b.amplitude, where);
  b.radius = get_real(j, "radius", b.radius, where);
  b.exponent = get_int(j, "exponent", b.exponent, where);
  get_center(j, b.center_x, b.center_y, where);
  if (!(b.radius > 0.0)) fail(where, "'radius' must be positive");
  if (b.exponent < 1) fail(where, "'exponent' must be at least 1");
  return b;
}

ShapeSpec parse_shape(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "must be an object");
  if (!j.contains("shape") || !j.at("shape").is_string()) {
    fail(where, "needs a 'shape' name string");
  }
  const std::string kind = j.at("shape").get<std::string>();
  if (kind == "zero") {
    check_keys(j, {"shape"}, where);
    return ZeroShape{};
  }
  if (kind == "gaussian") {
    check_keys(j, {"shape", "amplitude", "width", "cutoff", "center"}, where);
    GaussianShape s;
    s.amplitude = get_real(j, "amplitude", s.amplitude, where);
    s.width = get_real(j, "width", s.width, where);
    s.cutoff = get_real(j, "cutoff", s.cutoff, where);
    get_center(j, s.center_x, s.center_y, where);
    if (!(s.width > 0.0)) fail(where, "'width' must be positive");
    if (!(s.cutoff > 0.0)) fail(where, "'cutoff' must be positive");
    return s;
  }
  if (kind == "plateau") {
    check_keys(j, {"shape", "amplitude", "inner_radius", "outer_radius",
                   "center"},
               where);
    PlateauShape s;
    s.amplitude = get_real(j, "amplitude", s.amplitude, where);
    s.inner_radius = get_real(j, "inner_radius", s.inner_radius, where);
    s.outer_radius = get_real(j, "outer_radius", s.outer_radius, where);
    get_center(j, s.center_x, s.center_y, where);
    if (!(s.inner_radius >= 0.0)) {
      fail(where, "'inner_radius' must be nonnegative");
    }
    if (!(s.outer_radius > s.inner_radius)) {
      fail(where, "'outer_radius' must exceed 'inner_radius'");
    }
    return s;
  }
  if (kind == "disk") {
    check_keys(j, {"shape", "amplitude", "radius", "center"}, where);
    DiskShape s;
    s.amplitude = get_real(j, "amplitude", s.amplitude, where);
    s.radius = get_real(j, "radius", s.radius, where);
    get_center(j, s.center_x, s.center_y, where);
    if (!(s.radius > 0.0)) fail(where, "'radius' must be positive");
    return s;
  }
  if (kind == "bumps") {
    check_keys(j, {"shape", "bumps"}, where);
    if (!j.contains("bumps") || !j.at("bumps").is_array() ||
        j.at("bumps").empty()) {
      fail(where, "'bumps' must be a nonempty array");
    }
    BumpsShape s;
    int k = 0;
    for (const json& item : j.at("bumps")) {
      s.bumps.push_back(
          parse_bump(item, where + ".bumps[" + std::to_string(k) + "]",
                     /*with_shape_key=*/false));
      ++k;
    }
    return s;
  }
  if (kind == "nonradiating") {
    NonradiatingShape s;
    s.window = parse_bump(j, where, /*with_shape_key=*/true);
    return s;
  }
  fail(where, "unknown shape '" + kind + "'");
}

json center_json(Real cx, Real cy) { return json::array({cx, cy}); }

json bump_json(const PowerBump& b, bool with_shape_key) {
  json j;
  if (with_shape_key) j["shape"] = "nonradiating";
  j["amplitude"] = b.amplitude;
  j["radius"] = b.radius;
  j["exponent"] = b.exponent;
  j["center"] = center_json(b.center_x, b.center_y);
  return j;
}

json shape_json(const ShapeSpec& spec) {
  json j;
  if (std::holds_alternative<ZeroShape>(spec)) {
    j["shape"] = "zero";
  } else if (const auto* g = std::get_if<GaussianShape>(&spec)) {
    j["shape"] = "gaussian";
    j["amplitude"] = g->amplitude;
    j["width"] = g->width;
    j["cutoff"] = g->cutoff;
    j["center"] = center_json(g->center_x, g->center_y);
  } else if (const auto* p = std::get_if<PlateauShape>(&spec)) {
    j["shape"] = "plateau";
    j["amplitude"] = p->amplitude;
    j["inner_radius"] = p->inner_radius;
    j["outer_radius"] = p->outer_radius;
    j["center"] = center_json(p->center_x, p->center_y);
  } else if (const auto* d = std::get_if<DiskShape>(&spec)) {
    j["shape"] = "disk";
    j["amplitude"] = d->amplitude;
    j["radius"] = d->radius;
    j["center"] = center_json(d->center_x, d->center_y);
  } else if (const auto* b = std::get_if<BumpsShape>(&spec)) {
    j["shape"] = "bumps";
    json arr = json::array();
    for (const PowerBump& bump : b->bumps) {
      arr.push_back(bump_json(bump, /*with_shape_key=*/false));
    }
    j["bumps"] = std::move(arr);
  } else if (const auto* n = std::get_if<NonradiatingShape>(&spec)) {
    j = bump_json(n->window, /*with_shape_key=*/true);
  }
  return j;
}

void forbid_nonradiating(const ShapeSpec& spec, const std::string& where) {
  if (std::holds_alternative<NonradiatingShape>(spec)) {
    fail(where, "the nonradiating shape is only valid for the source f");
  }
}

}  // namespace

RVec evaluate_shape(const ShapeSpec& spec, const Grid2D& grid) {
  const int N = grid.cells();
  RVec out = RVec::Zero(N);
  if (std::holds_alternative<ZeroShape>(spec)) {
    return out;
  }
  if (const auto* s = std::get_if<GaussianShape>(&spec)) {
    const Real cut2 = s->cutoff * s->cutoff;
    const Real denom = 2.0 * s->width * s->width;
    for (int i = 0; i < N; ++i) {
      const Real dx = grid.x(i) - s->center_x;
      const Real dy = grid.y(i) - s->center_y;
      const Real r2 = dx * dx + dy * dy;
      if (r2 > cut2) continue;
      out(i) = s->amplitude * std::exp(-r2 / denom);
    }
    return out;
  }
  if (const auto* s = std::get_if<PlateauShape>(&spec)) {
    for (int i = 0; i < N; ++i) {
      const Real dx = grid.x(i) - s->center_x;
      const Real dy = grid.y(i) - s->center_y;
      const Real r = std::hypot(dx, dy);
      if (r >= s->outer_radius) continue;
      Real t = (r - s->inner_radius) / (s->outer_radius - s->inner_radius);
      t = std::clamp(t, 0.0, 1.0);
      const Real smooth = 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
      out(i) = s->amplitude * smooth;
    }
    return out;
  }
  if (const auto* s = std::get_if<DiskShape>(&spec)) {
    const Real rad2 = s->radius * s->radius;
    for (int i = 0; i < N; ++i) {
      const Real dx = grid.x(i) - s->center_x;
      const Real dy = grid.y(i) - s->center_y;
      if (dx * dx + dy * dy < rad2) out(i) = s->amplitude;
    }
    return out;
  }
  if (const auto* s = std::get_if<BumpsShape>(&spec)) {
    for (const PowerBump& b : s->bumps) {
      const Real rad2 = b.radius * b.radius;
      for (int i = 0; i < N; ++i) {
        const Real dx = grid.x(i) - b.center_x;
        const Real dy = grid.y(i) - b.center_y;
        const Real t2 = (dx * dx + dy * dy) / rad2;
        if (t2 < 1.0) {
          out(i) += b.amplitude * std::pow(1.0 - t2, b.exponent);
        }
      }
    }
    return out;
  }
  throw UsageError(
      "evaluate_shape: the nonradiating source shape depends on kappa and "
      "alpha; resolve it through load_scene");
}

ExperimentManifest parse_manifest(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("manifest: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("top level", "must be a JSON object");
  check_keys(j,
             {"scene", "solver", "measurement", "reconstruction", "seed",
              "outputs"},
             "top level");

  ExperimentManifest m;
  if (j.contains("scene")) {
    const json& s = j.at("scene");
    if (!s.is_object()) fail("scene", "must be an object");
    check_keys(s, {"r", "n", "kappa", "f", "alpha", "v"}, "scene");
    m.scene.R = get_real(s, "r", m.scene.R, "scene");
    m.scene.n = get_int(s, "n", m.scene.n, "scene");
    m.scene.kappa = get_real(s, "kappa", m.scene.kappa, "scene");
    if (!(m.scene.R > 0.0)) fail("scene", "'r' must be positive");
    if (m.scene.n < 4 || m.scene.n % 2 != 0) {
      fail("scene", "'n' must be an even integer >= 4");
    }
    if (!(m.scene.kappa > 0.0)) fail("scene", "'kappa' must be positive");
    if (s.contains("f")) m.scene.f = parse_shape(s.at("f"), "scene.f");
    if (s.contains("alpha")) {
      m.scene.alpha = parse_shape(s.at("alpha"), "scene.alpha");
    }
    if (s.contains("v")) m.scene.V = parse_shape(s.at("v"), "scene.v");
    forbid_nonradiating(m.scene.alpha, "scene.alpha");
    forbid_nonradiating(m.scene.V, "scene.v");
  }

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    if (!s.is_object()) fail("solver", "must be an object");
    check_keys(s, {"tol", "max_iter", "contraction_guard"}, "solver");
    m.tol = get_real(s, "tol", m.tol, "solver");
    m.max_iter = get_int(s, "max_iter", m.max_iter, "solver");
    m.contraction_guard =
        get_real(s, "contraction_guard", m.contraction_guard, "solver");
    if (!(m.tol > 0.0)) fail("solver", "'tol' must be positive");
    if (m.max_iter < 1) fail("solver", "'max_iter' must be at least 1");
    if (!(m.contraction_guard > 0.0)) {
      fail("solver", "'contraction_guard' must be positive");
    }
  }

  if (j.contains("measurement")) {
    const json& s = j.at("measurement");
    if (!s.is_object()) fail("measurement", "must be an object");
    check_keys(s, {"m", "epsilons", "noise_level"}, "measurement");
    m.measurement.M = get_int(s, "m", m.measurement.M, "measurement");
    if (m.measurement.M < 1) fail("measurement", "'m' must be at least 1");
    if (s.contains("epsilons")) {
      const json& eps = s.at("epsilons");
      if (!eps.is_array() || eps.empty()) {
        fail("measurement", "'epsilons' must be a nonempty array");
      }
      m.measurement.epsilons.clear();
      for (const json& v : eps) {
        if (!v.is_number()) {
          fail("measurement", "'epsilons' entries must be numbers");
        }
        const Real e = v.get<Real>();
        if (!std::isfinite(e)) {
          fail("measurement", "'epsilons' entries must be finite");
        }
        m.measurement.epsilons.push_back(e);
      }
      if (m.measurement.epsilons.front() != 0.0) {
        fail("measurement", "'epsilons' must start with 0");
      }
      for (std::size_t i = 1; i < m.measurement.epsilons.size(); ++i) {
        if (!(m.measurement.epsilons[i] > m.measurement.epsilons[i - 1])) {
          fail("measurement", "'epsilons' must be strictly increasing");
        }
      }
    }
    m.measurement.noise_level =
        get_real(s, "noise_level", m.measurement.noise_level, "measurement");
    if (m.measurement.noise_level < 0.0) {
      fail("measurement", "'noise_level' must be nonnegative");
    }
  }

  if (j.contains("reconstruction")) {
    const json& s = j.at("reconstruction");
    if (!s.is_object()) fail("reconstruction", "must be an object");
    check_keys(s,
               {"regularization_lambda", "max_gn_iterations", "step_tol",
                "support_floor", "alpha_floor"},
               "reconstruction");
    ReconstructionSpec& r = m.reconstruction;
    r.regularization_lambda = get_real(s, "regularization_lambda",
                                       r.regularization_lambda,
                                       "reconstruction");
    r.max_gn_iterations =
        get_int(s, "max_gn_iterations", r.max_gn_iterations, "reconstruction");
    r.step_tol = get_real(s, "step_tol", r.step_tol, "reconstruction");
    r.support_floor =
        get_real(s, "support_floor", r.support_floor, "reconstruction");
    r.alpha_floor =
        get_real(s, "alpha_floor", r.alpha_floor, "reconstruction");
    if (!(r.regularization_lambda > 0.0)) {
      fail("reconstruction", "'regularization_lambda' must be positive");
    }
    if (r.max_gn_iterations < 0) {
      fail("reconstruction", "'max_gn_iterations' must be nonnegative");
    }
    if (!(r.step_tol > 0.0)) {
      fail("reconstruction", "'step_tol' must be positive");
    }
    if (!(r.support_floor > 0.0 && r.support_floor < 1.0)) {
      fail("reconstruction", "'support_floor' must lie in (0, 1)");
    }
    if (!(r.alpha_floor > 0.0 && r.alpha_floor < 1.0)) {
      fail("reconstruction", "'alpha_floor' must lie in (0, 1)");
    }
  }

  if (j.contains("seed")) {
    const json& v = j.at("seed");
    if (!v.is_number_unsigned()) {
      fail("top level", "'seed' must be a nonnegative integer");
    }
    m.seed = v.get<std::uint64_t>();
  }

  if (j.contains("outputs")) {
    const json& v = j.at("outputs");
    if (!v.is_string() || v.get<std::string>().empty()) {
      fail("top level", "'outputs' must be a nonempty directory path");
    }
    m.outputs = v.get<std::string>();
  }
  return m;
}

std::string manifest_to_json(const ExperimentManifest& manifest) {
  json j;
  j["scene"]["r"] = manifest.scene.R;
  j["scene"]["n"] = manifest.scene.n;
  j["scene"]["kappa"] = manifest.scene.kappa;
  j["scene"]["f"] = shape_json(manifest.scene.f);
  j["scene"]["alpha"] = shape_json(manifest.scene.alpha);
  j["scene"]["v"] = shape_json(manifest.scene.V);
  j["solver"]["tol"] = manifest.tol;
  j["solver"]["max_iter"] = manifest.max_iter;
  j["solver"]["contraction_guard"] = manifest.contraction_guard;
  j["measurement"]["m"] = manifest.measurement.M;
  j["measurement"]["epsilons"] = manifest.measurement.epsilons;
  j["measurement"]["noise_level"] = manifest.measurement.noise_level;
  j["reconstruction"]["regularization_lambda"] =
      manifest.reconstruction.regularization_lambda;
  j["reconstruction"]["max_gn_iterations"] =
      manifest.reconstruction.max_gn_iterations;
  j["reconstruction"]["step_tol"] = manifest.reconstruction.step_tol;
  j["reconstruction"]["support_floor"] = manifest.reconstruction.support_floor;
  j["reconstruction"]["alpha_floor"] = manifest.reconstruction.alpha_floor;
  j["seed"] = manifest.seed;
  j["outputs"] = manifest.outputs;
  return j.dump(2) + "\n";
}

ExperimentManifest read_manifest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading manifest file: " + path);
  return parse_manifest(buf.str());
}

LoadedScene load_scene(const ExperimentManifest& manifest) {
  LoadedScene sc;
  sc.grid = build_grid(manifest.scene.R, manifest.scene.n);
  sc.layout = boundary_layout(manifest.scene.R, manifest.measurement.M);
  sc.config = manifest.solver_config();
  sc.alpha = evaluate_shape(manifest.scene.alpha, sc.grid);
  sc.V = evaluate_shape(manifest.scene.V, sc.grid).cast<Complex>();
  if (const auto* nr = std::get_if<NonradiatingShape>(&manifest.scene.f)) {
    BumpsShape window;
    window.bumps.push_back(nr->window);
    const RVec phi = evaluate_shape(ShapeSpec{window}, sc.grid);
    sc.f = nonradiating_rhs(sc.grid, sc.config.kappa, phi, sc.alpha);
  } else {
    sc.f = evaluate_shape(manifest.scene.f, sc.grid);
  }
  return sc;
}

}  // namespace nlss
