#include "nlss/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlss/io.hpp"
#include "nlss/pipeline.hpp"
#include "nlss/threads.hpp"
#include "nlss/verify.hpp"

namespace nlss {
namespace {

namespace fs = std::filesystem;

struct GlobalOpts {
  std::string manifest_path;
  std::string out_dir;
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

ExperimentManifest manifest_for(const GlobalOpts& g) {
  if (g.manifest_path.empty()) {
    throw UsageError("this command needs --manifest <path>");
  }
  ExperimentManifest m = read_manifest_file(g.manifest_path);
  if (g.seed_set) m.seed = g.seed;
  return m;
}

std::string resolve_out(const GlobalOpts& g, const ExperimentManifest& m) {
  return g.out_dir.empty() ? m.outputs : g.out_dir;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(fs::path(dir), ec);
  if (ec) throw IoError("cannot create output directory: " + dir);
}

std::string join(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

// Default stage input: an explicit --in wins, otherwise the well-known file
// name inside the output directory.
std::string stage_input(const std::string& in_path, const std::string& dir,
                        const char* name) {
  return in_path.empty() ? join(dir, name) : in_path;
}

BVec support_prior(const RVec& alpha, Real floor) {
  BVec mask = BVec::Constant(alpha.size(), false);
  const Real amax = alpha.abs().maxCoeff();
  if (!(amax > 0.0)) return mask;
  for (int i = 0; i < alpha.size(); ++i) {
    mask(i) = std::abs(alpha(i)) >= floor * amax;
  }
  return mask;
}

int cmd_forward(const GlobalOpts& g) {
  const ExperimentManifest m = manifest_for(g);
  const LoadedScene sc = load_scene(m);
  const auto [u, report] = picard_solve(sc.grid, sc.config,
                                        sc.f.cast<Complex>(), sc.V, sc.alpha);
  const std::string out = resolve_out(g, m);
  ensure_dir(out);
  write_text_file(join(out, "u.json"), field_to_json(sc.grid, u));
  write_text_file(join(out, "u.csv"), field_to_csv(sc.grid, u));
  write_text_file(join(out, "report.json"), solve_report_to_json(report));
  std::cout << "forward: " << report.iterations_used
            << " iterations, residual " << format_real(report.final_residual)
            << ", wrote " << out << "/u.{json,csv} and report.json\n";
  return 0;
}

int cmd_synthesize(const GlobalOpts& g) {
  const ExperimentManifest m = manifest_for(g);
  const LoadedScene sc = load_scene(m);
  const MeasurementSet ms = synthesize_measurements(
      sc.grid, sc.config, sc.f.cast<Complex>(), sc.alpha, sc.layout,
      m.measurement.epsilons, m.measurement.noise_level, m.seed);
  const std::string out = resolve_out(g, m);
  ensure_dir(out);
  write_text_file(join(out, "measurements.json"), measurements_to_json(ms));
  std::cout << "synthesize: " << ms.layout.M << " sources, "
            << ms.epsilons.size() << " amplitudes, wrote " << out
            << "/measurements.json\n";
  return 0;
}

int cmd_linearize(const GlobalOpts& g, const std::string& in_path) {
  // This stage is manifest-free: everything it needs travels in the
  // measurement file.
  const std::string dir = g.out_dir.empty() ? std::string("out") : g.out_dir;
  const std::string in = stage_input(in_path, dir, "measurements.json");
  const MeasurementSet ms = measurements_from_json(read_text_file(in));
  const LinearizedData ld = linearize(ms);
  ensure_dir(dir);
  write_text_file(join(dir, "linearized.json"), linearized_to_json(ld));
  std::cout << "linearize: " << ld.v_traces.size() << " traces, wrote " << dir
            << "/linearized.json\n";
  return 0;
}

int cmd_invert(const GlobalOpts& g, const std::string& in_path) {
  const ExperimentManifest m = manifest_for(g);
  const LoadedScene sc = load_scene(m);
  const std::string out = resolve_out(g, m);
  const std::string in = stage_input(in_path, out, "linearized.json");
  const LinearizedData ld = linearized_from_json(read_text_file(in));
  if (ld.R != sc.grid.R || ld.layout.M != sc.layout.M ||
      ld.kappa != sc.config.kappa) {
    throw UsageError(
        "invert: linearized data (r, m, kappa) disagrees with the manifest "
        "scene");
  }
  ReconstructionConfig rc;
  rc.regularization_lambda = m.reconstruction.regularization_lambda;
  rc.max_gn_iterations = m.reconstruction.max_gn_iterations;
  rc.step_tol = m.reconstruction.step_tol;
  rc.support_mask = support_prior(sc.alpha, m.reconstruction.support_floor);
  const auto [q_hat, report] = reconstruct_potential(ld, rc, sc.grid);
  ensure_dir(out);
  write_text_file(join(out, "q_hat.json"), field_to_json(sc.grid, q_hat));
  write_text_file(join(out, "q_hat.csv"), field_to_csv(sc.grid, q_hat));
  std::cout << "invert: " << report.iterations << " steps, relative misfit "
            << format_real(report.data_misfit) << ", wrote " << out
            << "/q_hat.{json,csv}\n";
  return 0;
}

int cmd_recover(const GlobalOpts& g, const std::string& in_path) {
  const ExperimentManifest m = manifest_for(g);
  const LoadedScene sc = load_scene(m);
  const std::string out = resolve_out(g, m);
  const std::string in = stage_input(in_path, out, "q_hat.json");
  const FieldData fd = field_from_json(read_text_file(in));
  if (fd.R != sc.grid.R || fd.n != sc.grid.n) {
    throw UsageError(
        "recover: potential field grid disagrees with the manifest scene");
  }
  RecoveryResult rec =
      recover_source(fd.values, sc.alpha, sc.config.kappa, sc.grid,
                     m.reconstruction.alpha_floor, &sc.f);
  ensure_dir(out);
  write_text_file(join(out, "recovery.json"), recovery_to_json(rec));
  write_text_file(join(out, "u_hat.csv"), field_to_csv(sc.grid, rec.u_hat));
  write_text_file(join(out, "f_hat.csv"),
                  field_to_csv(sc.grid, rec.f_hat.cast<Complex>()));
  std::cout << "recover: wrote " << out
            << "/recovery.json, u_hat.csv, f_hat.csv";
  if (rec.f_error_rel.has_value()) {
    std::cout << " (relative source error " << format_real(*rec.f_error_rel)
              << ")";
  }
  std::cout << "\n";
  return 0;
}

int cmd_pipeline(const GlobalOpts& g) {
  const ExperimentManifest m = manifest_for(g);
  const std::string out = resolve_out(g, m);
  const PipelineResult result = run_pipeline(m, out);
  std::cout << "pipeline: wrote " << out << "/metrics.json\n"
            << metrics_to_json(result.metrics);
  return 0;
}

int cmd_verify(const GlobalOpts& g, const std::string& suite) {
  const VerifyReport report = run_verify_suite(suite);
  const std::string text = verify_report_to_json(report);
  std::cout << text;
  if (!g.out_dir.empty()) {
    ensure_dir(g.out_dir);
    write_text_file(join(g.out_dir, ("verify_" + suite + ".json").c_str()),
                    text);
  }
  return report.ok() ? 0 : 1;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{
      "Boundary-measurement toolkit for the nonlinear Helmholtz source "
      "problem: forward solves, measurement synthesis, linearization, "
      "potential reconstruction, and source recovery."};
  app.fallthrough();
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--manifest", g.manifest_path,
                 "experiment manifest JSON file");
  app.add_option("--out", g.out_dir,
                 "output directory (default: the manifest 'outputs' entry)");
  app.add_option("--threads", g.threads, "worker thread cap (default 1)");
  auto* seed_opt =
      app.add_option("--seed", g.seed, "override the manifest noise seed");

  std::string in_path;
  std::string suite = "all";

  auto* c_forward =
      app.add_subcommand("forward", "solve the unperturbed problem");
  auto* c_synth = app.add_subcommand(
      "synthesize", "emit boundary traces for every source and amplitude");
  auto* c_lin = app.add_subcommand(
      "linearize", "extrapolate measurement traces to the linearized data");
  c_lin->add_option("--in", in_path, "measurements JSON path");
  auto* c_inv = app.add_subcommand(
      "invert", "reconstruct the potential from linearized data");
  c_inv->add_option("--in", in_path, "linearized data JSON path");
  auto* c_rec = app.add_subcommand(
      "recover", "recover the source from a reconstructed potential");
  c_rec->add_option("--in", in_path, "potential field JSON path");
  auto* c_pipe = app.add_subcommand(
      "pipeline", "run synthesize, linearize, invert, and recover in order");
  auto* c_ver = app.add_subcommand("verify", "run a verification suite");
  c_ver->add_option("suite", suite,
                    "one of: specfun, forward, linearize, inverse, all");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("nlss");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  g.seed_set = seed_opt->count() > 0;
  if (g.threads > 0) set_default_threads(g.threads);

  try {
    if (c_forward->parsed()) return cmd_forward(g);
    if (c_synth->parsed()) return cmd_synthesize(g);
    if (c_lin->parsed()) return cmd_linearize(g, in_path);
    if (c_inv->parsed()) return cmd_invert(g, in_path);
    if (c_rec->parsed()) return cmd_recover(g, in_path);
    if (c_pipe->parsed()) return cmd_pipeline(g);
    if (c_ver->parsed()) return cmd_verify(g, suite);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 70;
  }
  return 2;
}

}  // namespace nlss
