#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "nlss/cli.hpp"
#include "nlss/forward.hpp"
#include "nlss/io.hpp"
#include "nlss/scene.hpp"

namespace fs = std::filesystem;
using nlss::Complex;
using nlss::CVec;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

// Drives the real entry point in-process with captured streams.
CliRun run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
  CliRun r;
  try {
    r.code = nlss::cli_main(args);
  } catch (...) {
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    throw;
  }
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path work_root() {
  const char* t = std::getenv("TMPDIR");
  fs::path base = (t && *t) ? fs::path(t) : fs::path("/tmp");
  base /= "nlss_cli_" + std::to_string(::getpid());
  fs::create_directories(base);
  return base;
}

// A directory path for CLI output that does not exist yet; commands are
// expected to create it themselves.
std::string fresh_dir(const std::string& stem) {
  fs::path p = work_root() / stem;
  fs::remove_all(p);
  return p.string();
}

std::string write_manifest(const std::string& stem,
                           const nlss::ExperimentManifest& m) {
  fs::path p = work_root() / (stem + ".json");
  nlss::write_text_file(p.string(), nlss::manifest_to_json(m));
  return p.string();
}

// Small scene keeping every CLI test fast.
nlss::ExperimentManifest small_manifest() {
  nlss::ExperimentManifest m;
  m.scene.n = 32;
  m.measurement.M = 8;
  m.measurement.epsilons = {0.0, 5e-3, 1e-2};
  return m;
}

std::string slurp(const std::string& dir, const char* name) {
  return nlss::read_text_file((fs::path(dir) / name).string());
}

bool has_file(const std::string& dir, const char* name) {
  return fs::exists(fs::path(dir) / name);
}

}  // namespace

TEST_CASE("bad invocations are rejected before any work happens") {
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"--bogus-flag"}).code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);

  CliRun no_manifest = run_cli({"forward"});
  CHECK(no_manifest.code == 2);
  CHECK(no_manifest.err.find("needs --manifest") != std::string::npos);

  CliRun bad_suite = run_cli({"verify", "frobnicate"});
  CHECK(bad_suite.code == 2);
  CHECK(bad_suite.err.find("unknown verify suite") != std::string::npos);

  CliRun missing = run_cli(
      {"pipeline", "--manifest", (work_root() / "no_such.json").string()});
  CHECK(missing.code == 12);

  fs::path broken = work_root() / "broken.json";
  nlss::write_text_file(broken.string(), "{not json");
  std::string out1 = fresh_dir("broken_out");
  CliRun malformed = run_cli(
      {"pipeline", "--manifest", broken.string(), "--out", out1});
  CHECK(malformed.code == 2);
  CHECK_FALSE(fs::exists(out1));  // rejected before any output appears

  fs::path unknown = work_root() / "unknown_key.json";
  nlss::write_text_file(unknown.string(), R"({"scene": {"bogus": 1}})");
  std::string out2 = fresh_dir("unknown_out");
  CliRun rejected = run_cli(
      {"pipeline", "--manifest", unknown.string(), "--out", out2});
  CHECK(rejected.code == 2);
  CHECK(rejected.err.find("unknown key 'bogus'") != std::string::npos);
  CHECK_FALSE(fs::exists(out2));
}

TEST_CASE("forward command writes the solution it reports") {
  // A switched-off source solves in one sweep to the zero field.
  nlss::ExperimentManifest zero = small_manifest();
  zero.scene.f = nlss::GaussianShape{0.0, 0.2, 0.5, 0.0, 0.0};
  std::string zdir = fresh_dir("fwd_zero");
  CliRun zr = run_cli(
      {"forward", "--manifest", write_manifest("fwd_zero", zero), "--out",
       zdir});
  REQUIRE(zr.code == 0);
  nlss::FieldData zu = nlss::field_from_json(slurp(zdir, "u.json"));
  CHECK((zu.values.abs() == 0.0).all());
  nlohmann::json zrep = nlohmann::json::parse(slurp(zdir, "report.json"));
  CHECK(zrep.at("iterations_used").get<int>() == 1);
  CHECK(zrep.at("final_residual").get<double>() == 0.0);

  // The live scene's artifacts agree exactly with an in-process solve.
  nlss::ExperimentManifest m = small_manifest();
  std::string dir = fresh_dir("fwd_desk");
  CliRun r = run_cli(
      {"forward", "--manifest", write_manifest("fwd_desk", m), "--out", dir});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("forward:") != std::string::npos);
  REQUIRE(has_file(dir, "u.json"));
  REQUIRE(has_file(dir, "u.csv"));
  REQUIRE(has_file(dir, "report.json"));

  nlss::LoadedScene sc = nlss::load_scene(m);
  auto [u, rep] = nlss::picard_solve(sc.grid, sc.config,
                                     sc.f.cast<Complex>(), sc.V, sc.alpha);
  nlss::FieldData fd = nlss::field_from_json(slurp(dir, "u.json"));
  CHECK(fd.R == sc.grid.R);
  CHECK(fd.n == sc.grid.n);
  REQUIRE(fd.values.size() == u.size());
  CHECK((fd.values - u).abs().maxCoeff() == 0.0);

  nlohmann::json jrep = nlohmann::json::parse(slurp(dir, "report.json"));
  CHECK(jrep.at("iterations_used").get<int>() == rep.iterations_used);
  for (double ratio : jrep.at("contraction_ratios")) {
    CHECK(ratio < 1.0);
  }
}

TEST_CASE("pipeline output is reproducible and seed-addressable") {
  nlss::ExperimentManifest m = small_manifest();
  m.measurement.noise_level = 1e-2;
  m.seed = 42;
  std::string mp = write_manifest("pipe_noisy", m);

  std::string a = fresh_dir("pipe_a");
  CliRun ra = run_cli({"pipeline", "--manifest", mp, "--out", a});
  REQUIRE(ra.code == 0);
  CHECK(ra.out.find("pipeline: wrote") != std::string::npos);
  for (const char* name :
       {"measurements.json", "linearized.json", "q_hat.json", "q_hat.csv",
        "recovery.json", "u_hat.csv", "f_hat.csv", "metrics.json"}) {
    CHECK(has_file(a, name));
  }

  std::string b = fresh_dir("pipe_b");
  REQUIRE(run_cli({"pipeline", "--manifest", mp, "--out", b}).code == 0);
  CHECK(slurp(a, "measurements.json") == slurp(b, "measurements.json"));
  CHECK(slurp(a, "metrics.json") == slurp(b, "metrics.json"));
  CHECK(slurp(a, "recovery.json") == slurp(b, "recovery.json"));

  nlohmann::json metrics = nlohmann::json::parse(slurp(a, "metrics.json"));
  CHECK(metrics.at("assumption_satisfied").get<bool>());
  CHECK(metrics.at("q_error").is_number());
  CHECK(metrics.at("f_error_rel").is_number());
  CHECK(metrics.at("data_misfit").get<double>() < 1.0);
  CHECK(metrics.at("potential_sup").get<double>() > 0.0);

  // --seed replaces the manifest seed: overriding to 7 matches a manifest
  // that pins 7, and differs from the seed-42 run.
  std::string c = fresh_dir("pipe_c");
  REQUIRE(run_cli({"synthesize", "--manifest", mp, "--seed", "7", "--out", c})
              .code == 0);
  nlss::ExperimentManifest m7 = m;
  m7.seed = 7;
  std::string d = fresh_dir("pipe_d");
  REQUIRE(run_cli({"synthesize", "--manifest",
                   write_manifest("pipe_seed7", m7), "--out", d})
              .code == 0);
  CHECK(slurp(c, "measurements.json") == slurp(d, "measurements.json"));
  CHECK(slurp(c, "measurements.json") != slurp(a, "measurements.json"));
}

TEST_CASE("stages chained by hand reproduce the pipeline byte for byte") {
  nlss::ExperimentManifest m = small_manifest();
  std::string mp = write_manifest("stage_quiet", m);

  std::string p = fresh_dir("stage_pipe");
  REQUIRE(run_cli({"pipeline", "--manifest", mp, "--out", p}).code == 0);

  std::string s = fresh_dir("stage_by_hand");
  REQUIRE(run_cli({"synthesize", "--manifest", mp, "--out", s}).code == 0);
  REQUIRE(run_cli({"linearize", "--out", s}).code == 0);
  REQUIRE(run_cli({"invert", "--manifest", mp, "--out", s}).code == 0);
  REQUIRE(run_cli({"recover", "--manifest", mp, "--out", s}).code == 0);

  for (const char* name :
       {"measurements.json", "linearized.json", "q_hat.json", "q_hat.csv",
        "u_hat.csv", "f_hat.csv"}) {
    CAPTURE(name);
    CHECK(slurp(p, name) == slurp(s, name));
  }
  CHECK_FALSE(has_file(s, "metrics.json"));  // pipeline-only artifact

  // recovery.json agrees except for data_misfit: the pipeline forwards the
  // inversion misfit into the record, while a standalone recover has no
  // inversion behind it and reports zero.
  nlohmann::json rp = nlohmann::json::parse(slurp(p, "recovery.json"));
  nlohmann::json rs = nlohmann::json::parse(slurp(s, "recovery.json"));
  CHECK(rp.at("data_misfit").get<double>() > 0.0);
  CHECK(rs.at("data_misfit").get<double>() == 0.0);
  rp["data_misfit"] = 0.0;
  CHECK(rp == rs);

  // An explicit --in reads from anywhere, not just the output directory.
  std::string alt = fresh_dir("stage_alt");
  REQUIRE(run_cli({"invert", "--manifest", mp, "--out", alt, "--in",
                   (fs::path(p) / "linearized.json").string()})
              .code == 0);
  CHECK(slurp(alt, "q_hat.json") == slurp(p, "q_hat.json"));
}

TEST_CASE("pipeline failures name the stage and keep earlier artifacts") {
  nlss::ExperimentManifest m = small_manifest();
  m.scene.alpha = nlss::GaussianShape{0.0, 0.2, 0.5, 0.0, 0.0};
  std::string dir = fresh_dir("pipe_fail");
  CliRun r = run_cli(
      {"pipeline", "--manifest", write_manifest("pipe_zero_alpha", m),
       "--out", dir});
  CHECK(r.code == 23);
  CHECK(r.err.find("pipeline stage 'invert'") != std::string::npos);
  CHECK(r.err.find("empty reconstruction support") != std::string::npos);
  CHECK(has_file(dir, "measurements.json"));
  CHECK(has_file(dir, "linearized.json"));
  CHECK_FALSE(has_file(dir, "q_hat.json"));
  CHECK_FALSE(has_file(dir, "metrics.json"));
}

TEST_CASE("stage inputs that disagree with the manifest are rejected") {
  nlss::ExperimentManifest m = small_manifest();
  m.scene.kappa = 7.0;
  std::string mp = write_manifest("mismatch", m);

  // Linearized data recorded at a different wavenumber.
  nlss::LinearizedData ld;
  ld.kappa = 8.0;
  ld.R = 1.0;
  ld.layout = nlss::boundary_layout(1.0, 8);
  ld.v_traces.assign(8, CVec::Zero(8));
  fs::path ld_path = work_root() / "foreign_linearized.json";
  nlss::write_text_file(ld_path.string(), nlss::linearized_to_json(ld));
  CliRun inv = run_cli({"invert", "--manifest", mp, "--out",
                        fresh_dir("mismatch_inv"), "--in", ld_path.string()});
  CHECK(inv.code == 2);
  CHECK(inv.err.find("disagrees") != std::string::npos);

  // Potential field sampled on a different grid.
  nlss::Grid2D g16 = nlss::build_grid(1.0, 16);
  fs::path q_path = work_root() / "foreign_q.json";
  nlss::write_text_file(
      q_path.string(),
      nlss::field_to_json(g16, CVec::Zero(g16.cells())));
  CliRun rec = run_cli({"recover", "--manifest", mp, "--out",
                        fresh_dir("mismatch_rec"), "--in", q_path.string()});
  CHECK(rec.code == 2);
  CHECK(rec.err.find("disagrees") != std::string::npos);
}

TEST_CASE("verify subcommand emits the same report it stores") {
  std::string dir = fresh_dir("verify_out");
  CliRun r = run_cli({"verify", "specfun", "--out", dir});
  CHECK(r.code == 0);
  nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j.at("suite").get<std::string>() == "specfun");
  CHECK(j.at("ok").get<bool>());
  CHECK(!j.at("entries").empty());
  CHECK(slurp(dir, "verify_specfun.json") == r.out);
}
