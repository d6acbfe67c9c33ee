#include "nlss/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "nlss/errors.hpp"

namespace nlss {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what, const std::string& detail) {
  throw UsageError(what + ": " + detail);
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError(what + ": invalid JSON: " + e.what());
  }
}

Real require_real(const json& obj, const char* key, const std::string& what) {
  if (!obj.contains(key) || !obj.at(key).is_number()) {
    fail(what, std::string("missing numeric field '") + key + "'");
  }
  const Real x = obj.at(key).get<Real>();
  if (!std::isfinite(x)) fail(what, std::string("'") + key + "' is not finite");
  return x;
}

int require_int(const json& obj, const char* key, const std::string& what) {
  if (!obj.contains(key) || !obj.at(key).is_number_integer()) {
    fail(what, std::string("missing integer field '") + key + "'");
  }
  return obj.at(key).get<int>();
}

std::vector<Real> require_real_array(const json& obj, const char* key,
                                     const std::string& what) {
  if (!obj.contains(key) || !obj.at(key).is_array()) {
    fail(what, std::string("missing array field '") + key + "'");
  }
  std::vector<Real> out;
  out.reserve(obj.at(key).size());
  for (const json& v : obj.at(key)) {
    if (!v.is_number()) {
      fail(what, std::string("'") + key + "' entries must be numbers");
    }
    const Real x = v.get<Real>();
    if (!std::isfinite(x)) {
      fail(what, std::string("'") + key + "' entries must be finite");
    }
    out.push_back(x);
  }
  return out;
}

json real_array_json(const Real* data, Eigen::Index size) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < size; ++i) arr.push_back(data[i]);
  return arr;
}

json cvec_json(const CVec& v) {
  json j;
  json re = json::array();
  json im = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    re.push_back(v(i).real());
    im.push_back(v(i).imag());
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j;
}

CVec cvec_from(const json& obj, const std::string& what) {
  const std::vector<Real> re = require_real_array(obj, "re", what);
  const std::vector<Real> im = require_real_array(obj, "im", what);
  if (re.size() != im.size()) {
    fail(what, "'re' and 'im' lengths differ");
  }
  CVec out(static_cast<Eigen::Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = Complex(re[i], im[i]);
  }
  return out;
}

}  // namespace

std::string format_real(Real x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string field_to_json(const Grid2D& grid, const CVec& field) {
  if (field.size() != grid.cells()) {
    throw UsageError("field_to_json: field size does not match the grid");
  }
  json j = cvec_json(field);
  j["r"] = grid.R;
  j["n"] = grid.n;
  return j.dump(2) + "\n";
}

FieldData field_from_json(const std::string& text) {
  const json j = parse_json(text, "field");
  if (!j.is_object()) fail("field", "top level must be an object");
  FieldData out;
  out.R = require_real(j, "r", "field");
  out.n = require_int(j, "n", "field");
  if (!(out.R > 0.0) || out.n < 1) {
    fail("field", "'r' must be positive and 'n' at least 1");
  }
  out.values = cvec_from(j, "field");
  const auto expect =
      static_cast<Eigen::Index>(out.n) * static_cast<Eigen::Index>(out.n);
  if (out.values.size() != expect) {
    fail("field", "'re'/'im' length must equal n*n");
  }
  return out;
}

std::string field_to_csv(const Grid2D& grid, const CVec& field) {
  if (field.size() != grid.cells()) {
    throw UsageError("field_to_csv: field size does not match the grid");
  }
  std::string out = "x,y,re,im\n";
  for (int i = 0; i < grid.cells(); ++i) {
    out += format_real(grid.x(i));
    out += ',';
    out += format_real(grid.y(i));
    out += ',';
    out += format_real(field(i).real());
    out += ',';
    out += format_real(field(i).imag());
    out += '\n';
  }
  return out;
}

std::string measurements_to_json(const MeasurementSet& ms) {
  json j;
  j["kappa"] = ms.kappa;
  j["r"] = ms.R;
  j["m"] = ms.layout.M;
  j["epsilons"] = ms.epsilons;
  json traces = json::array();
  const int E = static_cast<int>(ms.epsilons.size());
  for (int m = 0; m < ms.layout.M; ++m) {
    for (int e = 0; e < E; ++e) {
      json entry = cvec_json(ms.trace(m, e));
      entry["m"] = m;
      entry["eps_index"] = e;
      traces.push_back(std::move(entry));
    }
  }
  j["traces"] = std::move(traces);
  return j.dump(2) + "\n";
}

MeasurementSet measurements_from_json(const std::string& text) {
  const json j = parse_json(text, "measurements");
  if (!j.is_object()) fail("measurements", "top level must be an object");
  MeasurementSet ms;
  ms.kappa = require_real(j, "kappa", "measurements");
  ms.R = require_real(j, "r", "measurements");
  const int M = require_int(j, "m", "measurements");
  if (!(ms.kappa > 0.0) || !(ms.R > 0.0) || M < 1) {
    fail("measurements", "'kappa', 'r' must be positive and 'm' at least 1");
  }
  ms.layout = boundary_layout(ms.R, M);
  ms.epsilons = require_real_array(j, "epsilons", "measurements");
  const int E = static_cast<int>(ms.epsilons.size());
  if (E < 1 || ms.epsilons.front() != 0.0) {
    fail("measurements", "'epsilons' must start with 0");
  }
  for (int e = 1; e < E; ++e) {
    if (!(ms.epsilons[static_cast<std::size_t>(e)] >
          ms.epsilons[static_cast<std::size_t>(e - 1)])) {
      fail("measurements", "'epsilons' must be strictly increasing");
    }
  }
  if (!j.contains("traces") || !j.at("traces").is_array()) {
    fail("measurements", "missing array field 'traces'");
  }
  ms.traces.assign(static_cast<std::size_t>(M) * static_cast<std::size_t>(E),
                   CVec());
  std::vector<bool> seen(static_cast<std::size_t>(M * E), false);
  for (const json& entry : j.at("traces")) {
    if (!entry.is_object()) fail("measurements", "trace entries are objects");
    const int m = require_int(entry, "m", "measurements.traces");
    const int e = require_int(entry, "eps_index", "measurements.traces");
    if (m < 0 || m >= M || e < 0 || e >= E) {
      fail("measurements", "trace entry (m, eps_index) out of range");
    }
    const auto slot = static_cast<std::size_t>(m * E + e);
    if (seen[slot]) fail("measurements", "duplicate trace entry");
    CVec tr = cvec_from(entry, "measurements.traces");
    if (tr.size() != M) {
      fail("measurements", "trace length must equal the receiver count");
    }
    ms.traces[slot] = std::move(tr);
    seen[slot] = true;
  }
  for (bool s : seen) {
    if (!s) fail("measurements", "missing trace entries: need every (m, eps)");
  }
  return ms;
}

std::string linearized_to_json(const LinearizedData& data) {
  json j;
  j["kappa"] = data.kappa;
  j["r"] = data.R;
  j["m"] = data.layout.M;
  json arr = json::array();
  for (std::size_t m = 0; m < data.v_traces.size(); ++m) {
    json entry = cvec_json(data.v_traces[m]);
    entry["m"] = static_cast<int>(m);
    arr.push_back(std::move(entry));
  }
  j["v_traces"] = std::move(arr);
  return j.dump(2) + "\n";
}

LinearizedData linearized_from_json(const std::string& text) {
  const json j = parse_json(text, "linearized");
  if (!j.is_object()) fail("linearized", "top level must be an object");
  LinearizedData data;
  data.kappa = require_real(j, "kappa", "linearized");
  data.R = require_real(j, "r", "linearized");
  const int M = require_int(j, "m", "linearized");
  if (!(data.kappa > 0.0) || !(data.R > 0.0) || M < 1) {
    fail("linearized", "'kappa', 'r' must be positive and 'm' at least 1");
  }
  data.layout = boundary_layout(data.R, M);
  if (!j.contains("v_traces") || !j.at("v_traces").is_array()) {
    fail("linearized", "missing array field 'v_traces'");
  }
  data.v_traces.assign(static_cast<std::size_t>(M), CVec());
  std::vector<bool> seen(static_cast<std::size_t>(M), false);
  for (const json& entry : j.at("v_traces")) {
    if (!entry.is_object()) fail("linearized", "trace entries are objects");
    const int m = require_int(entry, "m", "linearized.v_traces");
    if (m < 0 || m >= M) fail("linearized", "trace index out of range");
    if (seen[static_cast<std::size_t>(m)]) {
      fail("linearized", "duplicate trace entry");
    }
    CVec tr = cvec_from(entry, "linearized.v_traces");
    if (tr.size() != M) {
      fail("linearized", "trace length must equal the receiver count");
    }
    data.v_traces[static_cast<std::size_t>(m)] = std::move(tr);
    seen[static_cast<std::size_t>(m)] = true;
  }
  for (bool s : seen) {
    if (!s) fail("linearized", "missing trace entries: need every source");
  }
  return data;
}

std::string solve_report_to_json(const SolveReport& report) {
  json j;
  j["iterations_used"] = report.iterations_used;
  j["sup_diffs"] = report.sup_diffs;
  j["contraction_ratios"] = report.contraction_ratios;
  j["final_residual"] = report.final_residual;
  j["born_term_norm"] = report.born_term_norm;
  j["remainder_norm"] = report.remainder_norm;
  return j.dump(2) + "\n";
}

std::string recovery_to_json(const RecoveryResult& result) {
  json j;
  j["data_misfit"] = result.data_misfit;
  if (result.f_error_rel.has_value()) {
    j["f_error_rel"] = *result.f_error_rel;
  } else {
    j["f_error_rel"] = nullptr;
  }
  j["imag_residual_sup"] = result.imag_residual_sup;
  j["q_hat"] = cvec_json(result.q_hat);
  j["u_hat"] = cvec_json(result.u_hat);
  j["f_hat"] = real_array_json(result.f_hat.data(), result.f_hat.size());
  return j.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading file: " + path);
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing file: " + path);
}

}  // namespace nlss
