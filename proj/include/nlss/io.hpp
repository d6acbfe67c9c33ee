#pragma once

// File formats. Complex grid fields travel as flat JSON {r, n, re, im} or as
// CSV rows (x, y, re, im); measurement and reconstruction records are JSON
// with lowercase snake_case keys. Every number is written in shortest
// round-trip decimal form, so identical runs produce identical bytes.

#include <string>

#include "nlss/inverse.hpp"
#include "nlss/measure.hpp"

namespace nlss {

// Shortest decimal string that parses back to exactly x.
std::string format_real(Real x);

struct FieldData {
  Real R = 0.0;
  int n = 0;
  CVec values;
};

std::string field_to_json(const Grid2D& grid, const CVec& field);
FieldData field_from_json(const std::string& text);
std::string field_to_csv(const Grid2D& grid, const CVec& field);

std::string measurements_to_json(const MeasurementSet& ms);
MeasurementSet measurements_from_json(const std::string& text);

std::string linearized_to_json(const LinearizedData& data);
LinearizedData linearized_from_json(const std::string& text);

std::string solve_report_to_json(const SolveReport& report);

std::string recovery_to_json(const RecoveryResult& result);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace nlss
