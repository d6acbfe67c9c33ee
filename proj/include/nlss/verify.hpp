#pragma once

// Built-in verification suites: fast, self-contained property checks with
// frozen thresholds. Each entry records what was measured and what was
// required; an entry may be declared an expected failure (a probe run past a
// known validity edge), in which case the suite passes only if the probe
// indeed fails.

#include <string>
#include <vector>

#include "nlss/specfun.hpp"

namespace nlss {

struct VerifyEntry {
  std::string name;
  Real measured = 0.0;
  Real threshold = 0.0;
  std::string cmp = "<=";  // how measured relates to threshold when passing
  bool pass = false;
  bool expected_failure = false;
  std::string note;

  bool acceptable() const { return expected_failure ? !pass : pass; }
};

struct VerifyReport {
  std::string suite;
  std::vector<VerifyEntry> entries;

  bool ok() const {
    for (const VerifyEntry& e : entries) {
      if (!e.acceptable()) return false;
    }
    return true;
  }
};

// suite is one of: specfun, forward, linearize, inverse, all.
VerifyReport run_verify_suite(const std::string& suite);

std::string verify_report_to_json(const VerifyReport& report);

}  // namespace nlss
