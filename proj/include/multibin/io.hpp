#pragma once

// Text formats: counts files, prior files and simulation reports.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "multibin/core_model.hpp"
#include "multibin/sim_harness.hpp"

namespace multibin {

struct ArmCounts {
  JointCounts e;
  JointCounts c;
};

/// Reads "arm,pattern,count" records (e.g. "E,10,358") and/or subject-level
/// "arm,bits" records. '#' comments, blank lines and an "arm,..." header are
/// skipped. Errors are InvalidArgument naming `source` and the line number.
ArmCounts parse_counts(std::istream& in, const std::string& source = "<input>");
ArmCounts read_counts_file(const std::string& path);

/// JSON prior file. Accepted shapes:
///   {"n0": 20, "phi0": [...]}                   same prior in both arms
///   {"n0": 20, "phi_e": [...], "phi_c": [...]}
///   {"alpha_e": [...], "alpha_c": [...]}
ArmPriors parse_prior_json(const std::string& text);
ArmPriors read_prior_file(const std::string& path);

struct ReportRow {
  std::string dgm;
  std::string rule;
  std::string design;
  std::string prior;
  long n = 0;
  SimulationReport report;
};

/// Rounded table: 3 decimals for rates, integer n, 2 decimals for bias.
void write_csv(std::ostream& out, const std::vector<ReportRow>& rows);
/// Full precision; one object per condition with fields condition, reps,
/// rate, mean_n, bias, se (plus the descriptors above).
void write_json(std::ostream& out, const std::vector<ReportRow>& rows);

}  // namespace multibin
