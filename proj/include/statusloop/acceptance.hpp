#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace statusloop {

struct CriterionResult {
  std::string id;
  std::string name;
  bool pass;
  std::string detail;  ///< measured vs required, 6 significant digits
};

struct AcceptanceOptions {
  /// Quick mode: 3 seeds, horizon 1000, simulation tolerances doubled.
  /// Results are labeled accordingly and are not the reference outcome.
  bool quick = false;
  /// Directory receiving the six sweep CSVs and summary files.
  std::string out_dir = "acceptance-out";
  unsigned threads = 0;  ///< 0 = hardware concurrency
};

struct AcceptanceOutcome {
  std::vector<CriterionResult> results;
  bool quick = false;
  bool all_passed() const {
    for (const CriterionResult& r : results) {
      if (!r.pass) return false;
    }
    return true;
  }
};

/// Runs the full verification suite: six default sweeps plus the dedicated
/// hazard, property and reproducibility checks. Progress lines go to
/// `progress` when given; the returned results hold one pass/fail entry per
/// criterion.
AcceptanceOutcome run_acceptance(const AcceptanceOptions& options,
                                 std::ostream* progress = nullptr);

/// One "[k] name: PASS/FAIL — detail" line per criterion plus a summary line.
void print_acceptance(std::ostream& out, const AcceptanceOutcome& outcome);

}  // namespace statusloop
