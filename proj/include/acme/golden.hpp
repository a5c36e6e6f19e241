#ifndef ACME_GOLDEN_HPP
#define ACME_GOLDEN_HPP

#include <iosfwd>
#include <string>
#include <vector>

// Regression corpus: pinned parameter sets and expected values loaded from a
// versioned CSV file (`name,quantity,expected,tolerance,provenance`), so the
// numbers under test are auditable outside the test code.

namespace acme {

struct GoldenOutcome {
  std::string name;
  std::string quantity;
  double expected = 0.0;
  double tolerance = 0.0;
  double actual = 0.0;
  bool pass = false;
  std::string provenance;
};

struct GoldenReport {
  std::vector<GoldenOutcome> outcomes;
  bool all_pass = true;
};

/// Evaluate every case in the golden CSV.  Failures are data in the report,
/// not exceptions; unknown case or quantity names do throw.
GoldenReport run_golden_suite(const std::string& csv_path);

void print_golden_report(const GoldenReport& report, std::ostream& out);

}  // namespace acme

#endif
