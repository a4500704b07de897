#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cosserat {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;  // filled on failure or for recorded measurements
};

/// Runs the acceptance criteria (all of them when `only` is empty) and
/// prints one pass/fail line per criterion. Returns the per-criterion
/// results; the run passes when every selected criterion does.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& only, std::ostream& log);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace cosserat
