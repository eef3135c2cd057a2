#ifndef MSGPATH_ACCEPTANCE_HPP
#define MSGPATH_ACCEPTANCE_HPP

#include <string>
#include <vector>

#include "msgpath/timings.hpp"

namespace msgpath {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs the reproduction checks against a timing set (normally the shipped
/// reference config): model exactness, observed-error margins, breakdown
/// percentages, simulator convergence and overlap invariance, the
/// estimator round trip, the what-if claims, and the randomized property
/// suites. Deterministic (fixed RNG seeds).
std::vector<CriterionResult> run_acceptance(const ComponentTimings& timings);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace msgpath

#endif  // MSGPATH_ACCEPTANCE_HPP
