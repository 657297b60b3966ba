#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace ppcalc::app {

using nlohmann::json;

struct CriterionOutcome {
  int id = 0;
  std::string name;
  bool numeric_pass = false;  // tolerances met; deterministic
  double budget_seconds = 0.0;
  double seconds = 0.0;       // wall time; not part of the deterministic report
  std::string summary;
  json details;

  bool within_budget() const { return seconds < budget_seconds; }
  bool passed() const { return numeric_pass && within_budget(); }
};

struct SuiteOptions {
  std::uint64_t seed = 20240611;
  int threads = 1;
  std::vector<int> only;  // empty means all numeric criteria
};

inline constexpr int kNumericCriteria = 9;

// Criteria 1..9: oracle and Monte Carlo checks per module.
std::vector<CriterionOutcome> run_criteria(const SuiteOptions& opts);

// Report body for the outcomes; timings go to run_info["criteria_seconds"].
json criteria_results(const std::vector<CriterionOutcome>& outcomes);
json criteria_timings(const std::vector<CriterionOutcome>& outcomes);

std::string outcome_line(int id, const std::string& name, bool passed, const std::string& summary);

}  // namespace ppcalc::app
