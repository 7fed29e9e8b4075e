#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ffsm/sim.hpp"

namespace ffsm {

struct CheckResult {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  double tolerance = 0.0;
};

// Seeded randomized identity suites: coupling matrices vs the body-wise
// momentum oracle, regressor identities, projector algebra, command
// consistency, error-signal linearity, the momentum round trip, and the
// scenario's expected momentum constants when present.
std::vector<CheckResult> run_verification(const Scenario& scenario, uint64_t seed);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace ffsm
