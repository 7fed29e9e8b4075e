#pragma once

#include <map>
#include <string>
#include <vector>

#include "ffsm/sim.hpp"

namespace ffsm {

// Scenario files are flat key-value text with '#' comments. Keys carry their
// unit as a suffix (dt_s, lambda_b_per_s, ...) so unit mistakes are visible
// at the call site. Unknown keys are rejected.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& origin);

}  // namespace ffsm
