#pragma once

#include <string>
#include <vector>

#include "ds/backlund.hpp"
#include "ds/fields.hpp"
#include "ds/laxpair.hpp"

namespace ds {

// Tolerances used by the verification passes; each can be overridden from the
// command line with --tolerance name=value.
struct ToleranceSet {
  double algebra = 1e-10;  // pointwise identity battery
  double jet = 1e-8;       // analytic-vs-difference derivative crosscheck
  double pde = 1e-5;       // evolution-system grid residual
  double lax = 1e-6;       // dressed linear-problem residual
};

// Fully resolved run description. Loading a config file applies the seed
// consistency closure and any requested phase locks, so every StepParams here
// is concrete.
struct RunConfig {
  SeedParams seed;
  std::vector<StepParams> steps;
  GridSpec grid;
  StepForm form = StepForm::kernel;
  std::vector<cd> lambda_samples;
  ToleranceSet tol;
  double time_step = 1e-3;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// JSON echo of the resolved configuration (computed seed exponents, locked
// phase constants, shifted level constants); written next to the outputs so a
// run can be reproduced exactly.
std::string render_config(const RunConfig& rc);

// "name=value" with name in {algebra, jet, pde, lax}.
void apply_tolerance_override(RunConfig& rc, const std::string& assignment);

}  // namespace ds
