#pragma once

#include <vector>

#include "ds/backlund.hpp"
#include "ds/laxpair.hpp"

// Shared fixtures for the test suite: one background parameter set and a few
// step families reused across files so frozen reference values line up.
namespace ts {

using ds::cd;

inline ds::SeedParams standard_seed() {
  return ds::SeedParams::consistent(cd(0.6, -0.2), cd(-0.35, 0.15), cd(0.8, 0.3),
                                    cd(-0.55, 0.7), cd(0.13, 0.07), cd(-0.21, 0.11),
                                    cd(0.37, -0.05), cd(0.12, 0.04));
}

// Full 2x2 coupling block with nonzero second gauge component and explicit
// phase constants; exercises every slot of StepParams.
inline ds::StepParams general_step() {
  ds::StepParams st;
  st.lambda_l = cd(1.1, 0.4);
  st.lambda_lp = cd(0.7, -0.6);
  st.a_l = cd(0.9, 0.2);
  st.b_l = cd(-0.4, 0.55);
  st.f11 = cd(1.2, 0.1);
  st.f12 = cd(0.3, -0.45);
  st.f21 = cd(-0.7, 0.25);
  st.f22 = cd(0.95, 0.35);
  st.m1 = cd(0.21, -0.13);
  st.m1p = cd(-0.17, 0.08);
  st.m2 = cd(0.33, 0.05);
  st.m2p = cd(-0.11, -0.23);
  return st;
}

// Diagonal-block steps with the phase constants locked so the dressed
// problem keeps its form; count <= 3.
inline std::vector<ds::StepParams> locked_reduced_steps(const ds::SeedParams& seed,
                                                        int count) {
  const cd lam_l[3] = {cd(1.1, 0.4), cd(-0.5, 0.9), cd(1.7, -0.8)};
  const cd lam_p[3] = {cd(0.7, -0.6), cd(1.3, 0.2), cd(-0.9, 1.1)};
  const cd a_l[3] = {cd(0.9, 0.2), cd(0.35, -0.7), cd(-0.6, 0.45)};
  const cd f11s[3] = {cd(1.2, 0.1), cd(0.85, -0.2), cd(0.7, 0.6)};
  const cd f22s[3] = {cd(0.95, 0.35), cd(-1.1, 0.25), cd(1.05, -0.4)};
  std::vector<ds::StepParams> steps;
  for (int k = 0; k < count; ++k) {
    ds::StepParams st;
    st.lambda_l = lam_l[k];
    st.lambda_lp = lam_p[k];
    st.a_l = a_l[k];
    st.b_l = cd{};
    st.f11 = f11s[k];
    st.f22 = f22s[k];
    st = ds::lock_step(seed, steps, st);
    // Fill the unused off-diagonal phase slots with a marker value so tests
    // can tell primed from unprimed readings.
    st.m2 = cd(0.31, -0.12);
    st.m1p = cd(0.31, -0.12);
    steps.push_back(st);
  }
  return steps;
}

inline double rel_diff(cd got, cd want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace ts
