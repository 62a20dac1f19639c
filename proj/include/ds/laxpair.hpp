#pragma once

#include <functional>

#include "ds/algebra.hpp"

namespace ds {

// Parameters of the background (zero-step) solution and its 2x2 linear
// problem. The two exponential branches are indexed by the constants m0, n0;
// a and b couple the branches to the background potentials, and xi1, xi2 are
// the branch time rates. A10, A20 are the background auxiliary potential
// levels, also used to anchor the quadrature that reconstructs them after
// dressing steps.
struct SeedParams {
  cd q0, r0;
  cd m0, n0;
  cd a, b;
  cd alpha, beta;
  cd K;
  cd xi1, xi2;
  cd A10, A20;

  // Builds a parameter set on which the background identities hold exactly:
  // a = -q0/2, b = -r0/2, equal potential levels, and branch time rates
  // xi_j = i (K^2 + a^2 c_j^2 + b^2 / c_j^2 + A0) with c_1 = m0, c_2 = n0.
  static SeedParams consistent(cd q0, cd r0, cd m0, cd n0, cd alpha, cd beta, cd K, cd A0);

  void validate() const;  // throws DegenerateSeed
};

// Spectral scalar K^2 - (alpha + lam^-2)^2 - (beta - lam^-2)^2.
cd big_lambda(cd K, cd alpha, cd beta, cd lam);

// Coefficient matrix of the first-order spatial system: row 1 is the d/dx
// component, row 2 the d/dy component.
Mat2 build_U(cd q, cd r, cd alpha, cd beta, cd lam);

// Scalar phase exp(i (alpha + lam^-2) x - i (beta - lam^-2) y).
cd gauge_factor(cd alpha, cd beta, cd lam, double x, double y);

// Background 2x2 eigenfunction with exact first-order jets in x, y.
Mat2J seed_eigenfunction(const SeedParams& s, double x, double y, double t, cd lam);

// Residual of the spatial system for a candidate eigenfunction with analytic
// jets: entry (i,j) is (d/dx or d/dy) Phi_ij - (U Phi)_ij.
Mat2 spatial_lax_residual(const Mat2J& phi, const Mat2& U);

// Data needed to apply the time evolution operator at one point: the entry
// jets plus finite-difference estimates of the second spatial derivatives.
struct TimeOperand {
  Mat2J phi;
  Mat2 phi_xx;
  Mat2 phi_yy;
};

// Applies the time evolution operator:
//   i Lam * Phi + i (Phi_xx + Phi_yy) - 2 [ (alpha + lam^-2) Phi_x - (beta - lam^-2) Phi_y ]
//   + row 1: i A1 Phi_1j + i q_x Phi_2j ; row 2: i r_y Phi_1j + i A2 Phi_2j.
Mat2 apply_time_operator(const TimeOperand& op, cd lam, cd alpha, cd beta, cd K,
                         cd A1, cd A2, cd q_x, cd r_y);

using PhiFunction = std::function<Mat2J(double x, double y, double t, cd lam)>;

// d/dt Phi - V Phi with d/dt and the second spatial derivatives estimated by
// central differences (steps h_t and h) and first derivatives analytic.
Mat2 time_lax_residual(const PhiFunction& phi, double x, double y, double t, cd lam,
                       cd alpha, cd beta, cd K, cd A1, cd A2, cd q_x, cd r_y,
                       double h_t, double h);

// Finite-difference steps shared by every differencing site.
inline double fd_step_spatial(double x) { return 1e-3 * (1.0 + std::abs(x)); }
inline constexpr double kFdStepTime = 1e-3;

}  // namespace ds
