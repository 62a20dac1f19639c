#pragma once

#include <string>
#include <vector>

#include "ds/algebra.hpp"
#include "ds/backlund.hpp"
#include "ds/fields.hpp"
#include "ds/laxpair.hpp"

namespace ds {

// Outcome of one residual check, printable as a single report line.
struct ResidualReport {
  std::string name;
  double linf = 0.0;
  double l2 = 0.0;
  int grid_nx = 0;
  int grid_ny = 0;
  double tolerance_used = 0.0;
  bool pass = false;
  double worst_x = 0.0;
  double worst_y = 0.0;
  std::string to_line() const;
};

// Residuals of the coupled evolution system on the interior of the grid
// (margin 2), using centred second-order stencils in x and y and a centred
// difference in t built from the two companion time levels. The phase-shift
// diagnostic is the best-fit constant c* such that adding c*q to the first
// equation's residual minimises its mean square; it flags potential-level
// offsets and is reported, never applied.
struct DsResidual {
  ResidualReport q_eq;
  ResidualReport r_eq;
  cd phase_shift_diagnostic;
};
// margin counts excluded boundary layers in index space; raising it on a
// refined grid keeps the measured physical region fixed across resolutions.
DsResidual ds_residual(const FieldGrid& mid, const FieldGrid& minus,
                       const FieldGrid& plus, double h_t, double tol,
                       const std::string& label, int margin = 2);

// log2(coarse/fine) for residuals measured at spacing h and h/2.
double convergence_order(double coarse_linf, double fine_linf);

// Pointwise identity battery for one dressing step at one spectral value:
// two-sided inverse products, the four pole annihilation products, the rank
// defect of the pole residue, and exact evenness in the spectral parameter.
struct IdentityRates {
  double inv_left = 0.0;      // ||B(lam) Binv(lam) - I||_max
  double inv_right = 0.0;     // ||Binv(lam) B(lam) - I||_max
  double annihilation = 0.0;  // worst of the four products, relative
  double det_P = 0.0;         // |det P|
  double parity = 0.0;        // max entry |B(lam) - B(-lam)| (expect exact 0)
};
IdentityRates identity_suite(const StepParams& st, const StepMatrices& sm, cd lam);

// Worst relative deviation between the analytic first derivatives carried by
// the jets of phi and a fourth-order finite-difference estimate.
double jet_crosscheck(const PhiFunction& phi, double x, double y, double t, cd lam);

// Residual of the dressed first-order linear problem at one point: the
// level-k eigenfunction against the coefficient matrix built from the level-k
// fields of the transfer recursion and the level-k shifted constants.
Mat2 chain_lax_residual(const ChainEvaluator& chain, const ChainConstants& cc,
                        std::size_t level, double x, double y, double t, cd lam);

// Grid sweep of the above (margin 2), reported like any other residual.
ResidualReport chain_lax_grid(const ChainEvaluator& chain, const ChainConstants& cc,
                              std::size_t level, const GridSpec& grid, cd lam,
                              double tol, const std::string& name);

}  // namespace ds
