#pragma once

#include <string>
#include <vector>

#include "ds/algebra.hpp"
#include "ds/backlund.hpp"
#include "ds/laxpair.hpp"

namespace ds {

// Rectangular evaluation window. Samples are vertex-centred: x(0) = x_min,
// x(nx-1) = x_max. Storage order everywhere is row-major with y as the outer
// index: flat index = iy * nx + ix.
struct GridSpec {
  double x_min = -5.0;
  double x_max = 5.0;
  double y_min = -5.0;
  double y_max = 5.0;
  int nx = 101;
  int ny = 101;
  double t = 0.0;

  void validate() const;
  double dx() const { return (x_max - x_min) / (nx - 1); }
  double dy() const { return (y_max - y_min) / (ny - 1); }
  double x(int ix) const { return x_min + ix * dx(); }
  double y(int iy) const { return y_min + iy * dy(); }
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) +
           static_cast<std::size_t>(ix);
  }
  std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
};

// Sampled solution: the two wave fields and the two mean-flow potentials.
struct FieldGrid {
  GridSpec grid;
  std::vector<cd> q, r, A1, A2;
};

// The trivial background: constant fields everywhere.
FieldGrid seed_fields(const SeedParams& seed, const GridSpec& grid);

// Fields after each dressing step, level 1 .. depth. Per point, the wave
// fields follow the transfer-matrix recursion
//   q_next = (-2 dQ12/dx + Q11 q) / Q22,
//   r_next = (-2 dQ21/dy + Q22 r) / Q11,
// with exact derivatives carried by the jet entries of Q. The potentials
// integrate their defining x/y slope relations by cumulative trapezoid along
// grid lines, anchored to the background level at the window edge; the slope
// integrands use centred grid differences of the wave fields (one-sided at
// the window boundary).
std::vector<FieldGrid> chain_fields(const ChainEvaluator& chain, const GridSpec& grid);

// Row-parallel evaluation honouring DS_THREADS (default: all cores).
int thread_count();

// Closed-form product expression for the top wave field of a diagonal-block
// chain. The reading flags pin the three ambiguous pieces of the formula;
// the defaults are the ones that reproduce the step-by-step recursion.
struct CompactFlags {
  bool slope_plus_im = true;           // envelope slope +i*m1 (vs -i*m1)
  bool primed_row_phase = true;        // second-row phases use the primed constants
  bool include_seed_background = true; // the n-fold product term carries the seed field
};

cd growth_delta_closed(const SeedParams& seed);
// Two-sample fit of the growth factor's time exponent from the per-entry
// transfer matrix evaluated at t = 0 and t = 0.1.
cd growth_delta_fit(const SeedParams& seed, const std::vector<StepParams>& steps);

cd compact_q(const SeedParams& seed, const std::vector<StepParams>& steps,
             std::size_t n, double x, double y, double t, cd delta,
             const CompactFlags& flags = {});

// CSV output: header then one row per sample, y-outer order, %.17g formatting,
// '\n' line endings. Deterministic bytes for identical inputs.
void write_csv(const FieldGrid& fg, const std::string& path);
FieldGrid read_csv(const std::string& path);

}  // namespace ds
