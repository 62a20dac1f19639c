#include "ds/verify.hpp"

#include <cmath>
#include <cstdio>

#include "ds/errors.hpp"

namespace ds {

namespace {
constexpr cd kI{0.0, 1.0};
constexpr int kMargin = 2;
}  // namespace

std::string ResidualReport::to_line() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%-32s linf=%.6e l2=%.6e grid=%dx%d tol=%.1e worst=(%.6g,%.6g) %s",
                name.c_str(), linf, l2, grid_nx, grid_ny, tolerance_used, worst_x,
                worst_y, pass ? "PASS" : "FAIL");
  return std::string(buf);
}

DsResidual ds_residual(const FieldGrid& mid, const FieldGrid& minus,
                       const FieldGrid& plus, double h_t, double tol,
                       const std::string& label, int margin) {
  const GridSpec& g = mid.grid;
  g.validate();
  if (minus.grid.nx != g.nx || minus.grid.ny != g.ny || plus.grid.nx != g.nx ||
      plus.grid.ny != g.ny) {
    throw ConfigError("time-level grids must share the spatial sampling");
  }
  if (margin < 1) {
    throw ConfigError("stencil margin must be at least 1");
  }
  const double hx = g.dx();
  const double hy = g.dy();
  DsResidual out;
  out.q_eq.name = label + ".q";
  out.r_eq.name = label + ".r";
  out.q_eq.grid_nx = out.r_eq.grid_nx = g.nx;
  out.q_eq.grid_ny = out.r_eq.grid_ny = g.ny;
  out.q_eq.tolerance_used = out.r_eq.tolerance_used = tol;

  double sum_q = 0.0, sum_r = 0.0;
  cd proj_num{}, proj_den{};
  std::size_t count = 0;
  for (int iy = margin; iy < g.ny - margin; ++iy)
    for (int ix = margin; ix < g.nx - margin; ++ix) {
      const std::size_t c = g.index(ix, iy);
      const std::size_t xm = g.index(ix - 1, iy), xp = g.index(ix + 1, iy);
      const std::size_t ym = g.index(ix, iy - 1), yp = g.index(ix, iy + 1);

      const cd q_t = (plus.q[c] - minus.q[c]) / (2.0 * h_t);
      const cd q_xx = (mid.q[xm] - 2.0 * mid.q[c] + mid.q[xp]) / (hx * hx);
      const cd q_yy = (mid.q[ym] - 2.0 * mid.q[c] + mid.q[yp]) / (hy * hy);
      const cd res_q = kI * q_t + q_yy - q_xx + mid.q[c] * (mid.A1[c] - mid.A2[c]);

      const cd r_t = (plus.r[c] - minus.r[c]) / (2.0 * h_t);
      const cd r_xx = (mid.r[xm] - 2.0 * mid.r[c] + mid.r[xp]) / (hx * hx);
      const cd r_yy = (mid.r[ym] - 2.0 * mid.r[c] + mid.r[yp]) / (hy * hy);
      const cd res_r = kI * r_t + r_xx - r_yy + mid.r[c] * (mid.A2[c] - mid.A1[c]);

      const double aq = std::abs(res_q);
      const double ar = std::abs(res_r);
      if (aq > out.q_eq.linf) {
        out.q_eq.linf = aq;
        out.q_eq.worst_x = g.x(ix);
        out.q_eq.worst_y = g.y(iy);
      }
      if (ar > out.r_eq.linf) {
        out.r_eq.linf = ar;
        out.r_eq.worst_x = g.x(ix);
        out.r_eq.worst_y = g.y(iy);
      }
      sum_q += aq * aq;
      sum_r += ar * ar;
      proj_num += std::conj(mid.q[c]) * res_q;
      proj_den += std::conj(mid.q[c]) * mid.q[c];
      ++count;
    }
  if (count == 0) {
    throw GridTooSmall("no interior points left after the stencil margin");
  }
  out.q_eq.l2 = std::sqrt(sum_q / static_cast<double>(count));
  out.r_eq.l2 = std::sqrt(sum_r / static_cast<double>(count));
  out.q_eq.pass = out.q_eq.linf <= tol;
  out.r_eq.pass = out.r_eq.linf <= tol;
  out.phase_shift_diagnostic =
      std::abs(proj_den) > 0.0 ? cd(-proj_num / proj_den) : cd{};
  return out;
}

double convergence_order(double coarse_linf, double fine_linf) {
  if (!(coarse_linf > 0.0) || !(fine_linf > 0.0)) return 0.0;
  return std::log2(coarse_linf / fine_linf);
}

namespace {

double max_entry(const Mat2& m) {
  double worst = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) worst = std::max(worst, std::abs(m(i, j)));
  return worst;
}

}  // namespace

IdentityRates identity_suite(const StepParams& st, const StepMatrices& sm, cd lam) {
  IdentityRates out;
  const StepInverse si = bt_inverse(sm, st);
  const Mat2 B = bt_matrix_value(sm, st, lam);
  const Mat2 Binv = bt_inverse_matrix_value(si, st, lam);
  const Mat2 I = Mat2::Identity();
  out.inv_left = max_entry(Mat2(B * Binv - I));
  out.inv_right = max_entry(Mat2(Binv * B - I));

  const Mat2 P = values(sm.P);
  const Mat2 Pp = values(si.Pp);
  const Mat2 Binv_at_pole = bt_inverse_matrix_value(si, st, st.lambda_l);
  const Mat2 B_at_primed = bt_matrix_value(sm, st, st.lambda_lp);
  const double np = P.cwiseAbs().maxCoeff();
  const double npp = Pp.cwiseAbs().maxCoeff();
  const double nbi = Binv_at_pole.cwiseAbs().maxCoeff();
  const double nbp = B_at_primed.cwiseAbs().maxCoeff();
  const double a1 = max_entry(Mat2(P * Binv_at_pole)) / std::max(np * nbi, 1e-300);
  const double a2 = max_entry(Mat2(Binv_at_pole * P)) / std::max(np * nbi, 1e-300);
  const double a3 = max_entry(Mat2(B_at_primed * Pp)) / std::max(npp * nbp, 1e-300);
  const double a4 = max_entry(Mat2(Pp * B_at_primed)) / std::max(npp * nbp, 1e-300);
  out.annihilation = std::max(std::max(a1, a2), std::max(a3, a4));

  out.det_P = std::abs(det2(P));
  out.parity = max_entry(Mat2(B - bt_matrix_value(sm, st, -lam)));
  return out;
}

double jet_crosscheck(const PhiFunction& phi, double x, double y, double t, cd lam) {
  const Mat2J at = phi(x, y, t, lam);
  const double hx = fd_step_spatial(x);
  const double hy = fd_step_spatial(y);
  const Mat2 xp1 = values(phi(x + hx, y, t, lam));
  const Mat2 xm1 = values(phi(x - hx, y, t, lam));
  const Mat2 xp2 = values(phi(x + 2.0 * hx, y, t, lam));
  const Mat2 xm2 = values(phi(x - 2.0 * hx, y, t, lam));
  const Mat2 yp1 = values(phi(x, y + hy, t, lam));
  const Mat2 ym1 = values(phi(x, y - hy, t, lam));
  const Mat2 yp2 = values(phi(x, y + 2.0 * hy, t, lam));
  const Mat2 ym2 = values(phi(x, y - 2.0 * hy, t, lam));
  const Mat2 fd_x = (-xp2 + 8.0 * xp1 - 8.0 * xm1 + xm2) / (12.0 * hx);
  const Mat2 fd_y = (-yp2 + 8.0 * yp1 - 8.0 * ym1 + ym2) / (12.0 * hy);
  double worst = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double sx = std::max(std::abs(at(i, j).dx), 1.0);
      const double sy = std::max(std::abs(at(i, j).dy), 1.0);
      worst = std::max(worst, std::abs(at(i, j).dx - fd_x(i, j)) / sx);
      worst = std::max(worst, std::abs(at(i, j).dy - fd_y(i, j)) / sy);
    }
  return worst;
}

Mat2 chain_lax_residual(const ChainEvaluator& chain, const ChainConstants& cc,
                        std::size_t level, double x, double y, double t, cd lam) {
  if (level == 0 || level > chain.depth()) {
    throw ConfigError("chain residual level must lie in [1, depth]");
  }
  if (cc.alpha.size() <= level || cc.beta.size() <= level) {
    throw ConfigError("chain constants are shorter than the requested level");
  }
  const Mat2J phi = chain.evaluate_depth(x, y, t, lam, level);
  const std::vector<StepMatrices> qp = chain.step_matrices(x, y, t);
  cd q = chain.seed().q0;
  cd r = chain.seed().r0;
  for (std::size_t l = 0; l < level; ++l) {
    const cd qn = (-2.0 * qp[l].Q(0, 1).dx + qp[l].Q(0, 0).v * q) / qp[l].Q(1, 1).v;
    const cd rn = (-2.0 * qp[l].Q(1, 0).dy + qp[l].Q(1, 1).v * r) / qp[l].Q(0, 0).v;
    q = qn;
    r = rn;
  }
  const Mat2 U = build_U(q, r, cc.alpha[level], cc.beta[level], lam);
  return spatial_lax_residual(phi, U);
}

ResidualReport chain_lax_grid(const ChainEvaluator& chain, const ChainConstants& cc,
                              std::size_t level, const GridSpec& grid, cd lam,
                              double tol, const std::string& name) {
  grid.validate();
  ResidualReport rep;
  rep.name = name;
  rep.grid_nx = grid.nx;
  rep.grid_ny = grid.ny;
  rep.tolerance_used = tol;
  double sum = 0.0;
  std::size_t count = 0;
  for (int iy = kMargin; iy < grid.ny - kMargin; ++iy)
    for (int ix = kMargin; ix < grid.nx - kMargin; ++ix) {
      const double x = grid.x(ix);
      const double y = grid.y(iy);
      const Mat2 res = chain_lax_residual(chain, cc, level, x, y, grid.t, lam);
      const double m = max_entry(res);
      if (m > rep.linf) {
        rep.linf = m;
        rep.worst_x = x;
        rep.worst_y = y;
      }
      sum += m * m;
      ++count;
    }
  if (count == 0) {
    throw GridTooSmall("no interior points left after the stencil margin");
  }
  rep.l2 = std::sqrt(sum / static_cast<double>(count));
  rep.pass = rep.linf <= tol;
  return rep;
}

}  // namespace ds
