#include "ds/laxpair.hpp"

#include <cmath>

namespace ds {

namespace {
constexpr cd kI{0.0, 1.0};

cd inv_sq(cd lam) {
  if (std::abs(lam) < 1e-12) {
    throw ZeroLambda("spectral parameter too close to zero");
  }
  return cd(1.0) / (lam * lam);
}
}  // namespace

SeedParams SeedParams::consistent(cd q0, cd r0, cd m0, cd n0, cd alpha, cd beta, cd K, cd A0) {
  SeedParams s;
  s.q0 = q0;
  s.r0 = r0;
  s.m0 = m0;
  s.n0 = n0;
  s.alpha = alpha;
  s.beta = beta;
  s.K = K;
  s.a = -q0 / 2.0;
  s.b = -r0 / 2.0;
  s.A10 = A0;
  s.A20 = A0;
  auto xi = [&](cd c) { return kI * (K * K + s.a * s.a * c * c + s.b * s.b / (c * c) + A0); };
  s.xi1 = xi(m0);
  s.xi2 = xi(n0);
  s.validate();
  return s;
}

void SeedParams::validate() const {
  const double scale = std::abs(m0) + std::abs(n0);
  if (std::abs(m0) < 1e-12 || std::abs(n0) < 1e-12) {
    throw DegenerateSeed("branch constants m0, n0 must be nonzero");
  }
  if (std::abs(m0 - n0) <= 1e-12 * std::max(1.0, scale)) {
    throw DegenerateSeed("branch constants m0, n0 must be distinct");
  }
}

cd big_lambda(cd K, cd alpha, cd beta, cd lam) {
  const cd u = alpha + inv_sq(lam);
  const cd w = beta - inv_sq(lam);
  return K * K - u * u - w * w;
}

Mat2 build_U(cd q, cd r, cd alpha, cd beta, cd lam) {
  Mat2 U;
  U(0, 0) = -kI * (alpha + inv_sq(lam));
  U(0, 1) = -q / 2.0;
  U(1, 0) = -r / 2.0;
  U(1, 1) = kI * (beta - inv_sq(lam));
  return U;
}

cd gauge_factor(cd alpha, cd beta, cd lam, double x, double y) {
  return cexp_guarded(kI * (alpha + inv_sq(lam)) * x - kI * (beta - inv_sq(lam)) * y);
}

Mat2J seed_eigenfunction(const SeedParams& s, double x, double y, double t, cd lam) {
  const cd u = s.alpha + inv_sq(lam);
  const cd w = s.beta - inv_sq(lam);
  auto branch = [&](cd c, cd xi) {
    const cd theta = -kI * u + s.a * c;
    const cd chi = s.b / c + kI * w;
    const Jet expo(theta * x + chi * y + xi * t, theta, chi);
    return jexp(expo);
  };
  const Jet E1 = branch(s.m0, s.xi1);
  const Jet E2 = branch(s.n0, s.xi2);
  Mat2J out;
  out(0, 0) = E1;
  out(0, 1) = E2;
  out(1, 0) = E1 * Jet(s.m0);
  out(1, 1) = E2 * Jet(s.n0);
  return out;
}

Mat2 spatial_lax_residual(const Mat2J& phi, const Mat2& U) {
  Mat2 res;
  for (int j = 0; j < 2; ++j) {
    res(0, j) = phi(0, j).dx - (U(0, 0) * phi(0, j).v + U(0, 1) * phi(1, j).v);
    res(1, j) = phi(1, j).dy - (U(1, 0) * phi(0, j).v + U(1, 1) * phi(1, j).v);
  }
  return res;
}

Mat2 apply_time_operator(const TimeOperand& op, cd lam, cd alpha, cd beta, cd K,
                         cd A1, cd A2, cd q_x, cd r_y) {
  const cd u = alpha + inv_sq(lam);
  const cd w = beta - inv_sq(lam);
  const cd Lam = K * K - u * u - w * w;
  Mat2 out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const Jet& p = op.phi(i, j);
      cd val = kI * Lam * p.v + kI * (op.phi_xx(i, j) + op.phi_yy(i, j)) -
               2.0 * (u * p.dx - w * p.dy);
      if (i == 0) {
        val += kI * A1 * op.phi(0, j).v + kI * q_x * op.phi(1, j).v;
      } else {
        val += kI * r_y * op.phi(0, j).v + kI * A2 * op.phi(1, j).v;
      }
      out(i, j) = val;
    }
  }
  return out;
}

Mat2 time_lax_residual(const PhiFunction& phi, double x, double y, double t, cd lam,
                       cd alpha, cd beta, cd K, cd A1, cd A2, cd q_x, cd r_y,
                       double h_t, double h) {
  TimeOperand op;
  op.phi = phi(x, y, t, lam);
  const Mat2J xp = phi(x + h, y, t, lam);
  const Mat2J xm = phi(x - h, y, t, lam);
  const Mat2J yp = phi(x, y + h, t, lam);
  const Mat2J ym = phi(x, y - h, t, lam);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      op.phi_xx(i, j) = (xp(i, j).dx - xm(i, j).dx) / (2.0 * h);
      op.phi_yy(i, j) = (yp(i, j).dy - ym(i, j).dy) / (2.0 * h);
    }
  }
  const Mat2J tp = phi(x, y, t + h_t, lam);
  const Mat2J tm = phi(x, y, t - h_t, lam);
  const Mat2 v = apply_time_operator(op, lam, alpha, beta, K, A1, A2, q_x, r_y);
  Mat2 res;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      res(i, j) = (tp(i, j).v - tm(i, j).v) / (2.0 * h_t) - v(i, j);
  return res;
}

}  // namespace ds
