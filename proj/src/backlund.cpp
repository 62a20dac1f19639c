#include "ds/backlund.hpp"

#include <cmath>
#include <map>
#include <utility>

namespace ds {

namespace {
constexpr cd kI{0.0, 1.0};

void check_pole_distance(const StepParams& st, cd lam) {
  const cd l2 = st.lambda_l * st.lambda_l;
  if (std::abs(lam * lam - l2) < kPoleRelTol * std::abs(l2)) {
    throw OnPole("evaluation too close to the step pole");
  }
}

void check_primed_distance(const StepParams& st, cd lam) {
  const cd lp2 = st.lambda_lp * st.lambda_lp;
  if (std::abs(lam * lam - lp2) < kPoleRelTol * std::abs(lp2)) {
    throw OnPole("evaluation too close to the inverse pole");
  }
}

Jet phase_entry(cd f, cd m, cd nu, double x, double y, double t) {
  const Jet expo(kI * m * (x - y) + kI * nu * t, kI * m, -kI * m);
  return jexp(expo) * Jet(f);
}
}  // namespace

void StepParams::validate() const {
  if (std::abs(lambda_l) < 1e-12 || std::abs(lambda_lp) < 1e-12) {
    throw DegeneratePoles("step spectral parameters must be nonzero");
  }
  const cd d = lambda_lp * lambda_lp - lambda_l * lambda_l;
  const double scale = std::abs(lambda_l * lambda_l) + std::abs(lambda_lp * lambda_lp);
  if (std::abs(d) <= 1e-10 * std::max(1.0, scale)) {
    throw DegeneratePoles("step spectral parameters must have distinct squares");
  }
  const double fnorm = std::abs(f11) + std::abs(f12) + std::abs(f21) + std::abs(f22);
  if (fnorm < 1e-12) {
    throw ConfigError("f-block must be nonzero");
  }
}

cd sigma_a(const StepParams& st) {
  const cd l = st.lambda_l, lp = st.lambda_lp;
  return 2.0 * lp * lp / (l * (lp * lp - l * l));
}

cd sigma_b(const StepParams& st) {
  const cd l = st.lambda_l, lp = st.lambda_lp;
  return -2.0 * lp * lp / (l * (l * l - lp * lp));
}

cd epsilon_prime(const StepParams& st) {
  const cd l = st.lambda_l, lp = st.lambda_lp;
  return 2.0 * lp / (l * l - lp * lp);
}

Mat2J f_block(const StepParams& st, double x, double y, double t) {
  Mat2J F;
  F(0, 0) = phase_entry(st.f11, st.m1, st.nu1, x, y, t);
  F(0, 1) = phase_entry(st.f12, st.m1p, st.nu1, x, y, t);
  F(1, 0) = phase_entry(st.f21, st.m2, st.nu2, x, y, t);
  F(1, 1) = phase_entry(st.f22, st.m2p, st.nu2, x, y, t);
  return F;
}

StepMatrices build_QP(const StepParams& st, const Mat2J& phi_pole,
                      const Mat2J& phi_primed, double x, double y, double t) {
  return build_QP_w(st, phi_pole, phi_primed, x, y, t, Vec2(st.a_l, st.b_l));
}

StepMatrices build_QP_w(const StepParams& st, const Mat2J& phi_pole,
                        const Mat2J& phi_primed, double x, double y, double t,
                        const Vec2& w) {
  st.validate();
  const Mat2J F = f_block(st, x, y, t);
  const Mat2J phi_inv = inv2(phi_pole);
  Vec2J row;  // (a_l, b_l) Phi_prev(lambda_l)^{-1}
  for (int j = 0; j < 2; ++j) {
    row(j) = Jet(st.a_l) * phi_inv(0, j) + Jet(st.b_l) * phi_inv(1, j);
  }
  Vec2J col;  // F * Phi_prev(lambda_lp) * w
  for (int i = 0; i < 2; ++i) {
    const Jet phip_i = phi_primed(i, 0) * Jet(w(0)) + phi_primed(i, 1) * Jet(w(1));
    col(i) = phip_i;
  }
  Vec2J fcol;
  for (int i = 0; i < 2; ++i) {
    fcol(i) = F(i, 0) * col(0) + F(i, 1) * col(1);
  }
  const Jet pairing = row(0) * col(0) + row(1) * col(1);
  const double scale = mag(row(0)) * mag(col(0)) + mag(row(1)) * mag(col(1));
  if (mag(pairing) <= 1e-12 * std::max(1.0, scale)) {
    throw VanishingDenominator("row/column pairing vanishes at this point");
  }
  const cd neg_inv_sigma = -1.0 / sigma_a(st);
  StepMatrices out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      out.P(i, j) = Jet(neg_inv_sigma) * fcol(i) * row(j) / pairing;
      out.Q(i, j) = F(i, j) + Jet(2.0 / st.lambda_l) * out.P(i, j);
    }
  return out;
}

StepMatrices entrywise_QP(const StepParams& st, const Mat2J& phi_pole,
                          double x, double y, double t) {
  st.validate();
  const Mat2J F = f_block(st, x, y, t);
  // Column (F_l, F'_l) = F (a_l, b_l)^T, row (Phi22, -Phi21) / D.
  Vec2J col;
  for (int i = 0; i < 2; ++i) {
    col(i) = F(i, 0) * Jet(st.a_l) + F(i, 1) * Jet(st.b_l);
  }
  Vec2J row;
  row(0) = phi_pole(1, 1);
  row(1) = -phi_pole(1, 0);
  const Jet D = Jet(st.a_l) * phi_pole(1, 1) - Jet(st.b_l) * phi_pole(1, 0);
  const double dscale = std::abs(st.a_l) * mag(phi_pole(1, 1)) +
                        std::abs(st.b_l) * mag(phi_pole(1, 0));
  if (mag(D) <= 1e-12 * std::max(1.0, dscale)) {
    throw VanishingDenominator("entrywise denominator vanishes at this point");
  }
  const cd neg_inv_sigma = -1.0 / sigma_a(st);
  StepMatrices out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      out.P(i, j) = Jet(neg_inv_sigma) * col(i) * row(j) / D;
      out.Q(i, j) = F(i, j) + Jet(2.0 / st.lambda_l) * out.P(i, j);
    }
  return out;
}

Mat2J entrywise_Q_direct(const StepParams& st, const Mat2J& phi_pole,
                         double x, double y, double t, EntryPhase phase) {
  st.validate();
  const cd l2 = st.lambda_l * st.lambda_l;
  const cd lp2 = st.lambda_lp * st.lambda_lp;
  const Jet E11 = phase_entry(st.f11, st.m1, st.nu1, x, y, t);
  const Jet E12 = phase_entry(st.f12, st.m1p, st.nu1, x, y, t);
  const Jet E21 = phase_entry(st.f21, st.m2, st.nu2, x, y, t);
  const Jet E22 = phase_entry(st.f22, st.m2p, st.nu2, x, y, t);
  // The two variants differ only in the phase carried by the last diagonal
  // term: the self-consistent one reuses m2p, the alternative uses m2.
  const Jet E22n = phase == EntryPhase::consistent
                       ? E22
                       : phase_entry(st.f22, st.m2, st.nu2, x, y, t);
  const cd al = st.a_l, bl = st.b_l;
  const Jet R = E11 * Jet(-bl);
  const Jet Rp = E11 * Jet(l2 / lp2 * al) + E12 * Jet((l2 - lp2) / lp2 * bl);
  const Jet M = E11 * Jet(-(l2 - lp2) / lp2 * al) + E12 * Jet(-l2 / lp2 * bl);
  const Jet Mp = E12 * Jet(al);
  const Jet L = E21 * Jet(-bl);
  const Jet Lp = E21 * Jet(l2 / lp2 * al) + E22 * Jet((l2 - lp2) / lp2 * bl);
  const Jet N = E21 * Jet(-(l2 - lp2) / lp2 * al) + E22 * Jet(-l2 / lp2 * bl);
  const Jet Np = E22n * Jet(al);
  const Jet p21 = phi_pole(1, 0);
  const Jet p22 = phi_pole(1, 1);
  const Jet D = Jet(al) * p22 - Jet(bl) * p21;
  Mat2J Q;
  Q(0, 0) = (R * p21 + Rp * p22) / D;
  Q(0, 1) = (M * p21 + Mp * p22) / D;
  Q(1, 0) = (L * p21 + Lp * p22) / D;
  Q(1, 1) = (N * p21 + Np * p22) / D;
  return Q;
}

Mat2J bt_matrix(const StepMatrices& sm, const StepParams& st, cd lam) {
  check_pole_distance(st, lam);
  const cd pole = 2.0 * st.lambda_l / (lam * lam - st.lambda_l * st.lambda_l);
  Mat2J B;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) B(i, j) = sm.Q(i, j) + Jet(pole) * sm.P(i, j);
  return B;
}

Mat2 bt_matrix_value(const StepMatrices& sm, const StepParams& st, cd lam) {
  return values(bt_matrix(sm, st, lam));
}

StepInverse bt_inverse(const StepMatrices& sm, const StepParams& st) {
  const cd l2 = st.lambda_l * st.lambda_l;
  const cd lp2 = st.lambda_lp * st.lambda_lp;
  const Mat2J adjQ = adj2(sm.Q);
  const Mat2J adjP = adj2(sm.P);
  const Jet detQ = det2(sm.Q);
  if (mag(detQ) <= kSingularRelTol * std::max(1.0, frob2(sm.Q) * frob2(sm.Q))) {
    throw SingularMatrix("step matrix constant part is singular");
  }
  StepInverse out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      out.Qp(i, j) = adjQ(i, j) / detQ;
      out.Pp(i, j) = (Jet(lp2 - l2) * adjQ(i, j) + Jet(2.0 * st.lambda_l) * adjP(i, j)) /
                     (Jet(2.0 * st.lambda_lp) * detQ);
    }
  return out;
}

Mat2J bt_inverse_matrix(const StepInverse& si, const StepParams& st, cd lam) {
  check_primed_distance(st, lam);
  const cd pole = 2.0 * st.lambda_lp / (lam * lam - st.lambda_lp * st.lambda_lp);
  Mat2J B;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) B(i, j) = si.Qp(i, j) + Jet(pole) * si.Pp(i, j);
  return B;
}

Mat2 bt_inverse_matrix_value(const StepInverse& si, const StepParams& st, cd lam) {
  return values(bt_inverse_matrix(si, st, lam));
}

OracleResult solve_QP_oracle(const StepParams& st, const Mat2J& phi_pole,
                             const Mat2J& phi_primed, double x, double y, double t,
                             RowGauge gauge) {
  st.validate();
  const Mat2 F = values(f_block(st, x, y, t));
  const Mat2 pole_mat = values(phi_pole);

  // Gauge data: the pole column direction u and row direction rho.
  Vec2 u, rho;
  if (gauge == RowGauge::kernel) {
    const Mat2 primed = values(phi_primed);
    const Vec2 w(st.a_l, st.b_l);
    u = F * (primed * w);
    const Mat2 inv_pole = inv2(pole_mat);
    rho = (inv_pole.transpose() * Vec2(st.a_l, st.b_l));
  } else {
    u = F * Vec2(st.a_l, st.b_l);
    rho = Vec2(pole_mat(1, 1), -pole_mat(1, 0));
  }

  // Scale from pole placement: with B = F + c(lam) u xi^T and
  // c(lam) = 2 lam^2 / (lambda_l (lam^2 - lambda_l^2)), the matrix
  // determinant lemma gives det B(lam) = det F (1 + c(lam) xi^T F^{-1} u);
  // requiring the zero at lambda_lp fixes s = xi^T F^{-1} u.
  const cd l = st.lambda_l;
  const cd lp2 = st.lambda_lp * st.lambda_lp;
  const cd c_at_primed = 2.0 * lp2 / (l * (lp2 - l * l));
  const cd s = -1.0 / c_at_primed;
  const Mat2 F_inv = inv2(F);
  // Unconjugated bilinear pairing (Eigen's dot() would conjugate rho).
  const Vec2 Finv_u = F_inv * u;
  const cd pairing = rho(0) * Finv_u(0) + rho(1) * Finv_u(1);
  if (std::abs(pairing) <= 1e-12 * std::max(1.0, u.cwiseAbs().sum() * rho.cwiseAbs().sum())) {
    throw IllConditioned("oracle gauge pairing vanishes");
  }
  const cd scale = s / pairing;

  OracleResult res;
  res.P = scale * (u * rho.transpose());
  res.Q = F + (2.0 / l) * res.P;

  // Inverse data by sampling: B^{-1}(lam) = Q' + g(lam) P' with
  // g(lam) = 2 lambda_lp / (lam^2 - lambda_lp^2); two generic samples separate
  // the constant and pole parts exactly.
  const cd lamA = st.lambda_l * cd(1.7, 0.31) + cd(0.29, -0.12);
  const cd lamB = st.lambda_lp * cd(0.37, 1.21) + cd(-0.41, 0.23);
  auto B_at = [&](cd lam) {
    const cd c = 2.0 * lam * lam / (l * (lam * lam - l * l));
    return Mat2(F + c * scale * (u * rho.transpose()));
  };
  auto g_at = [&](cd lam) { return 2.0 * st.lambda_lp / (lam * lam - lp2); };
  const Mat2 XA = inv2(Mat2(B_at(lamA)));
  const Mat2 XB = inv2(Mat2(B_at(lamB)));
  const cd gA = g_at(lamA), gB = g_at(lamB);
  const cd dg = gA - gB;
  res.cond = (std::abs(gA) + std::abs(gB)) / std::max(std::abs(dg), 1e-300);
  if (std::abs(dg) <= 1e-10 * (std::abs(gA) + std::abs(gB)) || res.cond > 1e10) {
    throw IllConditioned("oracle sample separation is degenerate");
  }
  res.Pp = (XA - XB) / dg;
  res.Qp = XA - gA * res.Pp;
  return res;
}

cd closed_form_phi11(const StepParams& st, const Mat2J& phi_pole,
                     const Mat2& phi_at_lam, cd lam, double x, double y, double t,
                     Phi11Denominator denom) {
  st.validate();
  check_pole_distance(st, lam);
  const cd l2 = st.lambda_l * st.lambda_l;
  const cd lp2 = st.lambda_lp * st.lambda_lp;
  const cd z = x - y;
  auto E = [&](cd f, cd m, cd nu) { return f * cexp_guarded(kI * m * z + kI * nu * t); };
  const cd e11 = E(st.f11, st.m1, st.nu1);
  const cd e12 = E(st.f12, st.m1p, st.nu1);
  const cd al = st.a_l, bl = st.b_l;
  const cd R = -bl * e11;
  const cd Rp = (l2 * al * e11 + (l2 - lp2) * bl * e12) / lp2;
  const cd M = (-(l2 - lp2) * al * e11 - l2 * bl * e12) / lp2;
  const cd Mp = al * e12;
  const cd Fc = al * e11 + bl * e12;
  const cd flam = 2.0 * st.lambda_l / (sigma_a(st) * (lam * lam - l2));
  const cd p21 = phi_pole(1, 0).v;
  const cd p22 = phi_pole(1, 1).v;
  const cd num = R * p21 * phi_at_lam(0, 0) + (Rp - flam * Fc) * p22 * phi_at_lam(0, 0) +
                 (M + flam * Fc) * p21 * phi_at_lam(1, 0) + Mp * p22 * phi_at_lam(1, 0);
  const cd D = denom == Phi11Denominator::a22_minus_b21 ? (al * p22 - bl * p21)
                                                        : (al * p21 - bl * p22);
  if (std::abs(D) <= 1e-12 * std::max(1.0, std::abs(p21) + std::abs(p22))) {
    throw VanishingDenominator("closed-form denominator vanishes at this point");
  }
  return num / D;
}

LockTargets lock_targets(const SeedParams& seed, const std::vector<StepParams>& prior) {
  // Each prior step contributes its realized row phase constants (m1 + m2p)
  // and its own target to the running sums; the next target balances both.
  cd sum_m{}, sum_Ta{}, sum_Tb{};
  for (std::size_t k = 0; k < prior.size(); ++k) {
    LockTargets tk;
    tk.Ta = -(seed.a * (seed.m0 + seed.n0) + kI * sum_m + 2.0 * sum_Ta);
    tk.Tb = (seed.b * (1.0 / seed.m0 + 1.0 / seed.n0) - kI * sum_m - 2.0 * sum_Tb);
    sum_m += prior[k].m1 + prior[k].m2p;
    sum_Ta += tk.Ta;
    sum_Tb += tk.Tb;
  }
  LockTargets out;
  out.Ta = -(seed.a * (seed.m0 + seed.n0) + kI * sum_m + 2.0 * sum_Ta);
  out.Tb = (seed.b * (1.0 / seed.m0 + 1.0 / seed.n0) - kI * sum_m - 2.0 * sum_Tb);
  return out;
}

StepParams lock_step(const SeedParams& seed, const std::vector<StepParams>& prior,
                     StepParams proto) {
  const cd a = seed.a, b = seed.b, m0 = seed.m0, n0 = seed.n0;
  if (prior.empty()) {
    // Closed-form lock for a general invertible f-block.
    const cd detf = proto.f11 * proto.f22 - proto.f12 * proto.f21;
    if (std::abs(detf) <= 1e-12) {
      throw ConfigError("lock requires an invertible f-block");
    }
    proto.m1 = -kI * a *
               ((m0 + n0) * proto.f11 * proto.f22 + proto.f11 * proto.f21 +
                m0 * n0 * proto.f12 * proto.f22) /
               detf;
    proto.m2p = kI * b *
                ((1.0 / m0 + 1.0 / n0) * proto.f22 * proto.f11 + proto.f22 * proto.f12 +
                 proto.f21 * proto.f11 / (m0 * n0)) /
                detf;
  } else {
    const double offdiag = std::abs(proto.f12) + std::abs(proto.f21);
    if (offdiag > 1e-12) {
      throw ConfigError("locking a step after the first requires a diagonal f-block");
    }
    const LockTargets tg = lock_targets(seed, prior);
    proto.m1 = kI * tg.Ta;
    proto.m2p = kI * tg.Tb;
  }
  proto.m1p = proto.m1;
  proto.m2 = proto.m2p;
  return proto;
}

ChainConstants chain_constants(const SeedParams& seed, const std::vector<StepParams>& steps) {
  ChainConstants out;
  out.alpha.push_back(seed.alpha);
  out.beta.push_back(seed.beta);
  std::vector<StepParams> prior;
  for (const StepParams& st : steps) {
    const LockTargets tg = lock_targets(seed, prior);
    out.targets.push_back(tg);
    out.alpha.push_back(out.alpha.back() - kI * tg.Ta);
    out.beta.push_back(out.beta.back() - kI * tg.Tb);
    prior.push_back(st);
  }
  return out;
}

Mat2J apply_step(const StepMatrices& sm, const StepParams& st, cd lam, const Mat2J& phi_prev) {
  const Mat2J B = bt_matrix(sm, st, lam);
  Mat2J out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      out(i, j) = B(i, 0) * phi_prev(0, j) + B(i, 1) * phi_prev(1, j);
    }
  return out;
}

ChainEvaluator::ChainEvaluator(SeedParams seed, std::vector<StepParams> steps, StepForm form)
    : seed_(std::move(seed)), steps_(std::move(steps)), form_(form) {
  seed_.validate();
  if (steps_.size() > kMaxDepth) {
    throw DepthExceeded("chain depth exceeds the supported maximum of 8");
  }
  for (const StepParams& st : steps_) st.validate();
}

namespace {

struct ChainMemo {
  const SeedParams& seed;
  const std::vector<StepParams>& steps;
  StepForm form;
  double x, y, t;
  std::map<std::pair<std::size_t, std::pair<double, double>>, Mat2J> phi_cache;
  std::vector<StepMatrices> qp;
  std::vector<bool> qp_ready;

  ChainMemo(const SeedParams& s, const std::vector<StepParams>& st, StepForm f,
            double x_, double y_, double t_)
      : seed(s), steps(st), form(f), x(x_), y(y_), t(t_), qp(st.size()),
        qp_ready(st.size(), false) {}

  const StepMatrices& step_qp(std::size_t k) {
    if (!qp_ready[k]) {
      const Mat2J phi_pole = phi(k, steps[k].lambda_l);
      if (form == StepForm::kernel) {
        const Mat2J phi_primed = phi(k, steps[k].lambda_lp);
        qp[k] = build_QP(steps[k], phi_pole, phi_primed, x, y, t);
      } else {
        qp[k] = entrywise_QP(steps[k], phi_pole, x, y, t);
      }
      qp_ready[k] = true;
    }
    return qp[k];
  }

  Mat2J phi(std::size_t depth, cd lam) {
    const auto key = std::make_pair(depth, std::make_pair(lam.real(), lam.imag()));
    auto it = phi_cache.find(key);
    if (it != phi_cache.end()) return it->second;
    Mat2J out;
    if (depth == 0) {
      out = seed_eigenfunction(seed, x, y, t, lam);
    } else {
      const Mat2J prev = phi(depth - 1, lam);
      out = apply_step(step_qp(depth - 1), steps[depth - 1], lam, prev);
    }
    phi_cache.emplace(key, out);
    return out;
  }
};

}  // namespace

Mat2J ChainEvaluator::evaluate(double x, double y, double t, cd lam) const {
  return evaluate_depth(x, y, t, lam, steps_.size());
}

Mat2J ChainEvaluator::evaluate_depth(double x, double y, double t, cd lam,
                                     std::size_t depth) const {
  if (depth > steps_.size()) {
    throw DepthExceeded("requested depth exceeds the configured chain");
  }
  ChainMemo memo(seed_, steps_, form_, x, y, t);
  return memo.phi(depth, lam);
}

std::vector<StepMatrices> ChainEvaluator::step_matrices(double x, double y, double t) const {
  ChainMemo memo(seed_, steps_, form_, x, y, t);
  std::vector<StepMatrices> out;
  out.reserve(steps_.size());
  for (std::size_t k = 0; k < steps_.size(); ++k) out.push_back(memo.step_qp(k));
  return out;
}

}  // namespace ds
