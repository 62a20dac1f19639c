#pragma once

#include <vector>

#include "ds/laxpair.hpp"

namespace ds {

// Parameters of one dressing step. lambda_l is the pole of the step matrix,
// lambda_lp the pole of its inverse. a_l, b_l weight the two rows of the
// previous eigenfunction inverse (and the two columns of its primed-pole
// evaluation). The f-block carries four amplitudes f_ij with phase constants
// m1 (on f11), m1p (on f12), m2 (on f21), m2p (on f22), each multiplying
// exp(i m (x - y)), plus optional per-row time frequencies nu1, nu2.
struct StepParams {
  cd lambda_l, lambda_lp;
  cd a_l, b_l;
  cd f11, f12, f21, f22;
  cd m1, m1p, m2, m2p;
  cd nu1{}, nu2{};

  void validate() const;  // throws DegeneratePoles / ConfigError
};

// Normalization scalar of the pole column, written in its two equivalent
// published arrangements (kept separate so their agreement is testable).
cd sigma_a(const StepParams& st);
cd sigma_b(const StepParams& st);

// Normalization scalar of the inverse pole column: 2 lam' / (lam^2 - lam'^2).
cd epsilon_prime(const StepParams& st);

// The f-block as a jet matrix: entry (i,j) = f_ij exp(i m_ij (x-y)) exp(i nu_i t).
Mat2J f_block(const StepParams& st, double x, double y, double t);

struct StepMatrices {
  Mat2J Q, P;
};

// Kernel-based construction of the step data:
//   row   delta^T = (a_l, b_l) Phi_prev(lambda_l)^{-1},
//   column phi'   = Phi_prev(lambda_lp) w TIMES the f-block,
//   P = -(1/sigma) (F phi') delta^T / (delta^T phi'),   Q = F + (2/lambda_l) P.
// This is the construction under which the dressed linear problem keeps its
// form (constant coefficient shifts, lambda-independent dressed fields).
// The default weight vector is w = (a_l, b_l).
StepMatrices build_QP(const StepParams& st, const Mat2J& phi_pole,
                      const Mat2J& phi_primed, double x, double y, double t);
StepMatrices build_QP_w(const StepParams& st, const Mat2J& phi_pole,
                        const Mat2J& phi_primed, double x, double y, double t,
                        const Vec2& w);

// Closed-form per-entry construction: pairs the column F (a_l, b_l)^T with the
// adjugate row (Phi22, -Phi21) / (a_l Phi22 - b_l Phi21). It satisfies every
// pointwise inverse and annihilation identity and yields upper-triangular step
// matrices in the reduced case (b_l = 0, f12 = f21 = 0), but it does not
// preserve the form of the linear problem; see the verification suite.
StepMatrices entrywise_QP(const StepParams& st, const Mat2J& phi_pole,
                          double x, double y, double t);

// Phase convention for the f22-bearing coefficient in the direct per-entry Q
// formulas: `consistent` uses the f-block phase m2p (keeps Q = F at the
// pole-free limit), `as_displayed` uses m2.
enum class EntryPhase { consistent, as_displayed };

// Direct transcription of the per-entry Q formulas (numerator coefficient
// combinations over the shared denominator); used to cross-check entrywise_QP.
Mat2J entrywise_Q_direct(const StepParams& st, const Mat2J& phi_pole,
                         double x, double y, double t, EntryPhase phase);

// B(lam) = Q + 2 lambda_l / (lam^2 - lambda_l^2) P, guarded near the pole.
Mat2J bt_matrix(const StepMatrices& sm, const StepParams& st, cd lam);
Mat2 bt_matrix_value(const StepMatrices& sm, const StepParams& st, cd lam);

struct StepInverse {
  Mat2J Qp, Pp;
};

// Closed-form inverse data: Q' = Q^{-1} and
// P' = [ (lambda_lp^2 - lambda_l^2) adj(Q) + 2 lambda_l adj(P) ] / (2 lambda_lp det Q),
// so that B(lam)^{-1} = Q' + 2 lambda_lp / (lam^2 - lambda_lp^2) P'.
StepInverse bt_inverse(const StepMatrices& sm, const StepParams& st);
Mat2J bt_inverse_matrix(const StepInverse& si, const StepParams& st, cd lam);
Mat2 bt_inverse_matrix_value(const StepInverse& si, const StepParams& st, cd lam);

// Which row gauge the oracle pins: `kernel` matches build_QP, `adjugate`
// matches entrywise_QP.
enum class RowGauge { kernel, adjugate };

struct OracleResult {
  Mat2 Q, P, Qp, Pp;
  double cond;  // conditioning of the separation solve
};

// Independent determination of (Q, P, Q', P') at one point. Uses only the
// defining structure: B(0) = F, a simple pole of B at lambda_l with the given
// column/row directions, placement of det B's zero at lambda_lp (matrix
// determinant lemma), and separation of B^{-1} samples at two generic lam
// into constant plus pole parts. No closed-form normalization constants are
// reused. Throws IllConditioned when the involved solves are degenerate.
OracleResult solve_QP_oracle(const StepParams& st, const Mat2J& phi_pole,
                             const Mat2J& phi_primed, double x, double y, double t,
                             RowGauge gauge);

// Denominator variants of the closed-form dressed (1,1) entry.
enum class Phi11Denominator { a22_minus_b21, a21_minus_b22 };

// Closed-form first entry of the dressed eigenfunction at spectral value lam,
// assembled from the per-entry coefficient formulas with pole weight
// f(lam) = 2 lambda_l / (sigma (lam^2 - lambda_l^2)). phi_pole is the
// previous eigenfunction at lambda_l, phi_at_lam at the evaluation point.
cd closed_form_phi11(const StepParams& st, const Mat2J& phi_pole,
                     const Mat2& phi_at_lam, cd lam, double x, double y, double t,
                     Phi11Denominator denom);

// ---------------------------------------------------------------------------
// Phase locking. A dressing step admits constant coefficient shifts exactly
// when the f-block phase constants solve the lock equations. Step 1 has a
// closed-form solution for any invertible f-block; later steps require a
// diagonal f-block, and their locked phases follow the target recursion
//   Ta_n = -[ a (m0+n0) + i sum_{k<n} (m1_k + m2p_k) + 2 sum_{k<n} Ta_k ],
//   Tb_n = +[ b (1/m0+1/n0) - i sum_{k<n} (m1_k + m2p_k) - 2 sum_{k<n} Tb_k ],
// with locked phases m1_n = i Ta_n, m2p_n = i Tb_n and shifted constants
// alpha_n = alpha_{n-1} - i Ta_n, beta_n = beta_{n-1} - i Tb_n.
// ---------------------------------------------------------------------------

struct LockTargets {
  cd Ta, Tb;
};

LockTargets lock_targets(const SeedParams& seed, const std::vector<StepParams>& prior);

// Fills the phase constants of `proto` with the locked values (row-constant:
// m1p = m1, m2 = m2p). Steps after the first require a diagonal f-block.
StepParams lock_step(const SeedParams& seed, const std::vector<StepParams>& prior,
                     StepParams proto);

struct ChainConstants {
  std::vector<cd> alpha;  // alpha[k] after k steps; alpha[0] is the background value
  std::vector<cd> beta;
  std::vector<LockTargets> targets;  // targets[k] for step k+1
};

ChainConstants chain_constants(const SeedParams& seed, const std::vector<StepParams>& steps);

// ---------------------------------------------------------------------------
// Chain evaluation.
// ---------------------------------------------------------------------------

enum class StepForm { kernel, entrywise };

Mat2J apply_step(const StepMatrices& sm, const StepParams& st, cd lam, const Mat2J& phi_prev);

// Evaluates the dressed eigenfunction of an n-step chain at one point and
// spectral value, memoizing the intermediate evaluations each step needs at
// the pole (and, for the kernel form, primed-pole) spectral values.
class ChainEvaluator {
 public:
  ChainEvaluator(SeedParams seed, std::vector<StepParams> steps,
                 StepForm form = StepForm::kernel);

  Mat2J evaluate(double x, double y, double t, cd lam) const;
  Mat2J evaluate_depth(double x, double y, double t, cd lam, std::size_t depth) const;

  // Q, P of every step at one point (the data the field recursion consumes).
  std::vector<StepMatrices> step_matrices(double x, double y, double t) const;

  const SeedParams& seed() const { return seed_; }
  const std::vector<StepParams>& steps() const { return steps_; }
  StepForm form() const { return form_; }
  std::size_t depth() const { return steps_.size(); }

 private:
  SeedParams seed_;
  std::vector<StepParams> steps_;
  StepForm form_;
};

}  // namespace ds
