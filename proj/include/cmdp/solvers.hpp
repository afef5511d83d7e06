#pragma once

#include "cmdp/cmdp.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cmdp {

inline constexpr double log_floor = 1e-12;

/// pi'(a|s) proportional to pi(a|s) exp(eta1 * q_l(s, a)), with a per-row max shift.
Policy mirror_ascent_step(const Policy& pi, const QFn& q_l, double eta1);

struct StepSizes {
    double eta1 = 0.0;
    double eta2 = 0.0;
};

/// eta1 = sqrt(2 log|A| / n) (1 - gamma) / (1 + U), eta2 = U (1 - gamma) / sqrt(n),
/// where n = T (fixed horizon) or n = t (anytime; pass the 1-based iteration).
StepSizes gda_theory_stepsizes(int n, int n_actions, double gamma, double U);

/// clip(lambda - eta2 (est_jc - b), 0, U)
double projected_gd_dual_step(double lambda, double est_jc, double b, double eta2, double U);

/// (1 - gamma) / (1 + U) * (q_l(s, .) - <q_l(s, .), pi(.|s)>) for every state.
Matrix normalized_advantage(const QFn& q_l, const Policy& pi, double U, double gamma);

/// q_r + lambda q_c - nu log(max(pi, 1e-12)).
QFn entropy_regularized_q(const QFn& q_r, const QFn& q_c, double lambda, double nu, const Policy& pi);

/// Mirror step on q_r when est_jc >= b + eta_tol, otherwise on q_c.
Policy crpo_step(const Policy& pi, const QFn& q_r, const QFn& q_c, double est_jc, double b, double eta_tol,
                 double alpha_pi);

/**
 * Per-(s, a) coin-betting primal learner over a known horizon T.
 *
 * Losses are clipped to l = A 1{w > 0} + [A]_+ 1{w <= 0}; the bet is
 * w_{t+1} = (sum l) / ((t + 1) + T/2) * (1 + sum l_i w_i), starting at w = 0.
 * The policy is pi_0 [w]_+ renormalised per state, or pi_0 where the row is all zero.
 */
class PrimalCoinState {
  public:
    PrimalCoinState(Policy base, int horizon);

    /// Consume one advantage table and return pi_{t+1}. `mask`, when given,
    /// restricts the update to states with mask[s] true.
    Policy step(const Matrix& advantage, const std::vector<bool>* mask = nullptr);

    Policy policy() const;
    int t() const noexcept { return t_; }
    int horizon() const noexcept { return horizon_; }
    const Matrix& w() const noexcept { return w_; }
    const Matrix& loss_sum() const noexcept { return s1_; }
    const Matrix& wealth_sum() const noexcept { return s2_; }
    const Policy& base() const noexcept { return base_; }

  private:
    Policy base_;
    int horizon_;
    int t_ = 0;
    Matrix w_;
    Matrix s1_;
    Matrix s2_;
};

/// Common interface of the multiplier updates; lambda() stays in [0, U].
class DualLearner {
  public:
    virtual ~DualLearner() = default;
    double lambda() const noexcept { return lambda_; }
    double upper() const noexcept { return upper_; }
    /// Observe est_jc for the current multiplier and move to the next one.
    virtual double step(double est_jc, double b) = 0;

  protected:
    DualLearner(double lambda0, double upper);
    double clip(double x) const;
    double lambda_;
    double lambda0_;
    double upper_;
};

class ProjectedGdDual final : public DualLearner {
  public:
    ProjectedGdDual(double lambda0, double eta2, double upper);
    double step(double est_jc, double b) override;
    double eta2() const noexcept { return eta2_; }
    void set_eta2(double eta2);

  private:
    double eta2_;
};

/// Sigmoid bettor: beta = (1 - gamma)(2 sigma(2B / (1/(1-gamma) + C)) - 1),
/// lambda' = clip(lambda_0 - beta (1/(1-gamma) - W), 0, U).
class CoinBettingDual final : public DualLearner {
  public:
    CoinBettingDual(double lambda0, double gamma, double upper);
    double step(double est_jc, double b) override;
    double beta() const noexcept { return beta_; }
    double sum_g() const noexcept { return b_sum_; }
    double sum_abs_g() const noexcept { return c_sum_; }
    double wealth_term() const noexcept { return w_sum_; }

  private:
    double gamma_;
    double b_sum_ = 0.0;
    double c_sum_ = 0.0;
    double w_sum_ = 0.0;
    double beta_ = 0.0;
};

/// Adaptive-scale bettor with g = b - est_jc and running bound L = max |g|.
class PracticalCoinBettingDual final : public DualLearner {
  public:
    PracticalCoinBettingDual(double lambda0, double alpha_lambda, double upper);
    double step(double est_jc, double b) override;
    double scale() const noexcept { return l_; }

  private:
    double alpha_;
    double l_ = 0.0;
    double sum_g_ = 0.0;
    double sum_abs_g_ = 0.0;
    double sum_pos_wealth_ = 0.0;
};

/// Estimated action values of one policy, plus the states the estimator touched.
struct EstimatorOutput {
    QFn q_r;
    QFn q_c;
    /// Visited states (sampled estimators only).
    std::vector<int> visited;
};

/// Estimator callback. `stream` distinguishes calls so sampled estimators draw fresh randomness.
using QEstimator = std::function<EstimatorOutput(const Policy& policy, std::uint64_t stream)>;

/// Estimator that returns exact evaluations.
QEstimator make_exact_estimator(const TabularCmdp& cmdp);

struct FeasibilityResult {
    bool feasible = false;
    double zeta_hat = 0.0;
    double upper = 0.0;
    /// Iterate with the largest estimated constraint value.
    Policy pi_tilde;
    /// zeta_hat == 0 exactly: pi_tilde is returned as the answer.
    bool boundary = false;
};

/**
 * Run the coin-betting primal on the constraint signal alone for `iterations`
 * steps and take zeta_hat = max_t est_Jc(pi_t) - b; U = 2 / (zeta_hat (1 - gamma)).
 * Throws InfeasibleError when zeta_hat < 0.
 */
FeasibilityResult estimate_feasibility_and_u(const TabularCmdp& cmdp, int iterations, const QEstimator& estimator,
                                             std::uint64_t stream_base = 0);

enum class Algorithm { cbp, cbp_practical, gda, gda_theory, crpo };

std::string_view to_string(Algorithm algorithm);
Algorithm algorithm_from_string(std::string_view name);

struct SolverConfig {
    Algorithm algorithm = Algorithm::cbp_practical;
    int T = 100;
    std::uint64_t seed = 0;
    double alpha_pi = 1.0;
    double alpha_lambda = 1.0;
    double crpo_eta = 0.0;
    double nu_ent = 0.0;
    double lambda0 = 0.0;
    /// gda_theory: use the anytime (t-based) step sizes instead of T.
    bool anytime_steps = false;
    /// Update only states visited by the sampled trajectories.
    bool visited_only = false;
    int feasibility_iterations = 300;
    /// Replaces the estimated U when set.
    std::optional<double> upper_override;
};

struct IterateRecord {
    int iter = 0;
    double j_r = 0.0;
    double j_c = 0.0;
    double est_jc = 0.0;
    double lambda = 0.0;
    double og_running = 0.0;
    double cv_running = 0.0;
    double primal_regret_running = 0.0;
    double dual_regret_at_0 = 0.0;
    double dual_regret_at_u = 0.0;
};

struct IterateLog {
    std::vector<IterateRecord> records;
    double upper = 0.0;
    double zeta_hat = 0.0;
    double j_r_star = 0.0;
    double b = 0.0;
    double eta1 = 0.0;
    double eta2 = 0.0;
    Policy comparator;
    Policy final_policy;
    bool boundary = false;
};

/// Driver shared by all algorithms; deterministic given (config, estimator).
IterateLog run_algorithm(const TabularCmdp& cmdp, const SolverConfig& config, const QEstimator& estimator);

} // namespace cmdp
