#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace cmdp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Value function V[s].
using ValueFn = Eigen::VectorXd;
/// Action-value table Q[s][a], stored as an S x A matrix.
using QFn = Eigen::MatrixXd;

/// Which of the two per-step signals of a CMDP to evaluate.
enum class Signal { reward, constraint };

/// A state-action pair, indexed into an enumeration as s * n_actions + a.
struct StateAction {
    int state = 0;
    int action = 0;
    friend bool operator==(const StateAction&, const StateAction&) = default;
};

/**
 * Finite discounted constrained MDP.
 *
 * Transition probabilities are stored as an (S*A) x S matrix: row s*A + a is
 * the next-state distribution after taking action a in state s.
 * The threshold is in value units: a policy is feasible when J_c >= threshold.
 */
class TabularCmdp {
  public:
    TabularCmdp(int n_states, int n_actions, Matrix transition, Matrix reward,
                Matrix constraint_reward, double threshold, Vector rho, double gamma);

    int n_states() const noexcept { return n_states_; }
    int n_actions() const noexcept { return n_actions_; }
    int n_pairs() const noexcept { return n_states_ * n_actions_; }
    double gamma() const noexcept { return gamma_; }
    double threshold() const noexcept { return threshold_; }
    const Vector& rho() const noexcept { return rho_; }
    const Matrix& transition() const noexcept { return transition_; }
    const Matrix& reward() const noexcept { return reward_; }
    const Matrix& constraint_reward() const noexcept { return constraint_; }
    const Matrix& signal(Signal sig) const noexcept {
        return sig == Signal::reward ? reward_ : constraint_;
    }

    /// Next-state distribution P(. | s, a) as a row expression.
    auto next_state_dist(int s, int a) const { return transition_.row(pair_index(s, a)); }
    double prob(int s, int a, int next) const { return transition_(pair_index(s, a), next); }

    int pair_index(int s, int a) const noexcept { return s * n_actions_ + a; }
    StateAction pair_at(int index) const noexcept {
        return {index / n_actions_, index % n_actions_};
    }

    /// Copy of this model with a different threshold.
    TabularCmdp with_threshold(double b) const;
    /// Copy of this model with a different initial distribution.
    TabularCmdp with_rho(Vector rho) const;

  private:
    void validate() const;

    int n_states_;
    int n_actions_;
    Matrix transition_;
    Matrix reward_;
    Matrix constraint_;
    double threshold_;
    Vector rho_;
    double gamma_;
};

/// Stationary stochastic policy pi[s][a]; every row is a probability vector.
class Policy {
  public:
    Policy() = default;
    /// Validates the rows (nonnegative, sum to one within 1e-12 after renormalisation check).
    explicit Policy(Matrix probs);

    static Policy uniform(int n_states, int n_actions);
    /// Deterministic policy from one action per state.
    static Policy deterministic(int n_actions, const std::vector<int>& actions);

    int n_states() const noexcept { return static_cast<int>(probs_.rows()); }
    int n_actions() const noexcept { return static_cast<int>(probs_.cols()); }
    const Matrix& probs() const noexcept { return probs_; }
    double operator()(int s, int a) const { return probs_(s, a); }
    auto row(int s) const { return probs_.row(s); }

    friend bool operator==(const Policy& a, const Policy& b) { return a.probs_ == b.probs_; }

  private:
    Matrix probs_;
};

/// Normalised discounted state visitation (1 - gamma) rho^T (I - gamma P_pi)^{-1}.
struct OccupancyMeasure {
    Vector state_dist;
    /// nu(s) * pi(a|s); empty unless requested.
    Matrix state_action;
};

} // namespace cmdp
