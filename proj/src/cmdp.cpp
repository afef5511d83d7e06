#include "cmdp/cmdp.hpp"

#include "cmdp/errors.hpp"

#include <cmath>
#include <string>

namespace cmdp {

namespace {

constexpr double kRowSumTol = 1e-12;

void check_probability_vector(const Eigen::Ref<const Vector>& v, double tol, const std::string& what) {
    if (!v.allFinite()) throw InvalidArgument(what + " has non-finite entries");
    if (v.minCoeff() < 0.0) throw InvalidArgument(what + " has negative entries");
    if (std::abs(v.sum() - 1.0) > tol) throw InvalidArgument(what + " does not sum to one");
}

} // namespace

TabularCmdp::TabularCmdp(int n_states, int n_actions, Matrix transition, Matrix reward,
                         Matrix constraint_reward, double threshold, Vector rho, double gamma)
    : n_states_(n_states), n_actions_(n_actions), transition_(std::move(transition)),
      reward_(std::move(reward)), constraint_(std::move(constraint_reward)), threshold_(threshold),
      rho_(std::move(rho)), gamma_(gamma) {
    validate();
}

void TabularCmdp::validate() const {
    if (n_states_ <= 0 || n_actions_ <= 0) throw InvalidArgument("state and action counts must be positive");
    if (!(gamma_ >= 0.0 && gamma_ < 1.0)) throw InvalidArgument("discount must lie in [0, 1)");
    if (!std::isfinite(threshold_)) throw InvalidArgument("threshold must be finite");
    if (transition_.rows() != n_pairs() || transition_.cols() != n_states_)
        throw InvalidArgument("transition matrix must be (S*A) x S");
    if (reward_.rows() != n_states_ || reward_.cols() != n_actions_ || constraint_.rows() != n_states_ ||
        constraint_.cols() != n_actions_)
        throw InvalidArgument("reward tables must be S x A");
    if (rho_.size() != n_states_) throw InvalidArgument("initial distribution must have S entries");

    for (int i = 0; i < n_pairs(); ++i) {
        Vector row = transition_.row(i).transpose();
        check_probability_vector(row, kRowSumTol, "transition row " + std::to_string(i));
    }
    auto in_unit = [](const Matrix& m) { return m.allFinite() && m.minCoeff() >= 0.0 && m.maxCoeff() <= 1.0; };
    if (!in_unit(reward_)) throw InvalidArgument("rewards must lie in [0, 1]");
    if (!in_unit(constraint_)) throw InvalidArgument("constraint rewards must lie in [0, 1]");
    check_probability_vector(rho_, 1e-12, "initial distribution");
}

TabularCmdp TabularCmdp::with_threshold(double b) const {
    return TabularCmdp(n_states_, n_actions_, transition_, reward_, constraint_, b, rho_, gamma_);
}

TabularCmdp TabularCmdp::with_rho(Vector rho) const {
    return TabularCmdp(n_states_, n_actions_, transition_, reward_, constraint_, threshold_, std::move(rho),
                       gamma_);
}

Policy::Policy(Matrix probs) : probs_(std::move(probs)) {
    if (probs_.rows() == 0 || probs_.cols() == 0) throw InvalidArgument("policy must be non-empty");
    for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
        Vector row = probs_.row(s).transpose();
        check_probability_vector(row, kRowSumTol, "policy row " + std::to_string(s));
    }
}

Policy Policy::uniform(int n_states, int n_actions) {
    return Policy(Matrix::Constant(n_states, n_actions, 1.0 / n_actions));
}

Policy Policy::deterministic(int n_actions, const std::vector<int>& actions) {
    Matrix p = Matrix::Zero(static_cast<Eigen::Index>(actions.size()), n_actions);
    for (std::size_t s = 0; s < actions.size(); ++s) {
        if (actions[s] < 0 || actions[s] >= n_actions) throw InvalidArgument("action index out of range");
        p(static_cast<Eigen::Index>(s), actions[s]) = 1.0;
    }
    return Policy(std::move(p));
}

} // namespace cmdp
