#pragma once

#include "cmdp/cmdp.hpp"

namespace cmdp {

struct Evaluation {
    ValueFn v;
    QFn q;
};

/// State-to-state transition matrix under pi: P_pi(s, s') = sum_a pi(a|s) P(s'|s,a).
Matrix policy_transition(const TabularCmdp& cmdp, const Policy& policy);

/// Expected one-step reward under pi for an arbitrary per-pair table.
Vector policy_reward(const Matrix& per_pair, const Policy& policy);

/// Exact policy evaluation for an arbitrary S x A per-step reward table.
/// V solves (I - gamma P_pi) V = r_pi by dense LU; Q = r + gamma P V.
Evaluation evaluate_table(const TabularCmdp& cmdp, const Policy& policy, const Matrix& per_pair);

/// Exact evaluation of the reward or constraint signal.
Evaluation exact_eval(const TabularCmdp& cmdp, const Policy& policy, Signal signal);

/// <rho, V> for the chosen signal.
double scalar_value(const TabularCmdp& cmdp, const Policy& policy, Signal signal);

/// Q(s, a) = r(s, a) + gamma * sum_s' P(s'|s,a) V(s') for a given V.
QFn q_from_v(const TabularCmdp& cmdp, const Matrix& per_pair, const ValueFn& v);

/// Normalised discounted occupancy nu = (1 - gamma) rho^T (I - gamma P_pi)^{-1}.
OccupancyMeasure discounted_occupancy(const TabularCmdp& cmdp, const Policy& policy,
                                      bool with_state_action = false);

/// Max-norm of V - <pi, Q> over states.
double bellman_consistency_gap(const Policy& policy, const Evaluation& eval);

} // namespace cmdp
