#include "cmdp/evaluation.hpp"

#include "cmdp/errors.hpp"

namespace cmdp {

namespace {

void check_shapes(const TabularCmdp& cmdp, const Policy& policy) {
    if (policy.n_states() != cmdp.n_states() || policy.n_actions() != cmdp.n_actions())
        throw InvalidArgument("policy shape does not match the CMDP");
}

} // namespace

Matrix policy_transition(const TabularCmdp& cmdp, const Policy& policy) {
    check_shapes(cmdp, policy);
    const int S = cmdp.n_states();
    const int A = cmdp.n_actions();
    Matrix p_pi = Matrix::Zero(S, S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const double w = policy(s, a);
            if (w != 0.0) p_pi.row(s) += w * cmdp.next_state_dist(s, a);
        }
    return p_pi;
}

Vector policy_reward(const Matrix& per_pair, const Policy& policy) {
    return per_pair.cwiseProduct(policy.probs()).rowwise().sum();
}

QFn q_from_v(const TabularCmdp& cmdp, const Matrix& per_pair, const ValueFn& v) {
    const Vector next = cmdp.transition() * v; // indexed by pair
    QFn q(cmdp.n_states(), cmdp.n_actions());
    for (int s = 0; s < cmdp.n_states(); ++s)
        for (int a = 0; a < cmdp.n_actions(); ++a)
            q(s, a) = per_pair(s, a) + cmdp.gamma() * next(cmdp.pair_index(s, a));
    return q;
}

Evaluation evaluate_table(const TabularCmdp& cmdp, const Policy& policy, const Matrix& per_pair) {
    if (cmdp.gamma() >= 1.0) throw InvalidArgument("exact evaluation requires gamma < 1");
    if (per_pair.rows() != cmdp.n_states() || per_pair.cols() != cmdp.n_actions())
        throw InvalidArgument("per-pair table must be S x A");
    const int S = cmdp.n_states();
    Matrix system = Matrix::Identity(S, S) - cmdp.gamma() * policy_transition(cmdp, policy);
    Evaluation out;
    out.v = system.partialPivLu().solve(policy_reward(per_pair, policy));
    out.q = q_from_v(cmdp, per_pair, out.v);
    return out;
}

Evaluation exact_eval(const TabularCmdp& cmdp, const Policy& policy, Signal signal) {
    return evaluate_table(cmdp, policy, cmdp.signal(signal));
}

double scalar_value(const TabularCmdp& cmdp, const Policy& policy, Signal signal) {
    return cmdp.rho().dot(exact_eval(cmdp, policy, signal).v);
}

OccupancyMeasure discounted_occupancy(const TabularCmdp& cmdp, const Policy& policy, bool with_state_action) {
    const int S = cmdp.n_states();
    Matrix system = Matrix::Identity(S, S) - cmdp.gamma() * policy_transition(cmdp, policy);
    // nu^T (I - gamma P_pi) = (1 - gamma) rho^T
    OccupancyMeasure occ;
    occ.state_dist = system.transpose().partialPivLu().solve((1.0 - cmdp.gamma()) * cmdp.rho());
    // Round-off can leave tiny negatives on unreachable states.
    occ.state_dist = occ.state_dist.cwiseMax(0.0);
    if (with_state_action) occ.state_action = occ.state_dist.asDiagonal() * policy.probs();
    return occ;
}

double bellman_consistency_gap(const Policy& policy, const Evaluation& eval) {
    const Vector mixed = eval.q.cwiseProduct(policy.probs()).rowwise().sum();
    return (mixed - eval.v).cwiseAbs().maxCoeff();
}

} // namespace cmdp
