#pragma once

#include "cmdp/cmdp.hpp"

#include <span>
#include <utility>
#include <vector>

namespace cmdp {

/// True (exactly evaluated) reward and constraint values of one iterate.
struct ValuePair {
    double j_r = 0.0;
    double j_c = 0.0;
};

struct OgCv {
    /// (1/T) sum_t (J_r* - J_r(t))
    double og = 0.0;
    /// (1/T) [sum_t (b - J_c(t))]_+ : the positive part is taken after summing.
    double cv = 0.0;
};

/// Average optimality gap and constraint violation over a run. Rejects an empty history.
OgCv compute_og_cv(std::span<const ValuePair> history, double j_r_star, double b);

/// (1/T) sum_t (b - J_c(t)) without the positive part; negative means slack on average.
double signed_violation(std::span<const ValuePair> history, double b);

/// One iteration's contribution E_{s~nu}[<comparator(.|s) - pi_t(.|s), q_l(s,.)>].
double primal_regret_term(const Policy& iterate, const QFn& q_l, const Policy& comparator, const Vector& nu);

/// Estimated action values logged for one iterate, the inputs of the primal regret.
struct PrimalLoss {
    Policy policy;
    QFn q_r;
    QFn q_c;
    double lambda = 0.0;
};

/// sum_t E_{s~nu}[<pi*(.|s) - pi_t(.|s), Q_r^t(s,.) + lambda_t Q_c^t(s,.)>].
double primal_regret(std::span<const PrimalLoss> iterates, const Policy& comparator, const Vector& nu);

/// sum_t (lambda_t - lambda_ref)(Jc_hat(t) - b).
double dual_regret(std::span<const double> lambdas, std::span<const double> est_values, double lambda_ref,
                   double b);

} // namespace cmdp
