#pragma once

#include "cmdp/cmdp.hpp"
#include "cmdp/design.hpp"
#include "cmdp/features.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace cmdp {

/// Rollout horizon whose truncation bias gamma^H / (1 - gamma) is at most eps_trunc.
int horizon_for(double eps_trunc, double gamma);

/// Mean truncated returns at each coreset point.
struct RolloutEstimates {
    Vector q_r;
    Vector q_c;
    /// States seen across all trajectories (sorted, unique); filled on request.
    std::vector<int> visited;
};

/**
 * Monte-Carlo Q estimates at the coreset points: m independent trajectories
 * per point, each of H steps. Trajectory j at coreset entry i draws from its
 * own stream derive_seed(seed, {i, j}), so results do not depend on threading.
 */
RolloutEstimates rollout_q_estimates(const TabularCmdp& cmdp, const Policy& policy, const Coreset& coreset,
                                     int m, int horizon, std::uint64_t seed, bool record_visits = false);

/// argmin_theta sum_i omega_i (<theta, phi_i> - q_i)^2 + nu |theta|^2.
/// With nu = 0 the minimum-norm solution is returned (pseudo-inverse).
Vector wls_fit(const Coreset& coreset, const FeatureMap& features, const Vector& q, double nu);

struct EstimateMeta {
    int m = 0;
    int horizon = 0;
    std::uint64_t seed = 0;
    double delta = 0.05;
};

/// Linear action-value estimate for both signals.
struct QEstimate {
    Vector theta_r;
    Vector theta_c;
    std::shared_ptr<const FeatureMap> features;
    EstimateMeta meta;
};

struct QPair {
    double q_r = 0.0;
    double q_c = 0.0;
};

/// (<theta_r, phi(s,a)>, <theta_c, phi(s,a)>).
QPair predict_q(const QEstimate& estimate, int s, int a);

/// Both predicted tables at once, S x A.
std::pair<QFn, QFn> predict_tables(const QEstimate& estimate);

/// Exact Q tables of a policy for both signals.
struct QTables {
    QFn q_r;
    QFn q_c;
};

/// Exact evaluation behind the estimator interface (zero estimation error).
QTables exact_estimator(const TabularCmdp& cmdp, const Policy& policy);

/// sum_s rho(s) sum_a pi(a|s) Qc_hat(s, a).
double estimate_constraint_value(const Vector& rho, const Policy& policy, const QFn& q_c);

/// Hoeffding half-width for m returns in [0, 1/(1-gamma)] with a union bound over
/// n_pairs points, plus the truncation bias gamma^H / (1 - gamma).
double hoeffding_band(double gamma, int n_pairs, double delta, int m, int horizon);

} // namespace cmdp
