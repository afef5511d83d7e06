#pragma once

#include "cmdp/cmdp.hpp"
#include "cmdp/features.hpp"

#include <utility>
#include <vector>

namespace cmdp {

/// Optimal solution of the occupancy-measure LP of a CMDP.
struct LpSolution {
    /// Unnormalised discounted state-action occupancy; sums to 1 / (1 - gamma).
    Matrix occupancy;
    Policy optimal_policy;
    double j_r_star = 0.0;
    double j_c_star = 0.0;
    /// Shadow price of the constraint row (an exact lambda*).
    double constraint_dual = 0.0;
    long pivots = 0;
};

/**
 * max sum mu r  s.t.  sum_a mu(s',a) = rho(s') + gamma sum_{s,a} P(s'|s,a) mu(s,a),
 *                     sum mu c >= b,  mu >= 0.
 * The policy is mu(s,a) / sum_a mu(s,a), uniform where a state has no mass.
 * Throws InfeasibleError when no occupancy meets the constraint.
 */
LpSolution solve_constrained_lp(const TabularCmdp& cmdp);

/// Largest flow-conservation residual of an occupancy measure.
double flow_residual(const TabularCmdp& cmdp, const Matrix& occupancy);

struct ValueIterationResult {
    ValueFn v;
    /// Deterministic greedy policy; ties go to the lowest action index.
    Policy greedy;
    /// <rho, V>
    double j = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

/// Unconstrained optimal control of an arbitrary per-pair reward table
/// (e.g. r + lambda c), iterated to a sup-norm Bellman residual <= tol.
ValueIterationResult value_iteration(const TabularCmdp& cmdp, const Matrix& per_pair, double tol = 1e-10,
                                     int max_iterations = 1000000);

/// zeta = max_pi J_c - b computed by value iteration on the constraint reward.
double slater_gap(const TabularCmdp& cmdp);

struct DualScanResult {
    double lambda_hat_star = 0.0;
    /// (lambda, d(lambda)) with d(lambda) = max_pi J_r + lambda (J_c - b).
    std::vector<std::pair<double, double>> dual_curve;
};

/// Lagrangian dual function on a grid; returns the grid minimiser (lowest index on ties).
DualScanResult lambda_star_scan(const TabularCmdp& cmdp, const std::vector<double>& grid);

/// n evenly spaced points on [lo, hi] (n >= 1; a single point is lo).
std::vector<double> linear_grid(double lo, double hi, int n);

struct ChebyshevFit {
    double eps_b = 0.0;
    Vector theta;
};

/// inf_theta max_{(s,a)} |Q(s,a) - <theta, phi(s,a)>| solved as a linear program.
ChebyshevFit chebyshev_eps_b(const QFn& true_q, const FeatureMap& features);

} // namespace cmdp
