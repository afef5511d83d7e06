#include "cmdp/oracle.hpp"

#include "cmdp/errors.hpp"
#include "cmdp/simplex.hpp"

#include <cmath>
#include <limits>

namespace cmdp {

LpSolution solve_constrained_lp(const TabularCmdp& cmdp) {
    const int S = cmdp.n_states();
    const int A = cmdp.n_actions();
    const int n = cmdp.n_pairs();

    LinearProgram lp;
    lp.a = Matrix::Zero(S + 1, n);
    lp.b = Vector::Zero(S + 1);
    lp.c = Vector::Zero(n);
    lp.kinds.assign(S, RowKind::equal);
    lp.kinds.push_back(RowKind::greater_equal);

    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const int j = cmdp.pair_index(s, a);
            lp.a(s, j) += 1.0;
            for (int next = 0; next < S; ++next) lp.a(next, j) -= cmdp.gamma() * cmdp.prob(s, a, next);
            lp.a(S, j) = cmdp.constraint_reward()(s, a);
            lp.c(j) = cmdp.reward()(s, a);
        }
    lp.b.head(S) = cmdp.rho();
    lp.b(S) = cmdp.threshold();

    const LpResult res = solve_lp(lp);
    if (res.status == LpStatus::infeasible)
        throw InfeasibleError("no occupancy measure satisfies the constraint", -std::numeric_limits<double>::infinity());
    if (res.status != LpStatus::optimal) throw NumericalError("occupancy LP reported unbounded");

    LpSolution sol;
    sol.pivots = res.pivots;
    sol.occupancy = Matrix(S, A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) sol.occupancy(s, a) = res.x(cmdp.pair_index(s, a));

    Matrix probs(S, A);
    for (int s = 0; s < S; ++s) {
        const double mass = sol.occupancy.row(s).sum();
        if (mass > 1e-14)
            probs.row(s) = sol.occupancy.row(s) / mass;
        else
            probs.row(s).setConstant(1.0 / A);
        probs.row(s) /= probs.row(s).sum();
    }
    sol.optimal_policy = Policy(std::move(probs));
    sol.j_r_star = sol.occupancy.cwiseProduct(cmdp.reward()).sum();
    sol.j_c_star = sol.occupancy.cwiseProduct(cmdp.constraint_reward()).sum();
    // The constraint row is a >= row of a maximisation: its multiplier is reported <= 0.
    sol.constraint_dual = -res.duals(S);
    return sol;
}

double flow_residual(const TabularCmdp& cmdp, const Matrix& occupancy) {
    const int S = cmdp.n_states();
    Vector inflow = cmdp.rho();
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < cmdp.n_actions(); ++a)
            inflow += cmdp.gamma() * occupancy(s, a) * cmdp.next_state_dist(s, a).transpose();
    return (occupancy.rowwise().sum() - inflow).cwiseAbs().maxCoeff();
}

ValueIterationResult value_iteration(const TabularCmdp& cmdp, const Matrix& per_pair, double tol,
                                     int max_iterations) {
    if (per_pair.rows() != cmdp.n_states() || per_pair.cols() != cmdp.n_actions())
        throw InvalidArgument("per-pair table must be S x A");
    const int S = cmdp.n_states();
    const int A = cmdp.n_actions();
    ValueIterationResult out;
    out.v = Vector::Zero(S);
    Matrix q(S, A);

    auto backup = [&](const Vector& v) {
        const Vector next = cmdp.transition() * v;
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) q(s, a) = per_pair(s, a) + cmdp.gamma() * next(cmdp.pair_index(s, a));
        return Vector(q.rowwise().maxCoeff());
    };

    for (int it = 0; it < max_iterations; ++it) {
        Vector next = backup(out.v);
        out.residual = (next - out.v).cwiseAbs().maxCoeff();
        out.v = std::move(next);
        out.iterations = it + 1;
        if (out.residual <= tol) break;
    }
    if (out.residual > tol) throw NumericalError("value iteration did not reach the residual tolerance");

    // Residual of the returned V itself, and greedy actions from its backup.
    const Vector tv = backup(out.v);
    out.residual = (tv - out.v).cwiseAbs().maxCoeff();
    std::vector<int> actions(S, 0);
    for (int s = 0; s < S; ++s) {
        const double best = q.row(s).maxCoeff();
        const double slack = 1e-12 * std::max(1.0, std::abs(best));
        for (int a = 0; a < A; ++a)
            if (q(s, a) >= best - slack) {
                actions[s] = a;
                break;
            }
    }
    out.greedy = Policy::deterministic(A, actions);
    out.j = cmdp.rho().dot(out.v);
    return out;
}

double slater_gap(const TabularCmdp& cmdp) {
    return value_iteration(cmdp, cmdp.constraint_reward()).j - cmdp.threshold();
}

std::vector<double> linear_grid(double lo, double hi, int n) {
    if (n < 1) throw InvalidArgument("grid needs at least one point");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return g;
}

DualScanResult lambda_star_scan(const TabularCmdp& cmdp, const std::vector<double>& grid) {
    if (grid.empty()) throw InvalidArgument("dual scan grid is empty");
    DualScanResult out;
    double best = std::numeric_limits<double>::infinity();
    for (double lambda : grid) {
        if (lambda < 0.0) throw InvalidArgument("dual scan grid must be nonnegative");
        const Matrix weighted = cmdp.reward() + lambda * cmdp.constraint_reward();
        const double d = value_iteration(cmdp, weighted).j - lambda * cmdp.threshold();
        out.dual_curve.emplace_back(lambda, d);
        if (d < best) {
            best = d;
            out.lambda_hat_star = lambda;
        }
    }
    return out;
}

ChebyshevFit chebyshev_eps_b(const QFn& true_q, const FeatureMap& features) {
    if (true_q.rows() != features.n_states() || true_q.cols() != features.n_actions())
        throw InvalidArgument("Q table shape does not match the feature map");
    const int n = static_cast<int>(features.design().rows());
    const int d = features.dim();

    // Variables [theta+ (d), theta- (d), t]; maximise -t.
    LinearProgram lp;
    lp.a = Matrix::Zero(2 * n, 2 * d + 1);
    lp.b = Vector::Zero(2 * n);
    lp.c = Vector::Zero(2 * d + 1);
    lp.c(2 * d) = -1.0;
    lp.kinds.assign(2 * n, RowKind::less_equal);
    for (int z = 0; z < n; ++z) {
        const auto phi = features.row(z);
        const double q = true_q(z / features.n_actions(), z % features.n_actions());
        // <theta, phi> - t <= q
        lp.a.row(2 * z).head(d) = phi;
        lp.a.row(2 * z).segment(d, d) = -phi;
        lp.a(2 * z, 2 * d) = -1.0;
        lp.b(2 * z) = q;
        // -<theta, phi> - t <= -q
        lp.a.row(2 * z + 1).head(d) = -phi;
        lp.a.row(2 * z + 1).segment(d, d) = phi;
        lp.a(2 * z + 1, 2 * d) = -1.0;
        lp.b(2 * z + 1) = -q;
    }
    const LpResult res = solve_lp(lp);
    if (res.status != LpStatus::optimal) throw NumericalError("Chebyshev fit LP did not solve");
    ChebyshevFit fit;
    fit.theta = res.x.head(d) - res.x.segment(d, d);
    fit.eps_b = res.x(2 * d);
    return fit;
}

} // namespace cmdp
