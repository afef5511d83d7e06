#pragma once

#include "cmdp/cmdp.hpp"

#include <vector>

namespace cmdp {

enum class RowKind { less_equal, equal, greater_equal };

/// maximize c^T x  subject to  a.row(i) x (<=|=|>=) b(i),  x >= 0.
struct LinearProgram {
    Matrix a;
    Vector b;
    std::vector<RowKind> kinds;
    Vector c;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    Vector x;
    double objective = 0.0;
    /// Shadow price of each row in the original orientation (>= 0 for binding <= rows).
    Vector duals;
    long pivots = 0;
};

/**
 * Dense two-phase tableau simplex with Bland's anti-cycling rule.
 *
 * Intended for the small, degenerate programs built by the oracles
 * (a few hundred columns at most). `tol` is the pivot / optimality tolerance.
 */
LpResult solve_lp(const LinearProgram& lp, double tol = 1e-10);

} // namespace cmdp
