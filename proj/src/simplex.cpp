#include "cmdp/simplex.hpp"

#include "cmdp/errors.hpp"

#include <cmath>
#include <limits>

namespace cmdp {

namespace {

constexpr long kMaxPivots = 200000;

struct Tableau {
    Matrix t; // m constraint rows + 1 objective row; last column is the right-hand side
    std::vector<int> basis;
    int m = 0;
    int cols = 0; // structural + slack + artificial columns (excludes rhs)

    double& rhs(int i) { return t(i, cols); }

    void pivot(int row, int col) {
        t.row(row) /= t(row, col);
        for (int i = 0; i <= m; ++i) {
            if (i == row) continue;
            const double f = t(i, col);
            if (f != 0.0) t.row(i) -= f * t.row(row);
        }
        basis[row] = col;
    }

    // Objective row holds d_j = c_B B^{-1} A_j - c_j for maximisation of c.
    void load_objective(const Vector& cost) {
        t.row(m).setZero();
        t.row(m).head(cols) = -cost.transpose();
        for (int i = 0; i < m; ++i) {
            const double cb = cost(basis[i]);
            if (cb != 0.0) t.row(m) += cb * t.row(i);
        }
    }
};

enum class Outcome { optimal, unbounded };

// Bland: lowest-index improving column enters; ratio ties go to the lowest basic index.
Outcome run_phase(Tableau& tab, int allowed_cols, double tol, long& pivots) {
    for (;;) {
        int enter = -1;
        for (int j = 0; j < allowed_cols; ++j)
            if (tab.t(tab.m, j) < -tol) {
                enter = j;
                break;
            }
        if (enter < 0) return Outcome::optimal;

        int leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < tab.m; ++i) {
            const double coef = tab.t(i, enter);
            if (coef <= tol) continue;
            const double ratio = tab.rhs(i) / coef;
            if (leave < 0 || ratio < best - 1e-12 ||
                (std::abs(ratio - best) <= 1e-12 && tab.basis[i] < tab.basis[leave])) {
                best = ratio;
                leave = i;
            }
        }
        if (leave < 0) return Outcome::unbounded;
        tab.pivot(leave, enter);
        if (++pivots > kMaxPivots) throw NumericalError("simplex pivot limit exceeded");
    }
}

} // namespace

LpResult solve_lp(const LinearProgram& lp, double tol) {
    const int m = static_cast<int>(lp.a.rows());
    const int n = static_cast<int>(lp.a.cols());
    if (lp.b.size() != m || static_cast<int>(lp.kinds.size()) != m || lp.c.size() != n)
        throw InvalidArgument("linear program has inconsistent dimensions");

    // Orient every row so that its right-hand side is nonnegative.
    std::vector<double> sign(m, 1.0);
    std::vector<RowKind> kind(lp.kinds);
    for (int i = 0; i < m; ++i) {
        if (lp.b(i) < 0.0) {
            sign[i] = -1.0;
            if (kind[i] == RowKind::less_equal)
                kind[i] = RowKind::greater_equal;
            else if (kind[i] == RowKind::greater_equal)
                kind[i] = RowKind::less_equal;
        }
    }
    int n_slack = 0;
    int n_art = 0;
    for (auto k : kind) {
        if (k != RowKind::equal) ++n_slack;
        if (k != RowKind::less_equal) ++n_art;
    }

    Tableau tab;
    tab.m = m;
    tab.cols = n + n_slack + n_art;
    tab.t = Matrix::Zero(m + 1, tab.cols + 1);
    tab.basis.assign(m, -1);
    std::vector<int> identity_col(m, -1);

    int slack = n;
    int art = n + n_slack;
    for (int i = 0; i < m; ++i) {
        tab.t.row(i).head(n) = sign[i] * lp.a.row(i);
        tab.rhs(i) = sign[i] * lp.b(i);
        switch (kind[i]) {
        case RowKind::less_equal:
            tab.t(i, slack) = 1.0;
            identity_col[i] = slack++;
            break;
        case RowKind::greater_equal:
            tab.t(i, slack++) = -1.0;
            tab.t(i, art) = 1.0;
            identity_col[i] = art++;
            break;
        case RowKind::equal:
            tab.t(i, art) = 1.0;
            identity_col[i] = art++;
            break;
        }
        tab.basis[i] = identity_col[i];
    }

    LpResult result;
    const int first_art = n + n_slack;

    if (n_art > 0) {
        Vector phase1 = Vector::Zero(tab.cols);
        phase1.tail(n_art).setConstant(-1.0);
        tab.load_objective(phase1);
        run_phase(tab, tab.cols, tol, result.pivots);
        const double scale = 1.0 + lp.b.cwiseAbs().sum();
        if (tab.rhs(m) < -1e-9 * scale) {
            result.status = LpStatus::infeasible;
            return result;
        }
        // Drive zero-level artificials out of the basis where a structural pivot exists.
        for (int i = 0; i < m; ++i) {
            if (tab.basis[i] < first_art) continue;
            int col = -1;
            double best = tol;
            for (int j = 0; j < first_art; ++j)
                if (std::abs(tab.t(i, j)) > best) {
                    best = std::abs(tab.t(i, j));
                    col = j;
                }
            if (col >= 0) tab.pivot(i, col);
        }
    }

    Vector phase2 = Vector::Zero(tab.cols);
    phase2.head(n) = lp.c;
    tab.load_objective(phase2);
    if (run_phase(tab, first_art, tol, result.pivots) == Outcome::unbounded) {
        result.status = LpStatus::unbounded;
        return result;
    }

    result.status = LpStatus::optimal;
    result.x = Vector::Zero(n);
    for (int i = 0; i < m; ++i)
        if (tab.basis[i] < n) result.x(tab.basis[i]) = std::max(0.0, tab.rhs(i));
    result.objective = lp.c.dot(result.x);
    result.duals = Vector::Zero(m);
    for (int i = 0; i < m; ++i) result.duals(i) = sign[i] * tab.t(m, identity_col[i]);
    return result;
}

} // namespace cmdp
