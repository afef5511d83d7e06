#pragma once

#include "cmdp/cmdp.hpp"
#include "cmdp/features.hpp"

#include <functional>
#include <vector>

namespace cmdp {

/// Weighted set of state-action pairs selected by greedy G-optimal design.
struct Coreset {
    /// Pair indices (s * A + a) in insertion order; a pair may repeat.
    std::vector<int> points;
    /// Uniform weight per entry of `points`.
    Vector omega;
    /// G_omega = sum_i omega_i phi_i phi_i^T.
    Matrix gram;
    /// (nu I + sum_i phi_i phi_i^T)^{-1}, maintained by rank-one updates.
    Matrix ginv;
    double nu = 1.0;
    double eps_prime = 0.0;
    /// Largest leverage seen at the start of each iteration; the last entry is the final sup.
    std::vector<double> gain_history;
    double sup_leverage = 0.0;
    /// True when the S*A iteration cap stopped the loop before the tolerance was met.
    bool hit_cap = false;

    int size() const noexcept { return static_cast<int>(points.size()); }
};

/// Called after each insertion with the updated coreset and the newly added pair.
using InsertCallback = std::function<void(const Coreset&, int pair_index)>;

/**
 * Greedy construction: repeatedly add the pair with the largest leverage
 * sqrt(phi^T G^dagger phi) while it exceeds eps_prime, updating G^dagger with
 * Sherman-Morrison. Ties go to the lowest pair index. Stops after S*A
 * insertions at most.
 */
Coreset build_coreset(const FeatureMap& features, double eps_prime, double nu = 1.0,
                      const InsertCallback& on_insert = {});

/// Every pair once with uniform weights; ginv is the directly inverted ridge Gram.
Coreset full_coreset(const FeatureMap& features, double nu = 1.0);

/// sqrt(phi^T ginv phi) under the coreset's ridge inverse.
double leverage(const Coreset& coreset, const Vector& phi);

/// Leverage of every pair of the feature map, in pair order.
Vector all_leverages(const Coreset& coreset, const FeatureMap& features);

/// (nu I + sum_i phi_i phi_i^T) for the coreset, built from scratch.
Matrix regularized_gram(const Coreset& coreset, const FeatureMap& features);

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix; eigenvalues below
/// rel_tol * max eigenvalue are treated as zero.
Matrix psd_pseudo_inverse(const Matrix& m, double rel_tol = 1e-10);

/// sqrt(phi^T G_omega^+ phi) with the pseudo-inverse of the weighted Gram matrix.
double weighted_leverage(const Matrix& gram_pinv, const Vector& phi);

} // namespace cmdp
