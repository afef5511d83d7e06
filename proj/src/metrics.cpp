#include "cmdp/metrics.hpp"

#include "cmdp/errors.hpp"

#include <algorithm>

namespace cmdp {

OgCv compute_og_cv(std::span<const ValuePair> history, double j_r_star, double b) {
    if (history.empty()) throw InvalidArgument("OG/CV need a non-empty history");
    double gap = 0.0;
    double violation = 0.0;
    for (const auto& v : history) {
        gap += j_r_star - v.j_r;
        violation += b - v.j_c;
    }
    const double T = static_cast<double>(history.size());
    return {gap / T, std::max(violation, 0.0) / T};
}

double signed_violation(std::span<const ValuePair> history, double b) {
    if (history.empty()) throw InvalidArgument("violation needs a non-empty history");
    double violation = 0.0;
    for (const auto& v : history) violation += b - v.j_c;
    return violation / static_cast<double>(history.size());
}

double primal_regret_term(const Policy& iterate, const QFn& q_l, const Policy& comparator, const Vector& nu) {
    if (iterate.n_states() != comparator.n_states() || q_l.rows() != iterate.n_states() ||
        nu.size() != iterate.n_states())
        throw InvalidArgument("regret inputs have mismatched shapes");
    const Vector per_state = (comparator.probs() - iterate.probs()).cwiseProduct(q_l).rowwise().sum();
    return nu.dot(per_state);
}

double primal_regret(std::span<const PrimalLoss> iterates, const Policy& comparator, const Vector& nu) {
    double total = 0.0;
    for (const auto& it : iterates) total += primal_regret_term(it.policy, it.q_r + it.lambda * it.q_c, comparator, nu);
    return total;
}

double dual_regret(std::span<const double> lambdas, std::span<const double> est_values, double lambda_ref,
                   double b) {
    if (lambdas.size() != est_values.size()) throw InvalidArgument("dual regret inputs differ in length");
    double total = 0.0;
    for (std::size_t t = 0; t < lambdas.size(); ++t) total += (lambdas[t] - lambda_ref) * (est_values[t] - b);
    return total;
}

} // namespace cmdp
