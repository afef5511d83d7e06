#include "cmdp/estimation.hpp"

#include "cmdp/envs.hpp"
#include "cmdp/errors.hpp"
#include "cmdp/evaluation.hpp"
#include "cmdp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cmdp {

int horizon_for(double eps_trunc, double gamma) {
    if (!(eps_trunc > 0.0)) throw InvalidArgument("truncation tolerance must be positive");
    if (gamma < 0.0 || gamma >= 1.0) throw InvalidArgument("gamma must be in [0, 1)");
    if (gamma == 0.0) return 1;
    const double target = eps_trunc * (1.0 - gamma);
    if (target >= 1.0) return 1;
    return std::max(1, static_cast<int>(std::ceil(std::log(target) / std::log(gamma))));
}

RolloutEstimates rollout_q_estimates(const TabularCmdp& cmdp, const Policy& policy, const Coreset& coreset,
                                     int m, int horizon, std::uint64_t seed, bool record_visits) {
    if (m < 1) throw InvalidArgument("need at least one trajectory per point");
    if (horizon < 1) throw InvalidArgument("rollout horizon must be at least 1");
    const int n = coreset.size();
    RolloutEstimates out;
    out.q_r = Vector::Zero(n);
    out.q_c = Vector::Zero(n);
    std::set<int> visited;
    for (int i = 0; i < n; ++i) {
        const StateAction start = cmdp.pair_at(coreset.points[i]);
        double sum_r = 0.0;
        double sum_c = 0.0;
        for (int j = 0; j < m; ++j) {
            Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)}));
            const RolloutResult ret = sample_rollout(cmdp, policy, start, horizon, rng, record_visits);
            sum_r += ret.return_r;
            sum_c += ret.return_c;
            if (record_visits) visited.insert(ret.visited.begin(), ret.visited.end());
        }
        out.q_r(i) = sum_r / m;
        out.q_c(i) = sum_c / m;
    }
    out.visited.assign(visited.begin(), visited.end());
    return out;
}

Vector wls_fit(const Coreset& coreset, const FeatureMap& features, const Vector& q, double nu) {
    if (q.size() != coreset.size()) throw InvalidArgument("need one target per coreset entry");
    if (nu < 0.0) throw InvalidArgument("ridge must be nonnegative");
    const int d = features.dim();
    Matrix g = nu * Matrix::Identity(d, d);
    Vector rhs = Vector::Zero(d);
    for (int i = 0; i < coreset.size(); ++i) {
        const Vector phi = features.row(coreset.points[i]).transpose();
        g.noalias() += coreset.omega(i) * phi * phi.transpose();
        rhs += coreset.omega(i) * q(i) * phi;
    }
    if (nu > 0.0) return g.llt().solve(rhs);
    return psd_pseudo_inverse(g) * rhs;
}

QPair predict_q(const QEstimate& estimate, int s, int a) {
    if (!estimate.features) throw InvalidArgument("estimate carries no feature map");
    const Vector phi = estimate.features->featurize(s, a);
    return {phi.dot(estimate.theta_r), phi.dot(estimate.theta_c)};
}

std::pair<QFn, QFn> predict_tables(const QEstimate& estimate) {
    if (!estimate.features) throw InvalidArgument("estimate carries no feature map");
    const FeatureMap& f = *estimate.features;
    const Vector flat_r = f.design() * estimate.theta_r;
    const Vector flat_c = f.design() * estimate.theta_c;
    QFn q_r(f.n_states(), f.n_actions());
    QFn q_c(f.n_states(), f.n_actions());
    for (int s = 0; s < f.n_states(); ++s)
        for (int a = 0; a < f.n_actions(); ++a) {
            q_r(s, a) = flat_r(s * f.n_actions() + a);
            q_c(s, a) = flat_c(s * f.n_actions() + a);
        }
    return {std::move(q_r), std::move(q_c)};
}

QTables exact_estimator(const TabularCmdp& cmdp, const Policy& policy) {
    return {exact_eval(cmdp, policy, Signal::reward).q, exact_eval(cmdp, policy, Signal::constraint).q};
}

double estimate_constraint_value(const Vector& rho, const Policy& policy, const QFn& q_c) {
    if (rho.size() != policy.n_states() || q_c.rows() != policy.n_states() || q_c.cols() != policy.n_actions())
        throw InvalidArgument("shape mismatch in constraint value estimate");
    return rho.dot(policy.probs().cwiseProduct(q_c).rowwise().sum());
}

double hoeffding_band(double gamma, int n_pairs, double delta, int m, int horizon) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must be in (0, 1)");
    if (m < 1 || n_pairs < 1) throw InvalidArgument("need positive m and pair count");
    const double width = std::sqrt(std::log(2.0 * n_pairs / delta) / (2.0 * m)) / (1.0 - gamma);
    return width + std::pow(gamma, horizon) / (1.0 - gamma);
}

} // namespace cmdp
