#include "cmdp/envs.hpp"

#include "cmdp/errors.hpp"
#include "cmdp/evaluation.hpp"
#include "cmdp/oracle.hpp"

#include <random>

namespace cmdp {

namespace {

Vector resolve_rho(const EnvSpec& spec, int n_states) {
    if (spec.rho_kind == "uniform") return Vector::Constant(n_states, 1.0 / n_states);
    if (spec.rho_kind == "point") {
        if (spec.rho_states.empty()) throw InvalidArgument("point rho needs at least one state");
        Vector rho = Vector::Zero(n_states);
        for (int s : spec.rho_states) {
            if (s < 0 || s >= n_states) throw InvalidArgument("rho state out of range");
            rho(s) += 1.0;
        }
        return rho / rho.sum();
    }
    if (spec.rho_kind == "custom") {
        if (static_cast<int>(spec.rho_custom.size()) != n_states)
            throw InvalidArgument("custom rho must have one entry per state");
        return Eigen::Map<const Vector>(spec.rho_custom.data(), n_states);
    }
    throw InvalidArgument("unknown rho kind: " + spec.rho_kind);
}

} // namespace

TabularCmdp make_gridworld(double gamma, std::optional<double> b, std::optional<Vector> rho) {
    using namespace gridworld;
    const int S = rows * cols;
    const int A = n_actions;
    Matrix p = Matrix::Zero(S * A, S);
    Matrix r = Matrix::Zero(S, A);
    Matrix c = Matrix::Zero(S, A);
    constexpr int dr[4] = {-1, 1, 0, 0};
    constexpr int dc[4] = {0, 0, 1, -1};
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            int next;
            if (s == state_a) {
                next = state_a_prime;
                r(s, a) = 1.0;
                c(s, a) = 0.1;
            } else if (s == state_b) {
                next = state_b_prime;
                r(s, a) = 0.5;
                c(s, a) = 1.0;
            } else {
                const int nr = s / cols + dr[a];
                const int nc = s % cols + dc[a];
                next = (nr < 0 || nr >= rows || nc < 0 || nc >= cols) ? s : nr * cols + nc;
            }
            p(s * A + a, next) = 1.0;
        }
    Vector start = rho ? *rho : Vector::Constant(S, 1.0 / S);
    TabularCmdp model(S, A, std::move(p), std::move(r), std::move(c), 0.0, std::move(start), gamma);
    if (b) return model.with_threshold(*b);
    return model.with_threshold(0.5 * value_iteration(model, model.constraint_reward()).j);
}

TabularCmdp make_random_cmdp(int n_states, int n_actions, double gamma, std::uint64_t seed) {
    if (n_states <= 0 || n_actions <= 0) throw InvalidArgument("random CMDP needs positive S and A");
    Rng rng(seed);
    std::exponential_distribution<double> expo(1.0);
    Matrix p(n_states * n_actions, n_states);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        for (int j = 0; j < n_states; ++j) p(i, j) = expo(rng.engine());
        p.row(i) /= p.row(i).sum();
    }
    Matrix r(n_states, n_actions);
    Matrix c(n_states, n_actions);
    for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) r(s, a) = rng.uniform();
    for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) c(s, a) = rng.uniform();
    TabularCmdp model(n_states, n_actions, std::move(p), std::move(r), std::move(c), 0.0,
                      Vector::Constant(n_states, 1.0 / n_states), gamma);
    const double b = scalar_value(model, Policy::uniform(n_states, n_actions), Signal::constraint);
    return model.with_threshold(b);
}

TabularCmdp make_env(const EnvSpec& spec) {
    if (spec.kind == EnvSpec::Kind::gridworld) {
        const int S = gridworld::rows * gridworld::cols;
        TabularCmdp model = make_gridworld(spec.gamma, 0.0, resolve_rho(spec, S));
        const double b = spec.b ? *spec.b : spec.b_fraction * value_iteration(model, model.constraint_reward()).j;
        return model.with_threshold(b);
    }
    TabularCmdp model = make_random_cmdp(spec.n_states, spec.n_actions, spec.gamma, spec.seed);
    model = model.with_rho(resolve_rho(spec, spec.n_states));
    if (spec.b) return model.with_threshold(*spec.b);
    return model.with_threshold(spec.b_fraction * value_iteration(model, model.constraint_reward()).j);
}

RolloutResult sample_rollout(const TabularCmdp& cmdp, const Policy& policy, StateAction start, int horizon,
                             Rng& rng, bool record_visits) {
    if (horizon < 1) throw InvalidArgument("rollout horizon must be at least 1");
    RolloutResult out;
    int s = start.state;
    int a = start.action;
    double discount = 1.0;
    for (int h = 0; h < horizon; ++h) {
        if (record_visits) out.visited.push_back(s);
        out.return_r += discount * cmdp.reward()(s, a);
        out.return_c += discount * cmdp.constraint_reward()(s, a);
        discount *= cmdp.gamma();
        if (h + 1 == horizon) break;
        s = rng.categorical(cmdp.next_state_dist(s, a), cmdp.n_states());
        a = rng.categorical(policy.row(s), cmdp.n_actions());
    }
    return out;
}

} // namespace cmdp
