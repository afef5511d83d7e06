#include "cmdp/solvers.hpp"

#include "cmdp/errors.hpp"
#include "cmdp/estimation.hpp"
#include "cmdp/evaluation.hpp"
#include "cmdp/metrics.hpp"
#include "cmdp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cmdp {

namespace {

Matrix normalize_rows(Matrix m) {
    for (Eigen::Index s = 0; s < m.rows(); ++s) m.row(s) /= std::max(m.row(s).sum(), log_floor);
    return m;
}

Policy keep_unmasked(const Policy& old_pi, const Policy& new_pi, const std::vector<bool>* mask) {
    if (!mask) return new_pi;
    Matrix probs = old_pi.probs();
    for (int s = 0; s < old_pi.n_states(); ++s)
        if ((*mask)[s]) probs.row(s) = new_pi.row(s);
    return Policy(std::move(probs));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_table(const QFn& q, const Policy& pi) {
    if (q.rows() != pi.n_states() || q.cols() != pi.n_actions())
        throw InvalidArgument("action-value table does not match the policy shape");
}

} // namespace

Policy mirror_ascent_step(const Policy& pi, const QFn& q_l, double eta1) {
    if (eta1 < 0.0) throw InvalidArgument("mirror step size must be nonnegative");
    check_table(q_l, pi);
    Matrix logits = eta1 * q_l;
    logits.colwise() -= logits.rowwise().maxCoeff();
    Matrix probs = pi.probs().cwiseProduct(logits.array().exp().matrix());
    return Policy(normalize_rows(std::move(probs)));
}

StepSizes gda_theory_stepsizes(int n, int n_actions, double gamma, double U) {
    if (n < 1) throw InvalidArgument("step-size horizon must be at least 1");
    if (n_actions < 1) throw InvalidArgument("need at least one action");
    if (U < 0.0) throw InvalidArgument("U must be nonnegative");
    StepSizes out;
    out.eta1 = std::sqrt(2.0 * std::log(static_cast<double>(n_actions)) / n) * (1.0 - gamma) / (1.0 + U);
    out.eta2 = U * (1.0 - gamma) / std::sqrt(static_cast<double>(n));
    return out;
}

double projected_gd_dual_step(double lambda, double est_jc, double b, double eta2, double U) {
    return std::clamp(lambda - eta2 * (est_jc - b), 0.0, U);
}

Matrix normalized_advantage(const QFn& q_l, const Policy& pi, double U, double gamma) {
    check_table(q_l, pi);
    const Vector baseline = pi.probs().cwiseProduct(q_l).rowwise().sum();
    Matrix adv = q_l;
    adv.colwise() -= baseline;
    return adv * ((1.0 - gamma) / (1.0 + U));
}

QFn entropy_regularized_q(const QFn& q_r, const QFn& q_c, double lambda, double nu, const Policy& pi) {
    check_table(q_r, pi);
    check_table(q_c, pi);
    QFn q = q_r + lambda * q_c;
    if (nu != 0.0) q -= nu * pi.probs().cwiseMax(log_floor).array().log().matrix();
    return q;
}

Policy crpo_step(const Policy& pi, const QFn& q_r, const QFn& q_c, double est_jc, double b, double eta_tol,
                 double alpha_pi) {
    return est_jc >= b + eta_tol ? mirror_ascent_step(pi, q_r, alpha_pi) : mirror_ascent_step(pi, q_c, alpha_pi);
}

PrimalCoinState::PrimalCoinState(Policy base, int horizon) : base_(std::move(base)), horizon_(horizon) {
    if (horizon_ < 1) throw InvalidArgument("coin-betting horizon must be at least 1");
    w_ = Matrix::Zero(base_.n_states(), base_.n_actions());
    s1_ = w_;
    s2_ = w_;
}

Policy PrimalCoinState::step(const Matrix& advantage, const std::vector<bool>* mask) {
    if (t_ >= horizon_) throw InvalidArgument("coin-betting primal advanced past its horizon");
    if (advantage.rows() != w_.rows() || advantage.cols() != w_.cols())
        throw InvalidArgument("advantage table has the wrong shape");
    if (mask && static_cast<int>(mask->size()) != w_.rows()) throw InvalidArgument("state mask has the wrong size");
    const double denom = (t_ + 1) + horizon_ / 2.0;
    for (Eigen::Index s = 0; s < w_.rows(); ++s) {
        if (mask && !(*mask)[s]) continue;
        for (Eigen::Index a = 0; a < w_.cols(); ++a) {
            const double adv = advantage(s, a);
            const double clipped = w_(s, a) > 0.0 ? adv : std::max(adv, 0.0);
            s1_(s, a) += clipped;
            s2_(s, a) += clipped * w_(s, a);
            w_(s, a) = s1_(s, a) / denom * (1.0 + s2_(s, a));
        }
    }
    ++t_;
    return policy();
}

Policy PrimalCoinState::policy() const {
    Matrix probs = base_.probs().cwiseProduct(w_.cwiseMax(0.0));
    for (Eigen::Index s = 0; s < probs.rows(); ++s) {
        const double total = probs.row(s).sum();
        if (total > 0.0)
            probs.row(s) /= total;
        else
            probs.row(s) = base_.row(s);
    }
    return Policy(std::move(probs));
}

DualLearner::DualLearner(double lambda0, double upper) : lambda0_(lambda0), upper_(upper) {
    if (!(upper >= 0.0) || !std::isfinite(upper)) throw InvalidArgument("U must be finite and nonnegative");
    if (lambda0 < 0.0 || lambda0 > upper) throw InvalidArgument("lambda_0 must lie in [0, U]");
    lambda_ = lambda0;
}

double DualLearner::clip(double x) const { return std::clamp(x, 0.0, upper_); }

ProjectedGdDual::ProjectedGdDual(double lambda0, double eta2, double upper) : DualLearner(lambda0, upper) {
    set_eta2(eta2);
}

void ProjectedGdDual::set_eta2(double eta2) {
    if (eta2 < 0.0) throw InvalidArgument("dual step size must be nonnegative");
    eta2_ = eta2;
}

double ProjectedGdDual::step(double est_jc, double b) {
    lambda_ = projected_gd_dual_step(lambda_, est_jc, b, eta2_, upper_);
    return lambda_;
}

CoinBettingDual::CoinBettingDual(double lambda0, double gamma, double upper)
    : DualLearner(lambda0, upper), gamma_(gamma) {
    if (gamma < 0.0 || gamma >= 1.0) throw InvalidArgument("gamma must be in [0, 1)");
}

double CoinBettingDual::step(double est_jc, double b) {
    const double g = est_jc - b;
    b_sum_ += g;
    c_sum_ += std::abs(g);
    w_sum_ += (lambda_ - lambda0_) * g;
    const double horizon = 1.0 / (1.0 - gamma_);
    beta_ = (1.0 - gamma_) * (2.0 * sigmoid(2.0 * b_sum_ / (horizon + c_sum_)) - 1.0);
    lambda_ = clip(lambda0_ - beta_ * (horizon - w_sum_));
    return lambda_;
}

PracticalCoinBettingDual::PracticalCoinBettingDual(double lambda0, double alpha_lambda, double upper)
    : DualLearner(lambda0, upper), alpha_(alpha_lambda) {
    if (!(alpha_lambda > 0.0)) throw InvalidArgument("alpha_lambda must be positive");
}

double PracticalCoinBettingDual::step(double est_jc, double b) {
    const double g = b - est_jc;
    l_ = std::max(l_, std::abs(g));
    sum_g_ += g;
    sum_abs_g_ += std::abs(g);
    sum_pos_wealth_ += std::max((lambda_ - lambda0_) * g, 0.0);
    if (l_ == 0.0) {
        lambda_ = clip(lambda0_);
        return lambda_;
    }
    const double fraction = sum_g_ / (l_ * std::max(sum_abs_g_ + l_, alpha_ * l_));
    lambda_ = clip(lambda0_ + fraction * (l_ + sum_pos_wealth_));
    return lambda_;
}

QEstimator make_exact_estimator(const TabularCmdp& cmdp) {
    return [&cmdp](const Policy& policy, std::uint64_t) {
        QTables t = exact_estimator(cmdp, policy);
        return EstimatorOutput{std::move(t.q_r), std::move(t.q_c), {}};
    };
}

FeasibilityResult estimate_feasibility_and_u(const TabularCmdp& cmdp, int iterations, const QEstimator& estimator,
                                             std::uint64_t stream_base) {
    if (iterations < 1) throw InvalidArgument("feasibility search needs at least one iteration");
    const Policy start = Policy::uniform(cmdp.n_states(), cmdp.n_actions());
    PrimalCoinState coin(start, iterations);
    Policy pi = start;
    FeasibilityResult out;
    double best = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < iterations; ++t) {
        const EstimatorOutput est = estimator(pi, stream_base + t);
        const double jc = estimate_constraint_value(cmdp.rho(), pi, est.q_c);
        if (jc > best) {
            best = jc;
            out.pi_tilde = pi;
        }
        pi = coin.step(normalized_advantage(est.q_c, pi, 0.0, cmdp.gamma()));
    }
    out.zeta_hat = best - cmdp.threshold();
    if (out.zeta_hat < 0.0) throw InfeasibleError("estimated constraint slack is negative", out.zeta_hat);
    out.feasible = out.zeta_hat > 0.0;
    out.boundary = out.zeta_hat == 0.0;
    out.upper = out.feasible ? 2.0 / (out.zeta_hat * (1.0 - cmdp.gamma())) : 0.0;
    return out;
}

std::string_view to_string(Algorithm algorithm) {
    switch (algorithm) {
    case Algorithm::cbp:
        return "cbp";
    case Algorithm::cbp_practical:
        return "cbp_practical";
    case Algorithm::gda:
        return "gda";
    case Algorithm::gda_theory:
        return "gda_theory";
    case Algorithm::crpo:
        return "crpo";
    }
    return "unknown";
}

Algorithm algorithm_from_string(std::string_view name) {
    for (Algorithm a : {Algorithm::cbp, Algorithm::cbp_practical, Algorithm::gda, Algorithm::gda_theory,
                        Algorithm::crpo})
        if (to_string(a) == name) return a;
    throw InvalidArgument("unknown algorithm: " + std::string(name));
}

namespace {

constexpr std::uint64_t driver_stream = 1ULL << 32;

void validate(const SolverConfig& c) {
    if (c.T < 0) throw InvalidArgument("T must be nonnegative");
    if (c.feasibility_iterations < 1) throw InvalidArgument("feasibility_iterations must be at least 1");
    if (c.nu_ent < 0.0) throw InvalidArgument("entropy weight must be nonnegative");
    if (c.lambda0 < 0.0) throw InvalidArgument("lambda_0 must be nonnegative");
    if (c.upper_override && !(*c.upper_override > 0.0)) throw InvalidArgument("U override must be positive");
    switch (c.algorithm) {
    case Algorithm::gda:
        if (c.alpha_pi < 0.0 || c.alpha_lambda < 0.0) throw InvalidArgument("GDA step sizes must be nonnegative");
        break;
    case Algorithm::cbp_practical:
        if (!(c.alpha_lambda > 0.0)) throw InvalidArgument("alpha_lambda must be positive");
        break;
    case Algorithm::crpo:
        if (c.alpha_pi < 0.0) throw InvalidArgument("CRPO step size must be nonnegative");
        break;
    default:
        break;
    }
}

} // namespace

IterateLog run_algorithm(const TabularCmdp& cmdp, const SolverConfig& config, const QEstimator& estimator) {
    validate(config);
    IterateLog log;
    log.b = cmdp.threshold();

    // A supplied U skips the feasibility pre-run entirely.
    FeasibilityResult feas;
    if (config.upper_override) {
        feas.feasible = true;
        feas.zeta_hat = std::numeric_limits<double>::quiet_NaN();
        feas.upper = *config.upper_override;
    } else {
        feas = estimate_feasibility_and_u(cmdp, config.feasibility_iterations, estimator);
    }
    log.zeta_hat = feas.zeta_hat;
    log.upper = feas.upper;
    if (feas.boundary) {
        log.boundary = true;
        log.final_policy = feas.pi_tilde;
        return log;
    }
    const double U = log.upper;
    if (config.lambda0 > U) throw InvalidArgument("lambda_0 exceeds U");

    const LpSolution lp = solve_constrained_lp(cmdp);
    log.j_r_star = lp.j_r_star;
    log.comparator = lp.optimal_policy;
    const Vector nu_star = discounted_occupancy(cmdp, lp.optimal_policy).state_dist;

    const int S = cmdp.n_states();
    const int A = cmdp.n_actions();
    const int T = config.T;
    Policy pi = Policy::uniform(S, A);
    std::unique_ptr<PrimalCoinState> coin;
    std::unique_ptr<DualLearner> dual;
    ProjectedGdDual* gd_dual = nullptr;

    switch (config.algorithm) {
    case Algorithm::cbp:
        if (T > 0) coin = std::make_unique<PrimalCoinState>(pi, T);
        dual = std::make_unique<CoinBettingDual>(config.lambda0, cmdp.gamma(), U);
        break;
    case Algorithm::cbp_practical:
        if (T > 0) coin = std::make_unique<PrimalCoinState>(pi, T);
        dual = std::make_unique<PracticalCoinBettingDual>(config.lambda0, config.alpha_lambda, U);
        break;
    case Algorithm::gda:
        log.eta1 = config.alpha_pi;
        log.eta2 = config.alpha_lambda;
        break;
    case Algorithm::gda_theory:
        if (T > 0) {
            const StepSizes st = gda_theory_stepsizes(config.anytime_steps ? 1 : T, A, cmdp.gamma(), U);
            log.eta1 = st.eta1;
            log.eta2 = st.eta2;
        }
        break;
    case Algorithm::crpo:
        log.eta1 = config.alpha_pi;
        break;
    }
    if (config.algorithm == Algorithm::gda || config.algorithm == Algorithm::gda_theory) {
        auto owned = std::make_unique<ProjectedGdDual>(config.lambda0, log.eta2, U);
        gd_dual = owned.get();
        dual = std::move(owned);
    }

    double sum_gap = 0.0;
    double sum_violation = 0.0;
    double primal_regret_sum = 0.0;
    double dual0 = 0.0;
    double dual_u = 0.0;
    log.records.reserve(T);

    for (int t = 0; t < T; ++t) {
        const EstimatorOutput est = estimator(pi, driver_stream + static_cast<std::uint64_t>(t));
        const double est_jc = estimate_constraint_value(cmdp.rho(), pi, est.q_c);
        const double lambda = dual ? dual->lambda() : 0.0;

        IterateRecord rec;
        rec.iter = t;
        rec.j_r = scalar_value(cmdp, pi, Signal::reward);
        rec.j_c = scalar_value(cmdp, pi, Signal::constraint);
        rec.est_jc = est_jc;
        rec.lambda = lambda;
        sum_gap += log.j_r_star - rec.j_r;
        sum_violation += log.b - rec.j_c;
        primal_regret_sum += primal_regret_term(pi, est.q_r + lambda * est.q_c, lp.optimal_policy, nu_star);
        dual0 += lambda * (est_jc - log.b);
        dual_u += (lambda - U) * (est_jc - log.b);
        rec.og_running = sum_gap / (t + 1);
        rec.cv_running = std::max(sum_violation, 0.0) / (t + 1);
        rec.primal_regret_running = primal_regret_sum;
        rec.dual_regret_at_0 = dual0;
        rec.dual_regret_at_u = dual_u;
        log.records.push_back(rec);

        std::vector<bool> mask_storage;
        const std::vector<bool>* mask = nullptr;
        if (config.visited_only && !est.visited.empty()) {
            mask_storage.assign(S, false);
            for (int s : est.visited) mask_storage[s] = true;
            mask = &mask_storage;
        }

        const QFn q_l = entropy_regularized_q(est.q_r, est.q_c, lambda, config.nu_ent, pi);
        switch (config.algorithm) {
        case Algorithm::cbp:
        case Algorithm::cbp_practical:
            pi = coin->step(normalized_advantage(q_l, pi, U, cmdp.gamma()), mask);
            break;
        case Algorithm::gda:
        case Algorithm::gda_theory: {
            double eta1 = log.eta1;
            if (config.algorithm == Algorithm::gda_theory && config.anytime_steps) {
                const StepSizes st = gda_theory_stepsizes(t + 1, A, cmdp.gamma(), U);
                eta1 = st.eta1;
                gd_dual->set_eta2(st.eta2);
            }
            pi = keep_unmasked(pi, mirror_ascent_step(pi, q_l, eta1), mask);
            break;
        }
        case Algorithm::crpo: {
            const QFn zero = QFn::Zero(S, A);
            const QFn ent_r = entropy_regularized_q(est.q_r, zero, 0.0, config.nu_ent, pi);
            const QFn ent_c = entropy_regularized_q(est.q_c, zero, 0.0, config.nu_ent, pi);
            pi = keep_unmasked(pi, crpo_step(pi, ent_r, ent_c, est_jc, log.b, config.crpo_eta, config.alpha_pi), mask);
            break;
        }
        }
        if (dual) dual->step(est_jc, log.b);
    }
    log.final_policy = pi;
    return log;
}

} // namespace cmdp
