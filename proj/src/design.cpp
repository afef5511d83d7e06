#include "cmdp/design.hpp"

#include "cmdp/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace cmdp {

namespace {

Vector leverages_sq(const Matrix& ginv, const Matrix& design) {
    return (design * ginv).cwiseProduct(design).rowwise().sum().cwiseMax(0.0);
}

void finalize_weights(Coreset& core, const FeatureMap& features) {
    const int n = core.size();
    core.omega = n > 0 ? Vector::Constant(n, 1.0 / n) : Vector();
    core.gram = Matrix::Zero(features.dim(), features.dim());
    for (int i = 0; i < n; ++i) {
        const Vector phi = features.row(core.points[i]).transpose();
        core.gram.noalias() += core.omega(i) * phi * phi.transpose();
    }
}

} // namespace

Coreset build_coreset(const FeatureMap& features, double eps_prime, double nu, const InsertCallback& on_insert) {
    if (!(eps_prime > 0.0)) throw InvalidArgument("eps_prime must be positive");
    if (!(nu > 0.0)) throw InvalidArgument("coreset ridge nu must be positive");
    const Matrix& design = features.design();
    if (design.rows() == 0) throw InvalidArgument("empty state-action enumeration");
    const int d = features.dim();
    const int cap = static_cast<int>(design.rows());

    Coreset core;
    core.nu = nu;
    core.eps_prime = eps_prime;
    core.ginv = Matrix::Identity(d, d) / nu;

    for (;;) {
        const Vector lev = leverages_sq(core.ginv, design).cwiseSqrt();
        Eigen::Index best = 0;
        // maxCoeff keeps the first maximum, i.e. the lowest pair index.
        const double g_max = lev.maxCoeff(&best);
        core.gain_history.push_back(g_max);
        core.sup_leverage = g_max;
        if (g_max <= eps_prime) break;
        if (core.size() >= cap) {
            core.hit_cap = true;
            break;
        }
        const Vector phi = design.row(best).transpose();
        const Vector u = core.ginv * phi;
        core.ginv -= (u * u.transpose()) / (1.0 + phi.dot(u));
        core.ginv = 0.5 * (core.ginv + core.ginv.transpose());
        core.points.push_back(static_cast<int>(best));
        if (on_insert) {
            finalize_weights(core, features);
            on_insert(core, static_cast<int>(best));
        }
    }
    finalize_weights(core, features);
    return core;
}

Coreset full_coreset(const FeatureMap& features, double nu) {
    if (nu < 0.0) throw InvalidArgument("coreset ridge nu must be nonnegative");
    Coreset core;
    core.nu = nu;
    const int n = static_cast<int>(features.design().rows());
    for (int i = 0; i < n; ++i) core.points.push_back(i);
    finalize_weights(core, features);
    const Matrix g = regularized_gram(core, features);
    core.ginv = nu > 0.0 ? Matrix(g.llt().solve(Matrix::Identity(g.rows(), g.cols()))) : psd_pseudo_inverse(g);
    core.sup_leverage = all_leverages(core, features).maxCoeff();
    core.gain_history.push_back(core.sup_leverage);
    return core;
}

double leverage(const Coreset& coreset, const Vector& phi) {
    if (phi.size() != coreset.ginv.rows()) throw InvalidArgument("feature vector has the wrong dimension");
    return std::sqrt(std::max(0.0, phi.dot(coreset.ginv * phi)));
}

Vector all_leverages(const Coreset& coreset, const FeatureMap& features) {
    return leverages_sq(coreset.ginv, features.design()).cwiseSqrt();
}

Matrix regularized_gram(const Coreset& coreset, const FeatureMap& features) {
    Matrix g = coreset.nu * Matrix::Identity(features.dim(), features.dim());
    for (int p : coreset.points) {
        const Vector phi = features.row(p).transpose();
        g.noalias() += phi * phi.transpose();
    }
    return g;
}

Matrix psd_pseudo_inverse(const Matrix& m, double rel_tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()));
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    const Vector& ev = eig.eigenvalues();
    const double cutoff = rel_tol * std::max(ev.cwiseAbs().maxCoeff(), 0.0);
    Vector inv(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) inv(i) = ev(i) > cutoff ? 1.0 / ev(i) : 0.0;
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

double weighted_leverage(const Matrix& gram_pinv, const Vector& phi) {
    return std::sqrt(std::max(0.0, phi.dot(gram_pinv * phi)));
}

} // namespace cmdp
