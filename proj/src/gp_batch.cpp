#include "gpaf/gp_batch.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gpaf {

void Dataset::validate() const {
    if (y.size() != X.rows()) throw std::invalid_argument("dataset: X and y have different lengths");
    if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("dataset: non-finite values");
    if (!t.empty() && static_cast<Index>(t.size()) != X.rows())
        throw std::invalid_argument("dataset: timestamp count does not match sample count");
}

Matrix training_covariance(const Dataset &data, const KernelSpec &spec) {
    if (spec.temporal_lambda()) {
        if (static_cast<Index>(data.t.size()) != data.size())
            throw std::invalid_argument("spatio-temporal kernel requires timestamps");
        return st_gram(spec, data.X, data.t);
    }
    return gram(spec, data.X);
}

BatchGP BatchGP::fit(Dataset data, KernelSpec spec) {
    data.validate();
    if (data.size() > 0) spec.check_dim(data.dim());
    CholeskyFactor chol = CholeskyFactor::compute(training_covariance(data, spec));
    Vector weights = data.size() > 0 ? chol.solve(data.y) : Vector();
    return {std::move(data), std::move(spec), std::move(chol), std::move(weights)};
}

PredictiveDistribution BatchGP::predict(const Eigen::Ref<const Vector> &x, long t) const {
    if (data_.size() > 0 && x.size() != data_.dim()) throw std::invalid_argument("predict: dimension mismatch");
    const double prior = signal_eval(spec_, x, x);
    PredictiveDistribution out;
    if (data_.size() == 0) {
        out.var_latent = prior;
    } else {
        Vector kk = cross_cov(spec_, data_.X, x);
        if (const auto lambda = spec_.temporal_lambda())
            for (Index i = 0; i < kk.size(); ++i) kk(i) *= temporal_factor(*lambda, data_.t[i], t);
        out.mean = kk.dot(weights_);
        const Vector v = chol_.lower.triangularView<Eigen::Lower>().solve(kk);
        out.var_latent = std::max(prior - v.squaredNorm(), 0.0);
    }
    out.var_output = out.var_latent + spec_.noise_var();
    return out;
}

namespace {

struct Factorized {
    CholeskyFactor chol;
    Vector alpha;
    double value;
};

Factorized factorize(const Dataset &data, const KernelSpec &spec) {
    data.validate();
    if (data.size() < 1) throw std::invalid_argument("log marginal likelihood needs at least one sample");
    spec.check_dim(data.dim());
    CholeskyFactor chol = CholeskyFactor::compute(training_covariance(data, spec));
    Vector alpha = chol.solve(data.y);
    const double n = static_cast<double>(data.size());
    const double value =
        -0.5 * data.y.dot(alpha) - 0.5 * chol.log_det() - 0.5 * n * std::log(2.0 * std::numbers::pi);
    return {std::move(chol), std::move(alpha), value};
}

}  // namespace

double log_marginal_likelihood(const Dataset &data, const KernelSpec &spec) {
    return factorize(data, spec).value;
}

LmlEvaluation lml_with_gradient(const Dataset &data, const KernelSpec &spec) {
    Factorized f = factorize(data, spec);
    const Index n = data.size();
    // W = alpha alpha^T - C^{-1};  dLML/dtheta = tr(W dC) / 2
    Matrix W = -f.chol.solve(Matrix(Matrix::Identity(n, n)));
    W.noalias() += f.alpha * f.alpha.transpose();

    std::vector<Matrix> grads = gram_gradients(spec, data.X);
    if (const auto lambda = spec.temporal_lambda()) {
        Matrix T(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) T(i, j) = temporal_factor(*lambda, data.t[i], data.t[j]);
        // the noise gradient (last) is not modulated by the temporal factor
        for (std::size_t j = 0; j + 1 < grads.size(); ++j) grads[j] = grads[j].cwiseProduct(T);
    }
    Vector g(static_cast<Index>(grads.size()));
    for (std::size_t j = 0; j < grads.size(); ++j) g(static_cast<Index>(j)) = 0.5 * W.cwiseProduct(grads[j]).sum();
    return {f.value, std::move(g)};
}

Vector lml_gradient(const Dataset &data, const KernelSpec &spec) {
    return lml_with_gradient(data, spec).gradient;
}

}  // namespace gpaf
