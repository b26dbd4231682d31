#include "gpaf/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace gpaf {

const char *to_string(KernelMode mode) {
    switch (mode) {
        case KernelMode::Composite: return "composite";
        case KernelMode::RbfOnly: return "rbf_only";
        case KernelMode::LinearOnly: return "linear_only";
    }
    return "unknown";
}

KernelMode kernel_mode_from_string(const std::string &name) {
    if (name == "composite") return KernelMode::Composite;
    if (name == "rbf_only" || name == "rbf") return KernelMode::RbfOnly;
    if (name == "linear_only" || name == "linear") return KernelMode::LinearOnly;
    throw std::invalid_argument("unknown kernel mode: " + name);
}

namespace {

void check_lambda(double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("temporal lambda must lie in (0, 1]");
}

}  // namespace

KernelSpec::KernelSpec(KernelMode mode, HyperParams params, std::optional<double> temporal_lambda,
                       bool shared_length_scale)
    : mode_(mode), params_(std::move(params)), lambda_(temporal_lambda), shared_(shared_length_scale) {
    if (lambda_) check_lambda(*lambda_);
    if (uses_rbf() && params_.log_gamma.size() == 0)
        throw std::invalid_argument("RBF kernels need one length-scale per input dimension");
    if (mode_ == KernelMode::LinearOnly) {
        params_.log_gamma.resize(0);
        shared_ = false;
    }
    if (shared_) params_.log_gamma.setConstant(params_.log_gamma(0));
}

KernelSpec KernelSpec::rbf(Index dim, double alpha1, double gamma, double noise_var) {
    HyperParams p;
    p.log_alpha1 = std::log(alpha1);
    p.log_gamma = Vector::Constant(dim, std::log(gamma));
    p.log_alpha2 = 0.0;
    p.log_alpha3 = std::log(noise_var);
    return {KernelMode::RbfOnly, p};
}

KernelSpec KernelSpec::composite(Index dim, double alpha1, double gamma, double alpha2, double noise_var) {
    HyperParams p;
    p.log_alpha1 = std::log(alpha1);
    p.log_gamma = Vector::Constant(dim, std::log(gamma));
    p.log_alpha2 = std::log(alpha2);
    p.log_alpha3 = std::log(noise_var);
    return {KernelMode::Composite, p};
}

KernelSpec KernelSpec::linear(double sigma_w2, double noise_var) {
    HyperParams p;
    p.log_alpha2 = std::log(sigma_w2);
    p.log_alpha3 = std::log(noise_var);
    return {KernelMode::LinearOnly, p};
}

KernelSpec KernelSpec::with_temporal(std::optional<double> lambda) const {
    return {mode_, params_, lambda, shared_};
}

KernelSpec KernelSpec::with_shared_length_scale(bool shared) const {
    return {mode_, params_, lambda_, shared};
}

KernelSpec KernelSpec::with_noise_var(double noise_var) const {
    HyperParams p = params_;
    p.log_alpha3 = std::log(noise_var);
    return {mode_, p, lambda_, shared_};
}

Index KernelSpec::num_params() const {
    Index n = 1;  // noise
    if (uses_rbf()) n += 1 + (shared_ ? 1 : params_.log_gamma.size());
    if (uses_linear()) n += 1;
    return n;
}

Vector KernelSpec::packed() const {
    Vector v(num_params());
    Index k = 0;
    if (uses_rbf()) {
        v(k++) = params_.log_alpha1;
        const Index ng = shared_ ? 1 : params_.log_gamma.size();
        for (Index l = 0; l < ng; ++l) v(k++) = params_.log_gamma(l);
    }
    if (uses_linear()) v(k++) = params_.log_alpha2;
    v(k) = params_.log_alpha3;
    return v;
}

KernelSpec KernelSpec::with_packed(const Vector &packed) const {
    if (packed.size() != num_params()) throw std::invalid_argument("packed parameter vector has wrong length");
    HyperParams p = params_;
    Index k = 0;
    if (uses_rbf()) {
        p.log_alpha1 = packed(k++);
        if (shared_)
            p.log_gamma.setConstant(packed(k++));
        else
            for (Index l = 0; l < p.log_gamma.size(); ++l) p.log_gamma(l) = packed(k++);
    }
    if (uses_linear()) p.log_alpha2 = packed(k++);
    p.log_alpha3 = packed(k);
    return {mode_, p, lambda_, shared_};
}

std::vector<std::string> KernelSpec::param_names() const {
    std::vector<std::string> names;
    if (uses_rbf()) {
        names.emplace_back("log_alpha1");
        if (shared_)
            names.emplace_back("log_gamma");
        else
            for (Index l = 0; l < params_.log_gamma.size(); ++l) names.push_back("log_gamma" + std::to_string(l + 1));
    }
    if (uses_linear()) names.emplace_back("log_alpha2");
    names.emplace_back("log_alpha3");
    return names;
}

void KernelSpec::check_dim(Index d) const {
    if (uses_rbf() && d != params_.log_gamma.size())
        throw std::invalid_argument("input dimension " + std::to_string(d) + " does not match kernel dimension " +
                                    std::to_string(params_.log_gamma.size()));
}

double kernel_eval(const KernelSpec &spec, const Eigen::Ref<const Vector> &x, const Eigen::Ref<const Vector> &xp,
                   bool same_point) {
    if (x.size() != xp.size()) throw std::invalid_argument("kernel_eval: inputs have different dimensions");
    spec.check_dim(x.size());
    const HyperParams &p = spec.params();
    double value = 0.0;
    if (spec.uses_rbf()) {
        const double dist = (p.gamma().array() * (x - xp).array().square()).sum();
        value += p.alpha1() * std::exp(-dist);
    }
    if (spec.uses_linear()) value += p.alpha2() * x.dot(xp);
    if (same_point) value += p.alpha3();
    return value;
}

namespace {

// Squared ARD distance and RBF block; linear block is alpha2 X X^T.
Matrix rbf_block(const KernelSpec &spec, const Matrix &X) {
    const HyperParams &p = spec.params();
    const Index n = X.rows();
    const Vector g = p.gamma();
    Matrix K(n, n);
    for (Index i = 0; i < n; ++i) {
        K(i, i) = p.alpha1();
        for (Index j = 0; j < i; ++j) {
            const double dist = (g.array() * (X.row(i) - X.row(j)).transpose().array().square()).sum();
            K(i, j) = K(j, i) = p.alpha1() * std::exp(-dist);
        }
    }
    return K;
}

}  // namespace

Matrix signal_gram(const KernelSpec &spec, const Matrix &X) {
    const Index n = X.rows();
    if (n == 0) return Matrix(0, 0);
    spec.check_dim(X.cols());
    Matrix K = Matrix::Zero(n, n);
    if (spec.uses_rbf()) K += rbf_block(spec, X);
    if (spec.uses_linear()) {
        Matrix lin = spec.params().alpha2() * (X * X.transpose());
        // fill from one triangle so the result is exactly symmetric
        K += lin.selfadjointView<Eigen::Lower>();
    }
    return K;
}

Matrix gram(const KernelSpec &spec, const Matrix &X) {
    Matrix K = signal_gram(spec, X);
    K.diagonal().array() += spec.noise_var();
    return K;
}

Vector cross_cov(const KernelSpec &spec, const Matrix &X, const Eigen::Ref<const Vector> &x) {
    const Index n = X.rows();
    Vector k = Vector::Zero(n);
    if (n == 0) return k;
    if (X.cols() != x.size()) throw std::invalid_argument("cross_cov: dimension mismatch");
    spec.check_dim(x.size());
    const HyperParams &p = spec.params();
    if (spec.uses_rbf()) {
        const Vector g = p.gamma();
        for (Index i = 0; i < n; ++i) {
            const double dist = (g.array() * (X.row(i).transpose() - x).array().square()).sum();
            k(i) = p.alpha1() * std::exp(-dist);
        }
    }
    if (spec.uses_linear()) k += p.alpha2() * (X * x);
    return k;
}

std::vector<Matrix> gram_gradients(const KernelSpec &spec, const Matrix &X) {
    const Index n = X.rows();
    spec.check_dim(X.cols());
    const HyperParams &p = spec.params();
    std::vector<Matrix> grads;
    grads.reserve(static_cast<std::size_t>(spec.num_params()));
    if (spec.uses_rbf()) {
        const Matrix rbf = rbf_block(spec, X);
        grads.push_back(rbf);
        const Vector g = p.gamma();
        std::vector<Matrix> per_dim;
        for (Index l = 0; l < g.size(); ++l) {
            Matrix d(n, n);
            for (Index i = 0; i < n; ++i) {
                d(i, i) = 0.0;
                for (Index j = 0; j < i; ++j) {
                    const double diff = X(i, l) - X(j, l);
                    d(i, j) = d(j, i) = -g(l) * diff * diff * rbf(i, j);
                }
            }
            per_dim.push_back(std::move(d));
        }
        if (spec.shared_length_scale()) {
            Matrix sum = Matrix::Zero(n, n);
            for (const auto &d : per_dim) sum += d;
            grads.push_back(std::move(sum));
        } else {
            for (auto &d : per_dim) grads.push_back(std::move(d));
        }
    }
    if (spec.uses_linear()) {
        Matrix lin = p.alpha2() * (X * X.transpose());
        grads.emplace_back(lin.selfadjointView<Eigen::Lower>());
    }
    grads.push_back(p.alpha3() * Matrix::Identity(n, n));
    return grads;
}

double temporal_factor(double lambda, long t, long tp) {
    check_lambda(lambda);
    const double lag = static_cast<double>(std::labs(t - tp));
    return std::pow(lambda, 0.5 * lag);
}

Matrix st_gram(const KernelSpec &spec, const Matrix &X, const std::vector<long> &timestamps) {
    const auto lambda = spec.temporal_lambda();
    if (!lambda) throw std::invalid_argument("st_gram requires a temporal lambda");
    if (static_cast<Index>(timestamps.size()) != X.rows())
        throw std::invalid_argument("st_gram: one timestamp per row required");
    Matrix K = signal_gram(spec, X);
    for (Index i = 0; i < K.rows(); ++i)
        for (Index j = 0; j < i; ++j) {
            const double f = temporal_factor(*lambda, timestamps[i], timestamps[j]);
            K(i, j) *= f;
            K(j, i) = K(i, j);
        }
    K.diagonal().array() += spec.noise_var();
    return K;
}

}  // namespace gpaf
