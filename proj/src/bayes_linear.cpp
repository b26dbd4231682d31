#include <stdexcept>

#include "gpaf/gp_batch.hpp"

namespace gpaf {

BayesLinearModel BayesLinearModel::fit(const Dataset &data, double sigma_w2, double sigma_nu2) {
    if (!(sigma_w2 > 0.0) || !(sigma_nu2 > 0.0)) throw std::invalid_argument("prior and noise variances must be > 0");
    data.validate();
    const Index d = data.dim();
    // posterior precision  X^T X / s_nu^2 + I / s_w^2
    Matrix precision = data.X.transpose() * data.X / sigma_nu2;
    precision.diagonal().array() += 1.0 / sigma_w2;
    const Eigen::LLT<Matrix> llt(precision);

    BayesLinearModel m;
    m.sigma_w_ = llt.solve(Matrix::Identity(d, d));
    symmetrize(m.sigma_w_);
    m.mu_w_ = llt.solve(Vector(data.X.transpose() * data.y)) / sigma_nu2;
    m.sigma_w2_ = sigma_w2;
    m.sigma_nu2_ = sigma_nu2;
    return m;
}

PredictiveDistribution BayesLinearModel::predict(const Eigen::Ref<const Vector> &x) const {
    if (x.size() != mu_w_.size()) throw std::invalid_argument("blr predict: dimension mismatch");
    PredictiveDistribution out;
    out.mean = x.dot(mu_w_);
    out.var_latent = std::max(x.dot(sigma_w_ * x), 0.0);
    out.var_output = out.var_latent + sigma_nu2_;
    return out;
}

}  // namespace gpaf
