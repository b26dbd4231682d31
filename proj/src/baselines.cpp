#include "gpaf/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "gpaf/linalg.hpp"

namespace gpaf {

namespace {

void check_dim(const Eigen::Ref<const Vector> &x, Index dim) {
    if (x.size() != dim) throw std::invalid_argument("adaptive filter: input dimension mismatch");
}

}  // namespace

Nlms::Nlms(Index dim, double step_size, double eps) : w_(Vector::Zero(dim)), mu_(step_size), eps_(eps) {
    if (!(step_size > 0.0 && step_size < 2.0)) throw std::invalid_argument("NLMS step size must lie in (0, 2)");
    if (!(eps > 0.0)) throw std::invalid_argument("NLMS regularizer must be > 0");
}

double Nlms::step(const Eigen::Ref<const Vector> &x, double y) {
    check_dim(x, w_.size());
    const double prediction = w_.dot(x);
    const double err = y - prediction;
    w_ += (mu_ * err / (eps_ + x.squaredNorm())) * x;
    return prediction;
}

ExRls::ExRls(Index dim, double forgetting, double state_noise, double initial_variance)
    : w_(Vector::Zero(dim)), p_(initial_variance * Matrix::Identity(dim, dim)), beta_(forgetting), q_(state_noise) {
    if (!(forgetting > 0.0 && forgetting <= 1.0)) throw std::invalid_argument("EX-RLS forgetting must lie in (0, 1]");
    if (state_noise < 0.0) throw std::invalid_argument("EX-RLS state noise must be >= 0");
    if (!(initial_variance > 0.0)) throw std::invalid_argument("EX-RLS initial variance must be > 0");
}

double ExRls::step(const Eigen::Ref<const Vector> &x, double y) {
    check_dim(x, w_.size());
    const double prediction = w_.dot(x);
    const Vector px = p_ * x;
    const Vector gain = px / (beta_ + x.dot(px));
    w_ += gain * (y - prediction);
    p_ = (p_ - gain * px.transpose()) / beta_;
    p_.diagonal().array() += q_;
    symmetrize(p_);
    return prediction;
}

Qklms::Qklms(Index dim, double step_size, double quant_eps, double gamma)
    : centers_(16, dim), coeffs_(16), mu_(step_size), eps_(quant_eps), gamma_(gamma) {
    if (!(step_size > 0.0)) throw std::invalid_argument("QKLMS step size must be > 0");
    if (quant_eps < 0.0) throw std::invalid_argument("QKLMS quantization size must be >= 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("QKLMS kernel width must be > 0");
}

double Qklms::predict(const Eigen::Ref<const Vector> &x) const {
    check_dim(x, centers_.cols());
    double f = 0.0;
    for (Index i = 0; i < count_; ++i) f += coeffs_(i) * std::exp(-gamma_ * (centers_.row(i).transpose() - x).squaredNorm());
    return f;
}

double Qklms::step(const Eigen::Ref<const Vector> &x, double y) {
    check_dim(x, centers_.cols());
    double f = 0.0;
    Index nearest = -1;
    double nearest_d2 = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < count_; ++i) {
        const double d2 = (centers_.row(i).transpose() - x).squaredNorm();
        f += coeffs_(i) * std::exp(-gamma_ * d2);
        if (d2 < nearest_d2) {
            nearest_d2 = d2;
            nearest = i;
        }
    }
    const double err = y - f;
    if (nearest >= 0 && std::sqrt(nearest_d2) <= eps_) {
        coeffs_(nearest) += mu_ * err;
        return f;
    }
    if (count_ == centers_.rows()) {
        centers_.conservativeResize(2 * count_, Eigen::NoChange);
        coeffs_.conservativeResize(2 * count_);
    }
    centers_.row(count_) = x.transpose();
    coeffs_(count_) = mu_ * err;
    ++count_;
    return f;
}

}  // namespace gpaf
