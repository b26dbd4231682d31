#pragma once

// Classical adaptive filters used as reference points in the tracking
// experiment. Each step returns the prediction made before the update.

#include <limits>

#include "gpaf/types.hpp"

namespace gpaf {

/// Normalized LMS: w <- w + mu e x / (eps + |x|^2).
class Nlms {
  public:
    Nlms(Index dim, double step_size, double eps = 1e-6);

    double step(const Eigen::Ref<const Vector> &x, double y);
    [[nodiscard]] const Vector &weights() const { return w_; }

  private:
    Vector w_;
    double mu_;
    double eps_;
};

/// Extended RLS for a random-walk state model:
///   k = P x / (beta + x^T P x),  w <- w + k e,  P <- (P - k x^T P) / beta + q I.
class ExRls {
  public:
    ExRls(Index dim, double forgetting, double state_noise, double initial_variance = 1e4);

    double step(const Eigen::Ref<const Vector> &x, double y);
    [[nodiscard]] const Vector &weights() const { return w_; }
    [[nodiscard]] const Matrix &covariance() const { return p_; }

  private:
    Vector w_;
    Matrix p_;
    double beta_;
    double q_;
};

/// Quantized kernel LMS with a Gaussian kernel exp(-gamma |x - c|^2). An input
/// within quant_eps of its nearest center updates that center's coefficient;
/// otherwise it becomes a new center.
class Qklms {
  public:
    Qklms(Index dim, double step_size, double quant_eps, double gamma);

    double step(const Eigen::Ref<const Vector> &x, double y);
    [[nodiscard]] double predict(const Eigen::Ref<const Vector> &x) const;
    [[nodiscard]] Index size() const { return count_; }
    [[nodiscard]] auto centers() const { return centers_.topRows(count_); }
    [[nodiscard]] auto coefficients() const { return coeffs_.head(count_); }

  private:
    Matrix centers_;
    Vector coeffs_;
    Index count_ = 0;
    double mu_;
    double eps_;
    double gamma_;
};

}  // namespace gpaf
