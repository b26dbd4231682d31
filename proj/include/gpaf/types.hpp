#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace gpaf {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Gaussian predictive density at a single query point.
struct PredictiveDistribution {
    double mean = 0.0;
    double var_latent = 0.0;  // variance of f(x)
    double var_output = 0.0;  // variance of y = f(x) + noise
};

/// Raised when a covariance matrix cannot be factorized even after jitter escalation.
class IllConditionedError : public std::runtime_error {
  public:
    explicit IllConditionedError(const std::string &what) : std::runtime_error(what) {}
};

}  // namespace gpaf
