#pragma once

#include <cstdint>
#include <vector>

#include "gpaf/kernels.hpp"
#include "gpaf/linalg.hpp"
#include "gpaf/types.hpp"

namespace gpaf {

/// Training inputs (one row per sample) and targets. Timestamps are only
/// consulted when the kernel carries a temporal factor.
struct Dataset {
    Matrix X;
    Vector y;
    std::vector<long> t;

    [[nodiscard]] Index size() const { return X.rows(); }
    [[nodiscard]] Index dim() const { return X.cols(); }
    void validate() const;
};

/// Covariance matrix C_n = K_n + a3 I for the dataset, temporal factor included
/// when the kernel has one.
Matrix training_covariance(const Dataset &data, const KernelSpec &spec);

/// Exact GP regression posterior. Immutable after fit.
class BatchGP {
  public:
    static BatchGP fit(Dataset data, KernelSpec spec);

    /// Predictive moments at x (observed at time t for spatio-temporal kernels).
    [[nodiscard]] PredictiveDistribution predict(const Eigen::Ref<const Vector> &x, long t = 0) const;

    [[nodiscard]] const Dataset &data() const { return data_; }
    [[nodiscard]] const KernelSpec &spec() const { return spec_; }
    [[nodiscard]] const Matrix &chol() const { return chol_.lower; }
    [[nodiscard]] const Vector &weights() const { return weights_; }
    [[nodiscard]] double jitter() const { return chol_.jitter; }

  private:
    BatchGP(Dataset data, KernelSpec spec, CholeskyFactor chol, Vector weights)
        : data_(std::move(data)), spec_(std::move(spec)), chol_(std::move(chol)), weights_(std::move(weights)) {}

    Dataset data_;
    KernelSpec spec_;
    CholeskyFactor chol_;
    Vector weights_;
};

/// log p(y | X, theta) = -y^T C^{-1} y / 2 - log det C / 2 - n log(2 pi) / 2.
double log_marginal_likelihood(const Dataset &data, const KernelSpec &spec);

/// Gradient of the log marginal likelihood w.r.t. KernelSpec::packed().
Vector lml_gradient(const Dataset &data, const KernelSpec &spec);

/// Value and gradient sharing one factorization.
struct LmlEvaluation {
    double value;
    Vector gradient;
};
LmlEvaluation lml_with_gradient(const Dataset &data, const KernelSpec &spec);

struct HyperOptOptions {
    int max_iters = 200;
    double tol = 1e-6;       // relative change of the objective
    double grad_tol = 1e-5;  // infinity norm of the gradient
    int restarts = 5;        // first run starts at spec0, the rest at random draws
    double init_low = -4.0;
    double init_high = 2.0;
    std::uint64_t seed = 0;
    bool quasi_newton = true;  // BFGS direction; plain gradient otherwise
};

struct RestartTrace {
    Vector initial;
    std::vector<Vector> params;  // accepted iterates, initial point first
    std::vector<double> lml;
    bool converged = false;
    bool failed = false;  // no finite starting value or line search never succeeded
};

struct HyperOptResult {
    KernelSpec spec;
    double lml;
    double initial_lml;
    bool improved;  // false means spec0 was returned unchanged
    std::vector<RestartTrace> restarts;
};

/// Multi-start ascent of the log marginal likelihood with a backtracking line search.
HyperOptResult optimize_hyperparams(const Dataset &data, const KernelSpec &spec0, const HyperOptOptions &options = {});

/// Posterior of w under y = w^T x + noise, w ~ N(0, sigma_w2 I).
class BayesLinearModel {
  public:
    static BayesLinearModel fit(const Dataset &data, double sigma_w2, double sigma_nu2);

    [[nodiscard]] PredictiveDistribution predict(const Eigen::Ref<const Vector> &x) const;

    [[nodiscard]] const Vector &mean() const { return mu_w_; }
    [[nodiscard]] const Matrix &covariance() const { return sigma_w_; }
    [[nodiscard]] double sigma_w2() const { return sigma_w2_; }
    [[nodiscard]] double sigma_nu2() const { return sigma_nu2_; }

  private:
    Vector mu_w_;
    Matrix sigma_w_;
    double sigma_w2_ = 1.0;
    double sigma_nu2_ = 1.0;
};

}  // namespace gpaf
