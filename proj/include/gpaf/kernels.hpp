#pragma once

// Covariance functions: a weighted sum of an ARD squared-exponential term, a
// linear term and an i.i.d. noise term,
//
//   k(x_i, x_j) = a1 exp(-sum_l g_l (x_il - x_jl)^2) + a2 x_i^T x_j + a3 [i == j],
//
// optionally multiplied (noise excluded) by the temporal factor
// lambda^{|t - t'| / 2}. All parameters are stored as logarithms.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gpaf/types.hpp"

namespace gpaf {

enum class KernelMode { Composite, RbfOnly, LinearOnly };

const char *to_string(KernelMode mode);
KernelMode kernel_mode_from_string(const std::string &name);

struct HyperParams {
    double log_alpha1 = 0.0;  // RBF amplitude
    Vector log_gamma;         // inverse squared length-scales, one per input dimension
    double log_alpha2 = 0.0;  // linear weight
    double log_alpha3 = 0.0;  // noise variance

    [[nodiscard]] double alpha1() const { return std::exp(log_alpha1); }
    [[nodiscard]] double alpha2() const { return std::exp(log_alpha2); }
    [[nodiscard]] double alpha3() const { return std::exp(log_alpha3); }
    [[nodiscard]] Vector gamma() const { return log_gamma.array().exp(); }
};

class KernelSpec {
  public:
    /// With `shared_length_scale` every input dimension uses log_gamma(0) and the
    /// packed vector carries a single length-scale entry.
    KernelSpec(KernelMode mode, HyperParams params, std::optional<double> temporal_lambda = std::nullopt,
               bool shared_length_scale = false);

    /// Isotropic convenience constructors.
    static KernelSpec rbf(Index dim, double alpha1, double gamma, double noise_var);
    static KernelSpec composite(Index dim, double alpha1, double gamma, double alpha2, double noise_var);
    /// Bayesian linear regression prior: alpha2 = sigma_w2, alpha3 = sigma_nu2.
    static KernelSpec linear(double sigma_w2, double noise_var);

    [[nodiscard]] KernelMode mode() const { return mode_; }
    [[nodiscard]] const HyperParams &params() const { return params_; }
    [[nodiscard]] std::optional<double> temporal_lambda() const { return lambda_; }
    [[nodiscard]] double noise_var() const { return params_.alpha3(); }

    [[nodiscard]] bool uses_rbf() const { return mode_ != KernelMode::LinearOnly; }
    [[nodiscard]] bool uses_linear() const { return mode_ != KernelMode::RbfOnly; }

    [[nodiscard]] bool shared_length_scale() const { return shared_; }

    [[nodiscard]] KernelSpec with_temporal(std::optional<double> lambda) const;
    [[nodiscard]] KernelSpec with_shared_length_scale(bool shared) const;
    [[nodiscard]] KernelSpec with_noise_var(double noise_var) const;

    /// Active log-domain parameters, ordered [log a1, log g_1..d, log a2, log a3]
    /// with inactive terms omitted (rbf_only drops a2, linear_only drops a1 and g)
    /// and a single log g when the length-scale is shared.
    [[nodiscard]] Vector packed() const;
    [[nodiscard]] KernelSpec with_packed(const Vector &packed) const;
    [[nodiscard]] Index num_params() const;
    [[nodiscard]] std::vector<std::string> param_names() const;

    /// Throws std::invalid_argument if x does not match the kernel's input dimension.
    void check_dim(Index d) const;

  private:
    KernelMode mode_;
    HyperParams params_;
    std::optional<double> lambda_;
    bool shared_ = false;
};

/// Full covariance including the noise term when same_point is set.
double kernel_eval(const KernelSpec &spec, const Eigen::Ref<const Vector> &x, const Eigen::Ref<const Vector> &xp,
                   bool same_point);

/// Noise-free covariance k_s(x, x').
inline double signal_eval(const KernelSpec &spec, const Eigen::Ref<const Vector> &x,
                          const Eigen::Ref<const Vector> &xp) {
    return kernel_eval(spec, x, xp, false);
}

/// Gram matrix over the rows of X, noise on the diagonal. n = 0 yields an empty matrix.
Matrix gram(const KernelSpec &spec, const Matrix &X);
/// Gram matrix without the noise term (the prior covariance of f).
Matrix signal_gram(const KernelSpec &spec, const Matrix &X);
/// Column of noise-free covariances k(X_i, x).
Vector cross_cov(const KernelSpec &spec, const Matrix &X, const Eigen::Ref<const Vector> &x);

/// dK/d(log theta_j) for each packed parameter.
std::vector<Matrix> gram_gradients(const KernelSpec &spec, const Matrix &X);

/// lambda^{|t - t'| / 2}; lambda must lie in (0, 1].
double temporal_factor(double lambda, long t, long tp);

/// (K_st)_ij = temporal_factor(t_i, t_j) k_s(x_i, x_j) + a3 [i == j].
Matrix st_gram(const KernelSpec &spec, const Matrix &X, const std::vector<long> &timestamps);

}  // namespace gpaf
