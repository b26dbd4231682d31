#pragma once

// Recursive GP regression over a growing (and optionally budgeted) basis of
// observed inputs. The state keeps the posterior mean and covariance of the
// latent function at the basis, plus the inverse of the prior Gram matrix.
// With forgetting enabled it becomes KRLS-T: before each observation the
// posterior is pulled back toward the prior,
//   mu <- sqrt(lambda) mu,   Sigma <- lambda Sigma + (1 - lambda) K.
//
// Internally the moments are held as alpha = Q mu and C = Q Sigma Q - Q, so
// that predictions (k^T alpha, k(x,x) + k^T C k) never go through Q. A nearly
// degenerate basis makes Q inaccurate long before the predictive moments
// become ill-conditioned. In this form the forgetting step is simply
// alpha <- sqrt(lambda) alpha, C <- lambda C.

#include <limits>
#include <optional>
#include <vector>

#include "gpaf/kernels.hpp"
#include "gpaf/types.hpp"

namespace gpaf {

class OnlineGP {
  public:
    static constexpr Index kUnlimited = std::numeric_limits<Index>::max() / 2;
    /// Relative diagonal jitter of the Gram matrix behind Q and its factor.
    /// Only pruning reads them; predictions and updates are exact without it.
    static constexpr double kGramJitter = 1e-10;

    /// `duplicate_threshold` is relative to k(x, x): an input whose squared
    /// kernel distance to some basis input falls below it is treated as that
    /// input, and the observation is folded in without growing the basis.
    explicit OnlineGP(KernelSpec spec, Index budget = kUnlimited, double duplicate_threshold = 1e-12);

    [[nodiscard]] PredictiveDistribution predict(const Eigen::Ref<const Vector> &x) const;

    /// Conditions on (x, y) observed at time t. t must not precede the last update.
    void update(const Eigen::Ref<const Vector> &x, double y, long t);

    /// Back-to-prior step. lambda in (0, 1].
    void forget(double lambda);

    /// Drops the least relevant basis element(s) until size() <= budget().
    void prune_to_budget();

    /// forget(lambda^{t - t_last}) -> predict -> update -> prune. Returns the
    /// prediction made before y was seen.
    PredictiveDistribution step(const Eigen::Ref<const Vector> &x, double y, long t, double lambda);

    /// Index the pruning criterion would remove next, or -1 if the basis is empty.
    [[nodiscard]] Index least_relevant() const;

    [[nodiscard]] Index size() const { return basis_.rows(); }
    [[nodiscard]] Index budget() const { return budget_; }
    [[nodiscard]] const KernelSpec &spec() const { return spec_; }
    [[nodiscard]] const Matrix &basis() const { return basis_; }
    [[nodiscard]] const std::vector<long> &timestamps() const { return times_; }
    /// Posterior mean of the latent function at the basis, K alpha.
    [[nodiscard]] Vector mean() const { return k_ * alpha_; }
    /// Posterior covariance at the basis, K + K C K.
    [[nodiscard]] Matrix covariance() const;
    [[nodiscard]] const Vector &weights() const { return alpha_; }
    [[nodiscard]] const Matrix &weight_covariance() const { return c_; }
    /// Inverse of the basis Gram matrix (with kGramJitter on the diagonal).
    [[nodiscard]] const Matrix &prior_inverse() const { return q_; }
    [[nodiscard]] const Matrix &prior_gram() const { return k_; }
    [[nodiscard]] std::optional<long> last_time() const { return last_t_; }
    /// Number of negative predictive variances clipped to zero during updates.
    [[nodiscard]] long clipped_count() const { return clipped_; }

    /// Rebuilds a state from explicit moments (used to relabel or inspect states in tests).
    static OnlineGP from_moments(KernelSpec spec, Index budget, Matrix basis, std::vector<long> times, Vector mu,
                                 Matrix sigma);

  private:
    struct Innovation {
        double k0;   // k(x, x) without noise
        Vector kk;   // k(basis, x)
        Vector ck;   // C kk
        double var_raw;  // latent variance before clipping
        double mean;
        double var_latent;
        double var_output;
    };
    [[nodiscard]] Innovation innovate(const Eigen::Ref<const Vector> &x) const;
    void absorb(const Eigen::Ref<const Vector> &x, double y, long t, const Innovation &in);
    [[nodiscard]] Index duplicate_of(const Innovation &in) const;
    void remove(Index r);

    KernelSpec spec_;
    Index budget_;
    double duplicate_threshold_;
    Index dim_ = -1;
    Matrix basis_;
    std::vector<long> times_;
    Vector alpha_;
    Matrix c_;
    Matrix q_;
    Matrix k_;
    Matrix chol_;  // lower Cholesky factor of the jittered k_
    std::optional<long> last_t_;
    long clipped_ = 0;
};

}  // namespace gpaf
