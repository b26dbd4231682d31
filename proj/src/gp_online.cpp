#include "gpaf/gp_online.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gpaf/linalg.hpp"

namespace gpaf {

namespace {

// m x m -> (m+1) x (m+1), new row/column zeroed.
Matrix grown(const Matrix &a) {
    const Index m = a.rows();
    Matrix out = Matrix::Zero(m + 1, m + 1);
    out.topLeftCorner(m, m) = a;
    return out;
}

Matrix without(const Matrix &a, Index r) {
    const Index m = a.rows();
    Matrix out(m - 1, m - 1);
    const Index tail = m - r - 1;
    out.topLeftCorner(r, r) = a.topLeftCorner(r, r);
    out.topRightCorner(r, tail) = a.topRightCorner(r, tail);
    out.bottomLeftCorner(tail, r) = a.bottomLeftCorner(tail, r);
    out.bottomRightCorner(tail, tail) = a.bottomRightCorner(tail, tail);
    return out;
}

Vector without(const Vector &v, Index r) {
    Vector out(v.size() - 1);
    out.head(r) = v.head(r);
    out.tail(v.size() - r - 1) = v.tail(v.size() - r - 1);
    return out;
}

// L L^T <- L L^T + x x^T for lower-triangular L, by Givens-style sweeps.
void rank_one_update(Matrix &L, Vector x) {
    const Index n = L.rows();
    for (Index k = 0; k < n; ++k) {
        const double r = std::hypot(L(k, k), x(k));
        const double c = r / L(k, k);
        const double s = x(k) / L(k, k);
        L(k, k) = r;
        const Index tail = n - k - 1;
        if (tail == 0) break;
        L.col(k).tail(tail) = (L.col(k).tail(tail) + s * x.tail(tail)) / c;
        x.tail(tail) = c * x.tail(tail) - s * L.col(k).tail(tail);
    }
}

// Cholesky factor of K with row and column r deleted, from that of K.
Matrix chol_without(const Matrix &L, Index r) {
    const Index m = L.rows();
    const Index tail = m - r - 1;
    Matrix out = Matrix::Zero(m - 1, m - 1);
    out.topLeftCorner(r, r) = L.topLeftCorner(r, r);
    out.bottomLeftCorner(tail, r) = L.bottomLeftCorner(tail, r);
    Matrix lower = L.bottomRightCorner(tail, tail);
    rank_one_update(lower, L.col(r).tail(tail));
    out.bottomRightCorner(tail, tail) = lower;
    return out;
}

}  // namespace

OnlineGP::OnlineGP(KernelSpec spec, Index budget, double duplicate_threshold)
    : spec_(std::move(spec)), budget_(budget), duplicate_threshold_(duplicate_threshold) {
    if (budget_ < 1) throw std::invalid_argument("online GP budget must be >= 1");
    if (spec_.uses_rbf()) dim_ = spec_.params().log_gamma.size();
}

OnlineGP::Innovation OnlineGP::innovate(const Eigen::Ref<const Vector> &x) const {
    if (dim_ >= 0 && x.size() != dim_) throw std::invalid_argument("online GP: input dimension mismatch");
    Innovation in;
    in.k0 = signal_eval(spec_, x, x);
    in.kk = cross_cov(spec_, basis_, x);
    in.ck = c_ * in.kk;
    in.mean = in.kk.dot(alpha_);
    in.var_raw = in.k0 + in.kk.dot(in.ck);
    in.var_latent = std::clamp(in.var_raw, 0.0, in.k0);
    in.var_output = in.var_latent + spec_.noise_var();
    return in;
}

PredictiveDistribution OnlineGP::predict(const Eigen::Ref<const Vector> &x) const {
    const Innovation in = innovate(x);
    return {in.mean, in.var_latent, in.var_output};
}

Matrix OnlineGP::covariance() const {
    Matrix sigma = k_ + k_ * c_ * k_;
    symmetrize(sigma);
    return sigma;
}

Index OnlineGP::duplicate_of(const Innovation &in) const {
    // squared distance between feature maps: k(x,x) + k(b,b) - 2 k(x,b)
    Index best = -1;
    double best_d2 = duplicate_threshold_ * in.k0;
    for (Index j = 0; j < size(); ++j) {
        const double d2 = in.k0 + k_(j, j) - 2.0 * in.kk(j);
        if (d2 <= best_d2) {
            best = j;
            best_d2 = d2;
        }
    }
    return best;
}

void OnlineGP::update(const Eigen::Ref<const Vector> &x, double y, long t) {
    if (last_t_ && t < *last_t_) throw std::invalid_argument("online GP: timestamps must be non-decreasing");
    absorb(x, y, t, innovate(x));
}

void OnlineGP::absorb(const Eigen::Ref<const Vector> &x, double y, long t, const Innovation &in) {
    if (dim_ < 0) dim_ = x.size();
    if (basis_.cols() != x.size()) basis_.resize(0, x.size());
    last_t_ = t;
    if (in.var_raw < 0.0) ++clipped_;
    const double gain = (y - in.mean) / in.var_output;
    const Index m = size();

    if (const Index j = duplicate_of(in); j >= 0) {
        // same latent value as basis element j: condition without growing
        Vector s = in.ck;
        s(j) += 1.0;
        alpha_ += gain * s;
        c_.noalias() -= (s * s.transpose()) / in.var_output;
        symmetrize(c_);
        return;
    }

    Vector s(m + 1);
    s << in.ck, 1.0;
    Vector alpha = Vector::Zero(m + 1);
    alpha.head(m) = alpha_;
    alpha_ = alpha + gain * s;
    c_ = grown(c_);
    c_.noalias() -= (s * s.transpose()) / in.var_output;
    symmetrize(c_);

    // factor and inverse of the jittered Gram matrix
    const double jitter = kGramJitter * in.k0;
    const Vector z = chol_.triangularView<Eigen::Lower>().solve(in.kk);
    const Vector q = chol_.transpose().triangularView<Eigen::Upper>().solve(z);
    const double gamma2 = std::max(in.k0 + jitter - z.squaredNorm(), jitter);
    Matrix chol = Matrix::Zero(m + 1, m + 1);
    chol.topLeftCorner(m, m) = chol_;
    chol.row(m).head(m) = z.transpose();
    chol(m, m) = std::sqrt(gamma2);
    chol_ = std::move(chol);
    Vector qx(m + 1);
    qx << q, -1.0;
    q_ = grown(q_);
    q_.noalias() += (qx * qx.transpose()) / gamma2;

    k_ = grown(k_);
    k_.col(m).head(m) = in.kk;
    k_.row(m).head(m) = in.kk.transpose();
    k_(m, m) = in.k0;

    basis_.conservativeResize(m + 1, Eigen::NoChange);
    basis_.row(m) = x.transpose();
    times_.push_back(t);
}

void OnlineGP::forget(double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("forgetting factor must lie in (0, 1]");
    if (lambda == 1.0 || size() == 0) return;
    alpha_ *= std::sqrt(lambda);
    c_ *= lambda;
}

Index OnlineGP::least_relevant() const {
    const Index m = size();
    if (m == 0) return -1;
    // (Q mu)_i is alpha_i
    const Vector &a = alpha_;
    Index best = 0;
    double best_score = a(0) * a(0) / q_(0, 0);
    for (Index i = 1; i < m; ++i) {
        const double score = a(i) * a(i) / q_(i, i);
        bool take = score < best_score;
        if (score == best_score) {
            if (times_[i] != times_[best]) {
                take = times_[i] < times_[best];
            } else {
                // lexicographic input order keeps the choice independent of basis labeling
                for (Index l = 0; l < basis_.cols(); ++l) {
                    if (basis_(i, l) != basis_(best, l)) {
                        take = basis_(i, l) < basis_(best, l);
                        break;
                    }
                }
            }
        }
        if (take) {
            best = i;
            best_score = score;
        }
    }
    return best;
}

void OnlineGP::prune_to_budget() {
    while (size() > budget_) remove(least_relevant());
}

void OnlineGP::remove(Index r) {
    // Q restricted to the survivors is the inverse of K without row/column r
    const Vector qr = without(Vector(q_.col(r)), r);
    const double qrr = q_(r, r);
    q_ = without(q_, r);
    q_.noalias() -= (qr * qr.transpose()) / qrr;
    symmetrize(q_);
    const Vector kr = without(Vector(k_.col(r)), r);
    k_ = without(k_, r);
    chol_ = chol_without(chol_, r);
    // Marginalizing (mu, Sigma) onto the survivors maps the weights through
    // P = [I, v], where v = K_s^{-1} k(basis_s, x_r) (equal to -Q_{.r} / Q_rr).
    const Vector v =
        chol_.transpose().triangularView<Eigen::Upper>().solve(chol_.triangularView<Eigen::Lower>().solve(kr));
    const Vector cr = without(Vector(c_.col(r)), r);
    const double crr = c_(r, r);
    const double ar = alpha_(r);
    alpha_ = without(alpha_, r) + ar * v;
    c_ = without(c_, r);
    c_.noalias() += v * cr.transpose() + cr * v.transpose() + crr * (v * v.transpose());
    symmetrize(c_);
    const Index m = basis_.rows();
    Matrix basis(m - 1, basis_.cols());
    basis.topRows(r) = basis_.topRows(r);
    basis.bottomRows(m - r - 1) = basis_.bottomRows(m - r - 1);
    basis_ = std::move(basis);
    times_.erase(times_.begin() + r);
}

PredictiveDistribution OnlineGP::step(const Eigen::Ref<const Vector> &x, double y, long t, double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("forgetting factor must lie in (0, 1]");
    if (last_t_ && t < *last_t_) throw std::invalid_argument("online GP: timestamps must be non-decreasing");
    if (last_t_ && t > *last_t_) forget(std::pow(lambda, static_cast<double>(t - *last_t_)));
    const Innovation in = innovate(x);
    absorb(x, y, t, in);
    prune_to_budget();
    return {in.mean, in.var_latent, in.var_output};
}

OnlineGP OnlineGP::from_moments(KernelSpec spec, Index budget, Matrix basis, std::vector<long> times, Vector mu,
                                Matrix sigma) {
    const Index m = basis.rows();
    if (static_cast<Index>(times.size()) != m || mu.size() != m || sigma.rows() != m || sigma.cols() != m)
        throw std::invalid_argument("from_moments: inconsistent sizes");
    OnlineGP gp(std::move(spec), budget);
    gp.k_ = signal_gram(gp.spec_, basis);
    Matrix jittered = gp.k_;
    jittered.diagonal() *= 1.0 + kGramJitter;
    gp.chol_ = Eigen::LLT<Matrix>(jittered).matrixL();
    gp.q_ = Eigen::LLT<Matrix>(jittered).solve(Matrix(Matrix::Identity(m, m)));
    symmetrize(gp.q_);
    gp.dim_ = basis.cols();
    gp.basis_ = std::move(basis);
    gp.times_ = std::move(times);
    const Eigen::LLT<Matrix> exact(gp.k_);
    gp.alpha_ = exact.solve(mu);
    gp.c_ = exact.solve(exact.solve(sigma).transpose()) - exact.solve(Matrix(Matrix::Identity(m, m)));
    symmetrize(gp.c_);
    if (!gp.times_.empty()) gp.last_t_ = *std::max_element(gp.times_.begin(), gp.times_.end());
    return gp;
}

}  // namespace gpaf
