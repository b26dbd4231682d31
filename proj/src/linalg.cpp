#include "gpaf/linalg.hpp"

#include <cmath>
#include <limits>

namespace gpaf {

namespace {

bool try_factor(const Matrix &a, double jitter, Matrix &out) {
    Matrix shifted = a;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() != Eigen::Success) return false;
    out = llt.matrixL();
    return out.diagonal().allFinite() && (out.diagonal().array() > 0.0).all();
}

}  // namespace

CholeskyFactor CholeskyFactor::compute(const Matrix &a) {
    CholeskyFactor f;
    if (a.rows() == 0) return f;
    if (!a.allFinite()) throw IllConditionedError("covariance matrix has non-finite entries");
    if (try_factor(a, 0.0, f.lower)) return f;

    const double scale = std::max(a.diagonal().mean(), std::numeric_limits<double>::min());
    for (double rel = 1e-10; rel <= 1e-4 * 1.0000001; rel *= 10.0) {
        if (try_factor(a, rel * scale, f.lower)) {
            f.jitter = rel * scale;
            return f;
        }
    }
    throw IllConditionedError("Cholesky factorization failed after jitter escalation to 1e-4");
}

Vector CholeskyFactor::solve(const Vector &b) const {
    Vector x = lower.triangularView<Eigen::Lower>().solve(b);
    lower.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
}

Matrix CholeskyFactor::solve(const Matrix &b) const {
    Matrix x = lower.triangularView<Eigen::Lower>().solve(b);
    lower.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
}

double CholeskyFactor::log_det() const {
    return 2.0 * lower.diagonal().array().log().sum();
}

void symmetrize(Matrix &a) {
    a = 0.5 * (a + a.transpose()).eval();
}

}  // namespace gpaf
