#pragma once

#include "gpaf/types.hpp"

namespace gpaf {

/// Lower Cholesky factor of a symmetric PSD matrix. On failure a jitter of
/// 1e-10 * mean(diag) is added and escalated by 10x up to 1e-4 * mean(diag).
/// Throws IllConditionedError when every attempt fails.
struct CholeskyFactor {
    Matrix lower;
    double jitter = 0.0;  // absolute jitter that was finally added to the diagonal

    static CholeskyFactor compute(const Matrix &a);

    /// Solves (L L^T) x = b.
    [[nodiscard]] Vector solve(const Vector &b) const;
    [[nodiscard]] Matrix solve(const Matrix &b) const;
    /// log det(L L^T).
    [[nodiscard]] double log_det() const;
};

/// (A + A^T) / 2 in place.
void symmetrize(Matrix &a);

}  // namespace gpaf
