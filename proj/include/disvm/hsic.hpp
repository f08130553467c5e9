#pragma once

#include "disvm/kernel.hpp"

namespace disvm {

struct DependenceValue {
  double value = 0.0;
  Eigen::Index n = 0;
};

/// Empirical HSIC, tr(K H L H) / (n-1)^2, between paired sample sets
/// (columns of `x` and `y` are matched samples).
DependenceValue hsic(const Matrix& x, const Matrix& y, const KernelSpec& kx, const KernelSpec& ky);

/// Same statistic from precomputed Gram matrices.
DependenceValue hsic_from_grams(const Matrix& k, const Matrix& l);

/// Classifier-level dependence beta^T K H Ka H K beta, with no 1/(n-1)^2
/// normalisation. Evaluated as q = H K beta, then q^T Ka q.
DependenceValue simplified_hsic(const Vector& beta, const Matrix& k, const Matrix& ka);

/// Same value with Ka = A^T A supplied through A, i.e. |A H K beta|^2.
DependenceValue simplified_hsic_lowrank(const Vector& beta, const Matrix& k, const Matrix& a);

}  // namespace disvm
