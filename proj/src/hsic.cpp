#include "disvm/hsic.hpp"

#include "disvm/error.hpp"

namespace disvm {

DependenceValue hsic_from_grams(const Matrix& k, const Matrix& l) {
  const Eigen::Index n = k.rows();
  if (k.cols() != n || l.rows() != n || l.cols() != n) {
    throw DimensionError("hsic: Gram matrices must be square and of equal size");
  }
  if (n < 2) throw InvalidArgument("hsic: need at least two samples");
  // tr(K H L H) = sum((H K H) .* L) since H K H is symmetric.
  const Matrix kc = center_cols(center_rows(k));
  const double nm1 = static_cast<double>(n - 1);
  return {kc.cwiseProduct(l).sum() / (nm1 * nm1), n};
}

DependenceValue hsic(const Matrix& x, const Matrix& y, const KernelSpec& kx,
                     const KernelSpec& ky) {
  if (x.cols() != y.cols()) {
    throw DimensionError("hsic: sample counts differ (" + std::to_string(x.cols()) + " vs " +
                         std::to_string(y.cols()) + ")");
  }
  if (x.cols() < 2) throw InvalidArgument("hsic: need at least two samples");
  return hsic_from_grams(gram(x, kx), gram(y, ky));
}

DependenceValue simplified_hsic(const Vector& beta, const Matrix& k, const Matrix& ka) {
  const Eigen::Index n = k.rows();
  if (k.cols() != n || ka.rows() != n || ka.cols() != n || beta.size() != n) {
    throw DimensionError("simplified_hsic: dimension mismatch");
  }
  Vector q = k * beta;
  q.array() -= q.mean();
  return {q.dot(ka * q), n};
}

DependenceValue simplified_hsic_lowrank(const Vector& beta, const Matrix& k, const Matrix& a) {
  const Eigen::Index n = k.rows();
  if (k.cols() != n || a.cols() != n || beta.size() != n) {
    throw DimensionError("simplified_hsic: dimension mismatch");
  }
  Vector q = k * beta;
  q.array() -= q.mean();
  return {(a * q).squaredNorm(), n};
}

}  // namespace disvm
