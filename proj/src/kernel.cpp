#include "disvm/kernel.hpp"

#include "disvm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace disvm {

void KernelSpec::validate() const {
  switch (family) {
    case KernelFamily::linear:
      return;
    case KernelFamily::rbf:
      if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw InvalidArgument("rbf kernel requires gamma > 0, got " + std::to_string(gamma));
      }
      return;
    case KernelFamily::polynomial:
      if (degree < 1) {
        throw InvalidArgument("polynomial kernel requires degree >= 1, got " +
                              std::to_string(degree));
      }
      // A negative offset breaks positive semidefiniteness for even degrees.
      if (!(coef >= 0.0) || !std::isfinite(coef)) {
        throw InvalidArgument("polynomial kernel requires coef >= 0, got " +
                              std::to_string(coef));
      }
      return;
  }
  throw InvalidArgument("unknown kernel family");
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::linear:
      return "linear";
    case KernelFamily::rbf:
      return "rbf";
    case KernelFamily::polynomial:
      return "poly";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "linear") return KernelFamily::linear;
  if (name == "rbf") return KernelFamily::rbf;
  if (name == "poly" || name == "polynomial") return KernelFamily::polynomial;
  throw InvalidArgument("unknown kernel '" + std::string(name) + "'");
}

namespace {

Matrix rbf_gram(const Matrix& a, const Matrix& b, double gamma, bool self) {
  Matrix out(a.cols(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    const Eigen::Index start = self ? j : 0;
    for (Eigen::Index i = start; i < a.cols(); ++i) {
      const double v = std::exp(-gamma * (a.col(i) - b.col(j)).squaredNorm());
      out(i, j) = v;
      if (self) out(j, i) = v;
    }
  }
  return out;
}

Matrix raise(Matrix dots, const KernelSpec& spec) {
  dots.array() += spec.coef;
  return dots.array().pow(static_cast<double>(spec.degree)).matrix();
}

}  // namespace

Matrix gram(const Matrix& a, const Matrix& b, const KernelSpec& spec) {
  spec.validate();
  if (a.rows() != b.rows()) {
    throw DimensionError("gram: feature dimensions differ (" + std::to_string(a.rows()) +
                         " vs " + std::to_string(b.rows()) + ")");
  }
  switch (spec.family) {
    case KernelFamily::linear:
      return a.transpose() * b;
    case KernelFamily::rbf:
      return rbf_gram(a, b, spec.gamma, false);
    case KernelFamily::polynomial:
      return raise(a.transpose() * b, spec);
  }
  throw InvalidArgument("unknown kernel family");
}

Matrix gram(const Matrix& x, const KernelSpec& spec) {
  spec.validate();
  Matrix k;
  switch (spec.family) {
    case KernelFamily::linear:
      k = x.transpose() * x;
      break;
    case KernelFamily::rbf:
      return rbf_gram(x, x, spec.gamma, true);
    case KernelFamily::polynomial:
      k = raise(x.transpose() * x, spec);
      break;
  }
  // Round-off in the product can leave the two triangles a few ulps apart.
  return 0.5 * (k + k.transpose());
}

Matrix centering_matrix(Eigen::Index n) {
  if (n < 1) throw InvalidArgument("centering_matrix: n must be >= 1");
  Matrix h = Matrix::Constant(n, n, -1.0 / static_cast<double>(n));
  h.diagonal().array() += 1.0;
  return h;
}

Matrix center_rows(const Matrix& m) {
  return m.rowwise() - m.colwise().mean();
}

Matrix center_cols(const Matrix& m) {
  return m.colwise() - m.rowwise().mean();
}

double asymmetry(const Matrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

EigenPairs sym_eig_top(const Matrix& m, Eigen::Index h) {
  if (m.rows() != m.cols()) throw DimensionError("sym_eig_top: matrix is not square");
  const Eigen::Index n = m.rows();
  if (h < 1 || h > n) {
    throw InvalidArgument("sym_eig_top: h=" + std::to_string(h) + " outside [1, " +
                          std::to_string(n) + "]");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (asymmetry(m) > 1e-10 * scale) throw InvalidArgument("sym_eig_top: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()));
  if (solver.info() != Eigen::Success) throw SolverError("sym_eig_top: eigensolver failed");

  // Eigen returns ascending order.
  EigenPairs out;
  out.values = solver.eigenvalues().tail(h).reverse();
  out.vectors = solver.eigenvectors().rightCols(h).rowwise().reverse();
  return out;
}

}  // namespace disvm
