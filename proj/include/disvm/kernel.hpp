#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace disvm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class KernelFamily { linear, rbf, polynomial };

/// Kernel family plus its parameters. Samples are columns, so every Gram
/// routine takes d×n matrices.
struct KernelSpec {
  KernelFamily family = KernelFamily::linear;
  double gamma = 1.0;  // rbf: exp(-gamma * |a - b|^2)
  int degree = 2;      // polynomial: (a.b + coef)^degree
  double coef = 1.0;

  static KernelSpec linear() { return {}; }
  static KernelSpec rbf(double gamma) { return {KernelFamily::rbf, gamma, 2, 1.0}; }
  static KernelSpec polynomial(int degree, double coef) {
    return {KernelFamily::polynomial, 1.0, degree, coef};
  }

  /// Throws InvalidArgument when the parameters used by `family` are out of range.
  void validate() const;

  bool operator==(const KernelSpec&) const = default;
};

std::string to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

/// Cross-Gram: entry (i, j) = k(a.col(i), b.col(j)).
Matrix gram(const Matrix& a, const Matrix& b, const KernelSpec& spec);
Matrix gram(const Matrix& x, const KernelSpec& spec);

/// H = I - (1/n) 11^T.
Matrix centering_matrix(Eigen::Index n);

/// Returns H * m without forming H (subtracts column means).
Matrix center_rows(const Matrix& m);
/// Returns m * H without forming H (subtracts row means).
Matrix center_cols(const Matrix& m);

struct EigenPairs {
  Vector values;   // descending
  Matrix vectors;  // n×h, orthonormal columns
};

/// Leading `h` eigenpairs of a symmetric matrix, eigenvalues descending.
EigenPairs sym_eig_top(const Matrix& m, Eigen::Index h);

/// Largest absolute asymmetry |m - m^T|, used by the symmetry preconditions.
double asymmetry(const Matrix& m);

}  // namespace disvm
