#pragma once
// Independent reference computations used only by the tests. They share no
// code with the library beyond the Eigen matrix types.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <utility>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// tr(K H L H) / (n-1)^2 as an explicit quadruple sum over H entries.
double hsic_quadruple_sum(const Matrix& k, const Matrix& l);

// tr((b'K)'(b'K) H Ka H) with every matrix formed explicitly.
double simplified_hsic_trace(const Vector& beta, const Matrix& k, const Matrix& ka);

// Cyclic Jacobi eigenvalue iteration: all eigenpairs, values descending.
std::pair<Vector, Matrix> jacobi_eigen(Matrix m, double tol = 1e-14, int max_sweeps = 200);

// Strictly convex QP  min 1/2 x'Qx + c'x  s.t. Gx <= h  through its dual
// max_{z>=0} -1/2 (c+G'z)' Q^{-1} (c+G'z) - h'z  by accelerated projected
// gradient, iterated until the projected gradient falls below `tol`.
struct QpResult {
  Vector x;
  Vector z;
  double objective = 0.0;
  long iterations = 0;
};
QpResult dual_projected_gradient(const Matrix& q, const Vector& c, const Matrix& g, const Vector& h,
                                 double tol = 1e-9, long max_iter = 20000000);

// Box QP  min 1/2 a'Qa + c'a  s.t. lo <= a <= hi  by projected gradient.
Vector box_projected_gradient(const Matrix& q, const Vector& c, const Vector& lo, const Vector& hi,
                              double tol = 1e-10, long max_iter = 20000000);

// Plain kernel functions written from the definitions.
double rbf(const Vector& a, const Vector& b, double gamma);
double poly(const Vector& a, const Vector& b, int degree, double coef);

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c);
Matrix random_psd(std::mt19937_64& rng, Eigen::Index n, double ridge);

// Principal angles between column spaces: largest sine.
double subspace_distance(const Matrix& a, const Matrix& b);

}  // namespace oracle
