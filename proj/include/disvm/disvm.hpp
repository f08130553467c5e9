#pragma once

#include "disvm/dataset.hpp"
#include "disvm/domain.hpp"
#include "disvm/kernel.hpp"
#include "disvm/qp.hpp"

#include <vector>

namespace disvm {

enum class SolverRoute {
  dual,    // box-constrained dual on the cached margin operator (default)
  primal,  // interior point on the stacked (beta, xi) problem
};

struct FitOptions {
  double tol = 1e-6;
  int max_iter = 500;
  SolverRoute route = SolverRoute::dual;
  AccessionGroups groups;
};

struct Diagnostics {
  double objective = 0.0;       // 1/2 b'Kb + C sum(xi) + lambda/2 * penalty
  double penalty = 0.0;         // simplified HSIC of beta
  double hinge = 0.0;           // sum(xi)
  qp::KktResiduals kkt;         // of the stacked primal problem
  qp::KktScale kkt_scale;
  int iterations = 0;
  bool converged = false;
};

struct DisvmModel {
  Vector beta;             // one coefficient per training sample, labeled or not
  Matrix train_features;   // d×n
  KernelSpec spec;
  double c = 1.0;
  double lambda = 0.0;
  Diagnostics diagnostics;
};

/// Margin operator M = K P^{-1} K with P = K + lambda K H Ka H K + eps I,
/// evaluated in the eigenbasis of K so that large lambda stays well conditioned.
/// The dual of the classifier problem over any labeled subset L is the box QP
///   min 1/2 a' Y M_LL Y a - 1'a,  0 <= a <= C,
/// and the in-sample decision values are M[:, L] Y a.
class MarginOperator {
 public:
  /// `k` is the n×n Gram, `a` the (p+q)×n domain matrix (may have zero rows).
  MarginOperator(const Matrix& k, const Matrix& a, double lambda);

  const Matrix& matrix() const { return m_; }
  Eigen::Index size() const { return m_.rows(); }
  double lambda() const { return lambda_; }
  double epsilon() const { return eps_; }

  /// Expansion coefficients beta for a signed dual vector gamma (length n,
  /// zero at unlabeled samples).
  Vector beta(const Vector& gamma) const;

 private:
  double lambda_;
  double eps_;
  Matrix basis_;  // U_+ S^{-1/2}
  Matrix r_t_;    // R^T
  Eigen::LLT<Matrix> t_;
  Matrix m_;
};

/// Solves the box dual for the labeled positions `labeled` of `y` (entries +1/-1).
/// Returns the full-length signed dual gamma (zeros elsewhere).
struct DualFit {
  Vector gamma;
  qp::BoxSolution box;
};
DualFit solve_dual(const Matrix& m, const Vector& y, const std::vector<Eigen::Index>& labeled,
                   double c, const qp::BoxOptions& opts = {});

DisvmModel fit(const Dataset& ds, const KernelSpec& spec, double c, double lambda,
               const FitOptions& opts = {});

/// The stacked primal problem over (beta, xi_labeled).
qp::Problem primal_problem(const Matrix& k, const Matrix& ka, const Vector& y_tilde, double c,
                           double lambda);

/// 1/2 b'Kb + C sum max(0, 1 - y~ (Kb)) + lambda/2 b'KHKaHKb, labeled hinge only.
double primal_objective(const Vector& beta, const Matrix& k, const Matrix& ka,
                        const Vector& y_tilde, double c, double lambda);

/// gram(x_new, train) * beta.
Vector decision_values(const DisvmModel& model, const Matrix& x_new);
/// Sign of the decision values; exact zero maps to +1.
std::vector<Label> predict(const DisvmModel& model, const Matrix& x_new);
std::vector<Label> sign_labels(const Vector& decisions);

/// Default ridge on the coefficient block: 1e-8 * trace(K) / n.
double coefficient_ridge(const Matrix& k);

}  // namespace disvm
