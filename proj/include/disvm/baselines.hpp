#pragma once

#include "disvm/dataset.hpp"
#include "disvm/disvm.hpp"
#include "disvm/domain.hpp"
#include "disvm/kernel.hpp"

#include <span>
#include <vector>

namespace disvm {

// ---------------------------------------------------------------------------
// Plain kernel SVM without offset, trained on labeled samples only.

struct SvmOptions {
  double tol = 1e-6;
  int max_iter = 500;
  SolverRoute route = SolverRoute::primal;
};

struct SvmModel {
  Vector beta;            // one coefficient per labeled training sample
  Matrix train_features;  // d×n_labeled
  KernelSpec spec;
  double c = 1.0;
  Diagnostics diagnostics;
};

/// Every label must be +1 or -1 and both classes must occur.
SvmModel fit_svm(const Matrix& x, std::span<const Label> labels, const KernelSpec& spec, double c,
                 const SvmOptions& opts = {});

Vector decision_values(const SvmModel& model, const Matrix& x_new);
std::vector<Label> predict(const SvmModel& model, const Matrix& x_new);

// ---------------------------------------------------------------------------
// Subspace projections: PCA on raw features, MIDA / SMIDA in kernel space.

enum class ProjectionKind { pca, mida, smida };

struct ProjectionModel {
  ProjectionKind kind = ProjectionKind::pca;
  Matrix w;               // d×h for pca, n×h otherwise; orthonormal columns
  Vector eigenvalues;     // h leading values of the maximised matrix
  Matrix train_features;  // d×n
  Vector mean;            // pca only
  KernelSpec spec;
  double mu_var = 1.0;
  double mu_y = 0.0;

  Eigen::Index h() const { return w.cols(); }
};

ProjectionModel fit_pca(const Matrix& x, Eigen::Index h);

/// Maximises tr(W' K (mu_var H - H Ka H) K W) over orthonormal W.
ProjectionModel fit_mida(const Matrix& x, const DomainMatrix& dm, Eigen::Index h, double mu_var,
                         const KernelSpec& spec);

/// As fit_mida with + mu_y H Ky H inside, Ky = y~ y~'.
ProjectionModel fit_smida(const Matrix& x, const DomainMatrix& dm, const Vector& y_tilde,
                          Eigen::Index h, double mu_var, double mu_y, const KernelSpec& spec);

/// K (mu_var H + mu_y H y~y~' H - H Ka H) K, symmetrised. Pass an empty
/// y_tilde for the unsupervised variant.
Matrix projection_objective(const Matrix& k, const Matrix& ka, const Vector& y_tilde,
                            double mu_var, double mu_y);

/// Keep the leading `h` directions of a fitted projection.
ProjectionModel truncate(const ProjectionModel& model, Eigen::Index h);

/// h×n' projected features.
Matrix transform(const ProjectionModel& model, const Matrix& x_new);

/// Root mean squared column norm of `z` (1 when it is zero). Kernel
/// projections live on the scale of K times n, so their features are divided
/// by this before a linear SVM sees them.
double feature_scale(const Matrix& z);

}  // namespace disvm
