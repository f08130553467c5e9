#include "disvm/baselines.hpp"

#include "disvm/error.hpp"

#include <cmath>
#include <sstream>

namespace disvm {

SvmModel fit_svm(const Matrix& x, std::span<const Label> labels, const KernelSpec& spec, double c,
                 const SvmOptions& opts) {
  spec.validate();
  const Eigen::Index n = x.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw DimensionError("fit_svm: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(n) + " samples");
  }
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("fit_svm: C must be finite and > 0");
  bool pos = false;
  bool neg = false;
  for (Label l : labels) {
    if (l == Label::unlabeled) throw DataError("fit_svm: every training sample needs a label");
    (l == Label::positive ? pos : neg) = true;
  }
  if (!pos || !neg) throw DataError("fit_svm: both classes are required");

  const Vector y = recode_labels(labels);
  const Matrix k = gram(x, spec);
  const Matrix ka = Matrix::Zero(n, n);
  const qp::Problem primal = primal_problem(k, ka, y, c, 0.0);

  SvmModel model;
  model.train_features = x;
  model.spec = spec;
  model.c = c;
  Diagnostics& diag = model.diagnostics;
  Vector xs(2 * n);
  Vector duals(2 * n);

  if (opts.route == SolverRoute::primal) {
    qp::Options qo;
    qo.tol = opts.tol;
    qo.max_iter = opts.max_iter;
    const qp::Solution sol = qp::solve(primal, qo);
    xs = sol.x;
    duals = sol.duals;
    diag.iterations = sol.iterations;
    diag.converged = sol.converged;
  } else {
    std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    qp::BoxOptions bo;
    bo.tol = opts.tol;
    const DualFit dual = solve_dual(k, y, all, c, bo);
    // Without the ridge, beta is the signed dual itself; the ridge only
    // moves it by O(eps) so the stacked residuals still certify.
    xs.head(n) = dual.gamma;
    const Vector f = k * dual.gamma;
    for (Eigen::Index i = 0; i < n; ++i) {
      xs(n + i) = std::max(0.0, 1.0 - y(i) * f(i));
      duals(i) = dual.box.a(i);
      duals(n + i) = c - dual.box.a(i);
    }
    diag.iterations = dual.box.sweeps;
    diag.converged = dual.box.converged;
  }

  model.beta = xs.head(n);
  diag.kkt = qp::kkt_residuals(primal, xs, duals);
  diag.kkt_scale = qp::kkt_scale(primal, xs, duals);
  diag.converged = diag.converged && qp::certified(diag.kkt, diag.kkt_scale, opts.tol);
  diag.hinge = xs.tail(n).sum();
  diag.objective = primal_objective(model.beta, k, ka, y, c, 0.0);
  if (!diag.converged) {
    std::ostringstream msg;
    msg << "fit_svm did not converge (C=" << c << "): kkt max residual " << diag.kkt.max();
    throw NotConverged(msg.str());
  }
  return model;
}

Vector decision_values(const SvmModel& model, const Matrix& x_new) {
  if (x_new.rows() != model.train_features.rows()) {
    throw DimensionError("decision_values: query has " + std::to_string(x_new.rows()) +
                         " features, model expects " +
                         std::to_string(model.train_features.rows()));
  }
  return gram(x_new, model.train_features, model.spec) * model.beta;
}

std::vector<Label> predict(const SvmModel& model, const Matrix& x_new) {
  return sign_labels(decision_values(model, x_new));
}

namespace {

void check_h(Eigen::Index h, Eigen::Index limit, const char* who) {
  if (h < 1 || h > limit) {
    throw InvalidArgument(std::string(who) + ": subspace dimension " + std::to_string(h) +
                          " outside [1, " + std::to_string(limit) + "]");
  }
}

}  // namespace

ProjectionModel fit_pca(const Matrix& x, Eigen::Index h) {
  check_h(h, std::min(x.rows(), x.cols()), "fit_pca");
  ProjectionModel model;
  model.kind = ProjectionKind::pca;
  model.train_features = x;
  model.mean = x.rowwise().mean();
  const Matrix xc = x.colwise() - model.mean;
  const double denom = x.cols() > 1 ? static_cast<double>(x.cols() - 1) : 1.0;
  Matrix cov = xc * xc.transpose() / denom;
  cov = 0.5 * (cov + cov.transpose()).eval();
  EigenPairs top = sym_eig_top(cov, h);
  model.w = std::move(top.vectors);
  model.eigenvalues = std::move(top.values);
  model.mu_var = 1.0;
  return model;
}

Matrix projection_objective(const Matrix& k, const Matrix& ka, const Vector& y_tilde,
                            double mu_var, double mu_y) {
  const Eigen::Index n = k.rows();
  if (k.cols() != n || ka.rows() != n || ka.cols() != n) {
    throw DimensionError("projection objective: Gram sizes disagree");
  }
  if (y_tilde.size() != 0 && y_tilde.size() != n) {
    throw DimensionError("projection objective: label vector has wrong length");
  }
  if (!(mu_var >= 0.0) || !(mu_y >= 0.0)) {
    throw InvalidArgument("projection objective: weights must be >= 0");
  }
  // K (mu_var H - H Ka H + mu_y H Ky H) K = mu_var (HK)'(HK) - (HK)' Ka (HK) + mu_y (HK)'y y'(HK)
  const Matrix hk = center_rows(k);
  Matrix m = mu_var * (hk.transpose() * hk);
  m.noalias() -= hk.transpose() * ka * hk;
  if (y_tilde.size() != 0 && mu_y > 0.0) {
    const Vector v = hk.transpose() * y_tilde;
    m.noalias() += mu_y * (v * v.transpose());
  }
  return 0.5 * (m + m.transpose());
}

namespace {

ProjectionModel fit_kernel_projection(ProjectionKind kind, const Matrix& x, const DomainMatrix& dm,
                                      const Vector& y_tilde, Eigen::Index h, double mu_var,
                                      double mu_y, const KernelSpec& spec) {
  spec.validate();
  const Eigen::Index n = x.cols();
  if (dm.a.cols() != n) {
    throw DimensionError("projection: domain matrix covers " + std::to_string(dm.a.cols()) +
                         " samples, features have " + std::to_string(n));
  }
  check_h(h, n, kind == ProjectionKind::mida ? "fit_mida" : "fit_smida");
  const Matrix k = gram(x, spec);
  const Matrix m = projection_objective(k, dm.gram(), y_tilde, mu_var, mu_y);
  EigenPairs top = sym_eig_top(m, h);
  ProjectionModel model;
  model.kind = kind;
  model.w = std::move(top.vectors);
  model.eigenvalues = std::move(top.values);
  model.train_features = x;
  model.spec = spec;
  model.mu_var = mu_var;
  model.mu_y = mu_y;
  return model;
}

}  // namespace

ProjectionModel fit_mida(const Matrix& x, const DomainMatrix& dm, Eigen::Index h, double mu_var,
                         const KernelSpec& spec) {
  return fit_kernel_projection(ProjectionKind::mida, x, dm, Vector(), h, mu_var, 0.0, spec);
}

ProjectionModel fit_smida(const Matrix& x, const DomainMatrix& dm, const Vector& y_tilde,
                          Eigen::Index h, double mu_var, double mu_y, const KernelSpec& spec) {
  if (y_tilde.size() != x.cols()) throw DimensionError("fit_smida: label vector has wrong length");
  return fit_kernel_projection(ProjectionKind::smida, x, dm, y_tilde, h, mu_var, mu_y, spec);
}

ProjectionModel truncate(const ProjectionModel& model, Eigen::Index h) {
  check_h(h, model.h(), "truncate");
  ProjectionModel out = model;
  out.w = model.w.leftCols(h);
  out.eigenvalues = model.eigenvalues.head(h);
  return out;
}

Matrix transform(const ProjectionModel& model, const Matrix& x_new) {
  if (x_new.rows() != model.train_features.rows()) {
    throw DimensionError("transform: query has " + std::to_string(x_new.rows()) +
                         " features, model expects " +
                         std::to_string(model.train_features.rows()));
  }
  if (model.kind == ProjectionKind::pca) {
    return model.w.transpose() * (x_new.colwise() - model.mean);
  }
  return model.w.transpose() * gram(model.train_features, x_new, model.spec);
}

double feature_scale(const Matrix& z) {
  if (z.cols() == 0) return 1.0;
  const double rms = std::sqrt(z.squaredNorm() / static_cast<double>(z.cols()));
  return rms > 0.0 && std::isfinite(rms) ? rms : 1.0;
}

}  // namespace disvm
