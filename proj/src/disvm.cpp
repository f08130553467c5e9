#include "disvm/disvm.hpp"

#include "disvm/error.hpp"
#include "disvm/hsic.hpp"

#include <cmath>
#include <sstream>

namespace disvm {

double coefficient_ridge(const Matrix& k) {
  if (k.rows() == 0) return 0.0;
  return 1e-8 * k.trace() / static_cast<double>(k.rows());
}

MarginOperator::MarginOperator(const Matrix& k, const Matrix& a, double lambda)
    : lambda_(lambda), eps_(coefficient_ridge(k)) {
  const Eigen::Index n = k.rows();
  if (k.cols() != n) throw DimensionError("margin operator: Gram matrix must be square");
  if (a.cols() != n && a.rows() != 0) {
    throw DimensionError("margin operator: domain matrix has " + std::to_string(a.cols()) +
                         " columns for " + std::to_string(n) + " samples");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("margin operator: lambda must be finite and >= 0");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (k + k.transpose()));
  if (eig.info() != Eigen::Success) throw SolverError("margin operator: eigensolver failed");
  const Vector& s_all = eig.eigenvalues();
  const double s_max = n > 0 ? std::max(s_all.maxCoeff(), 0.0) : 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (s_all(i) > 1e-12 * s_max && s_all(i) > 0.0) keep.push_back(i);
  }
  const auto r = static_cast<Eigen::Index>(keep.size());
  Matrix u(n, r);
  Vector s(r);
  for (Eigen::Index j = 0; j < r; ++j) {
    u.col(j) = eig.eigenvectors().col(keep[j]);
    s(j) = s_all(keep[j]);
  }

  const Vector root = s.cwiseSqrt();
  const Matrix rr = u * root.asDiagonal();  // K ~ R R^T
  basis_ = u * root.cwiseInverse().asDiagonal();
  r_t_ = rr.transpose();

  Matrix t = Matrix::Identity(r, r);
  if (a.rows() > 0 && lambda > 0.0 && r > 0) {
    const Matrix hr = rr.rowwise() - rr.colwise().mean();
    const Matrix f = a * hr;
    t.noalias() += lambda * (f.transpose() * f);
  }
  if (r > 0) t.diagonal() += eps_ * s.cwiseInverse();
  t_.compute(t);
  if (t_.info() != Eigen::Success) throw SolverError("margin operator: factorisation failed");

  const Matrix z = t_.matrixL().solve(r_t_);
  m_ = z.transpose() * z;
}

Vector MarginOperator::beta(const Vector& gamma) const {
  if (gamma.size() != size()) throw DimensionError("margin operator: gamma has wrong length");
  if (basis_.cols() == 0) return Vector::Zero(size());
  return basis_ * t_.solve(r_t_ * gamma);
}

DualFit solve_dual(const Matrix& m, const Vector& y, const std::vector<Eigen::Index>& labeled,
                   double c, const qp::BoxOptions& opts) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n || y.size() != n) throw DimensionError("dual: operator and labels disagree");
  const auto l = static_cast<Eigen::Index>(labeled.size());
  qp::BoxProblem p;
  p.q.resize(l, l);
  for (Eigen::Index i = 0; i < l; ++i) {
    for (Eigen::Index j = 0; j < l; ++j) {
      p.q(i, j) = y(labeled[i]) * y(labeled[j]) * m(labeled[i], labeled[j]);
    }
  }
  p.c = Vector::Constant(l, -1.0);
  p.lo = Vector::Zero(l);
  p.hi = Vector::Constant(l, c);

  DualFit out;
  out.box = qp::solve_box(p, opts);
  out.gamma = Vector::Zero(n);
  for (Eigen::Index i = 0; i < l; ++i) out.gamma(labeled[i]) = y(labeled[i]) * out.box.a(i);
  return out;
}

namespace {

std::vector<Eigen::Index> labeled_positions(const Vector& y_tilde) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < y_tilde.size(); ++i) {
    if (y_tilde(i) != 0.0) idx.push_back(i);
  }
  return idx;
}

Matrix penalised_block(const Matrix& k, const Matrix& ka, double lambda) {
  Matrix p = k;
  if (lambda > 0.0) {
    const Matrix hk = center_rows(k);
    p.noalias() += lambda * (hk.transpose() * ka * hk);
  }
  p = 0.5 * (p + p.transpose()).eval();
  p.diagonal().array() += coefficient_ridge(k);
  return p;
}

void check_hyper(double c, double lambda) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("C must be finite and > 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("lambda must be finite and >= 0");
  }
}

}  // namespace

qp::Problem primal_problem(const Matrix& k, const Matrix& ka, const Vector& y_tilde, double c,
                           double lambda) {
  const Eigen::Index n = k.rows();
  if (k.cols() != n || ka.rows() != n || ka.cols() != n || y_tilde.size() != n) {
    throw DimensionError("primal problem: dimension mismatch");
  }
  check_hyper(c, lambda);
  const auto lab = labeled_positions(y_tilde);
  const auto l = static_cast<Eigen::Index>(lab.size());

  qp::Problem p;
  p.q = Matrix::Zero(n + l, n + l);
  p.q.topLeftCorner(n, n) = penalised_block(k, ka, lambda);
  p.c = Vector::Zero(n + l);
  p.c.tail(l).setConstant(c);
  p.g = Matrix::Zero(2 * l, n + l);
  p.h = Vector::Zero(2 * l);
  for (Eigen::Index i = 0; i < l; ++i) {
    // y_i (K b)_i >= 1 - xi_i  and  xi_i >= 0
    p.g.row(i).head(n) = -y_tilde(lab[i]) * k.row(lab[i]);
    p.g(i, n + i) = -1.0;
    p.h(i) = -1.0;
    p.g(l + i, n + i) = -1.0;
  }
  return p;
}

double primal_objective(const Vector& beta, const Matrix& k, const Matrix& ka,
                        const Vector& y_tilde, double c, double lambda) {
  const Vector f = k * beta;
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (y_tilde(i) != 0.0) hinge += std::max(0.0, 1.0 - y_tilde(i) * f(i));
  }
  const double penalty = lambda > 0.0 ? simplified_hsic(beta, k, ka).value : 0.0;
  return 0.5 * beta.dot(f) + c * hinge + 0.5 * lambda * penalty;
}

DisvmModel fit(const Dataset& input, const KernelSpec& spec, double c, double lambda,
               const FitOptions& opts) {
  spec.validate();
  check_hyper(c, lambda);
  if (!(opts.tol > 0.0)) throw InvalidArgument("tol must be > 0");
  const Dataset ds = mask_test_labels(input);
  validate(ds, false);

  const DomainMatrix dm = encode_domains(ds, opts.groups);
  const Vector y = recode_labels(ds);
  const Matrix k = gram(ds.features, spec);
  const Matrix ka = dm.gram();
  const Eigen::Index n = k.rows();
  const auto lab = labeled_positions(y);
  const auto l = static_cast<Eigen::Index>(lab.size());

  DisvmModel model;
  model.train_features = ds.features;
  model.spec = spec;
  model.c = c;
  model.lambda = lambda;

  const qp::Problem primal = primal_problem(k, ka, y, c, lambda);
  Vector x(n + l);
  Vector duals(2 * l);
  Diagnostics& diag = model.diagnostics;

  if (opts.route == SolverRoute::dual) {
    const MarginOperator op(k, dm.a, lambda);
    qp::BoxOptions bo;
    bo.tol = opts.tol;
    bo.max_sweeps = std::max(opts.max_iter, 1) * 40;
    const DualFit dual = solve_dual(op.matrix(), y, lab, c, bo);
    model.beta = op.beta(dual.gamma);
    const Vector f = k * model.beta;
    x.head(n) = model.beta;
    for (Eigen::Index i = 0; i < l; ++i) {
      x(n + i) = std::max(0.0, 1.0 - y(lab[i]) * f(lab[i]));
      duals(i) = dual.box.a(i);
      duals(l + i) = c - dual.box.a(i);
    }
    diag.iterations = dual.box.sweeps;
    diag.converged = dual.box.converged;
  } else {
    qp::Options qo;
    qo.tol = opts.tol;
    qo.max_iter = opts.max_iter;
    const qp::Solution sol = qp::solve(primal, qo);
    x = sol.x;
    duals = sol.duals;
    model.beta = x.head(n);
    diag.iterations = sol.iterations;
    diag.converged = sol.converged;
  }

  diag.kkt = qp::kkt_residuals(primal, x, duals);
  diag.kkt_scale = qp::kkt_scale(primal, x, duals);
  diag.converged = diag.converged && qp::certified(diag.kkt, diag.kkt_scale, opts.tol);
  diag.hinge = x.tail(l).sum();
  diag.penalty = simplified_hsic(model.beta, k, ka).value;
  diag.objective = primal_objective(model.beta, k, ka, y, c, lambda);

  if (!diag.converged) {
    std::ostringstream msg;
    msg << "fit did not converge (C=" << c << ", lambda=" << lambda
        << "): kkt stationarity=" << diag.kkt.stationarity
        << " feasibility=" << diag.kkt.primal_feasibility
        << " complementarity=" << diag.kkt.complementarity;
    throw NotConverged(msg.str());
  }
  return model;
}

Vector decision_values(const DisvmModel& model, const Matrix& x_new) {
  if (x_new.rows() != model.train_features.rows()) {
    throw DimensionError("decision_values: query has " + std::to_string(x_new.rows()) +
                         " features, model expects " +
                         std::to_string(model.train_features.rows()));
  }
  return gram(x_new, model.train_features, model.spec) * model.beta;
}

std::vector<Label> sign_labels(const Vector& decisions) {
  std::vector<Label> out(static_cast<std::size_t>(decisions.size()));
  for (Eigen::Index i = 0; i < decisions.size(); ++i) {
    out[static_cast<std::size_t>(i)] = sign_label(decisions(i));
  }
  return out;
}

std::vector<Label> predict(const DisvmModel& model, const Matrix& x_new) {
  return sign_labels(decision_values(model, x_new));
}

}  // namespace disvm
