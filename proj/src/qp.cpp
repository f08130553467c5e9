#include "disvm/qp.hpp"

#include "disvm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace disvm::qp {

namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

void check_shapes(const Problem& p) {
  const Eigen::Index m = p.c.size();
  const Eigen::Index r = p.h.size();
  if (p.q.rows() != m || p.q.cols() != m) throw DimensionError("qp: Q must be m×m with m = |c|");
  const bool no_rows = r == 0 && p.g.rows() == 0;
  if (!no_rows && (p.g.rows() != r || p.g.cols() != m)) {
    throw DimensionError("qp: G must be r×m with r = |h|");
  }
}

void check_convex(const Matrix& q) {
  const double scale = std::max(1.0, q.size() ? q.cwiseAbs().maxCoeff() : 0.0);
  if (asymmetry(q) > 1e-10 * scale) throw InvalidArgument("qp: Q is not symmetric");
  if (q.rows() == 0) return;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (q + q.transpose()), Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-8 * scale) {
    throw InvalidArgument("qp: Q is not positive semidefinite");
  }
}

// Largest step in (0, 1] keeping v + t * dv >= 0.
double max_step(const Vector& v, const Vector& dv) {
  double t = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) t = std::min(t, -v(i) / dv(i));
  }
  return t;
}

double relative_merit(const KktResiduals& r, const KktScale& s) {
  return std::max({r.stationarity / std::max(1.0, s.stationarity),
                   r.primal_feasibility / std::max(1.0, s.primal_feasibility),
                   r.complementarity / std::max(1.0, s.complementarity)});
}

Solution solve_unconstrained(const Problem& p, const Options& opts) {
  Solution sol;
  Eigen::LDLT<Matrix> ldlt(p.q);
  sol.x = ldlt.solve(-p.c);
  sol.duals = Vector(0);
  sol.kkt = kkt_residuals(p, sol.x, sol.duals);
  sol.objective = objective(p, sol.x);
  sol.iterations = 1;
  if (!sol.x.allFinite() || !certified(sol.kkt, kkt_scale(p, sol.x, sol.duals), opts.tol)) {
    throw SolverError("qp: unconstrained problem is unbounded below");
  }
  sol.converged = true;
  return sol;
}

}  // namespace

double objective(const Problem& p, const Vector& x) { return 0.5 * x.dot(p.q * x) + p.c.dot(x); }

KktResiduals kkt_residuals(const Problem& p, const Vector& x, const Vector& duals) {
  check_shapes(p);
  if (x.size() != p.vars() || duals.size() != p.constraints()) {
    throw DimensionError("kkt_residuals: iterate does not match the problem");
  }
  KktResiduals r;
  Vector grad = p.q * x + p.c;
  if (p.constraints() == 0) {
    r.stationarity = inf_norm(grad);
    return r;
  }
  grad.noalias() += p.g.transpose() * duals;
  const Vector slack = p.g * x - p.h;  // <= 0 when feasible
  r.stationarity = inf_norm(grad);
  r.primal_feasibility = inf_norm(slack.cwiseMax(0.0));
  r.complementarity = inf_norm(duals.cwiseProduct(slack));
  return r;
}

KktScale kkt_scale(const Problem& p, const Vector& x, const Vector& duals) {
  KktScale s;
  s.stationarity = std::max(inf_norm(p.q * x), inf_norm(p.c));
  if (p.constraints() == 0) return s;
  const double gx = inf_norm(p.g * x);
  s.stationarity = std::max(s.stationarity, inf_norm(p.g.transpose() * duals));
  s.primal_feasibility = std::max(gx, inf_norm(p.h));
  s.complementarity = inf_norm(duals) * s.primal_feasibility;
  return s;
}

bool certified(const KktResiduals& r, const KktScale& s, double tol) {
  return r.stationarity <= tol * std::max(1.0, s.stationarity) &&
         r.primal_feasibility <= tol * std::max(1.0, s.primal_feasibility) &&
         r.complementarity <= tol * std::max(1.0, s.complementarity);
}

Solution solve(const Problem& p, const Options& opts) {
  check_shapes(p);
  if (!(opts.tol > 0.0)) throw InvalidArgument("qp: tol must be positive");
  if (opts.max_iter < 1) throw InvalidArgument("qp: max_iter must be >= 1");
  check_convex(p.q);
  if (p.constraints() == 0) return solve_unconstrained(p, opts);

  const Eigen::Index m = p.vars();
  const Eigen::Index r = p.constraints();
  const Matrix& g = p.g;
  const double qscale = std::max(1.0, p.q.size() ? p.q.cwiseAbs().maxCoeff() : 0.0);
  const double reg = 1e-13 * qscale;

  Vector x;
  if (opts.warm_start) {
    if (opts.warm_start->size() != m) throw DimensionError("qp: warm start has wrong size");
    x = *opts.warm_start;
  } else {
    // Least-squares start: minimise the objective plus 1/2 |h - G x|^2.
    Matrix lhs = p.q + g.transpose() * g;
    lhs.diagonal().array() += reg + 1e-8 * qscale;
    x = Eigen::LDLT<Matrix>(lhs).solve(-p.c + g.transpose() * p.h);
  }
  // Slack h - Gx and dual Gx - h make the least-squares point stationary;
  // both are then shifted into the positive orthant.
  Vector s = p.h - g * x;
  Vector z = -s;
  if (opts.warm_start) z.setOnes();
  auto shift_positive = [](Vector& v) {
    const double lo = v.minCoeff();
    if (lo <= 0.0) v.array() += 1.0 - lo;
  };
  shift_positive(s);
  shift_positive(z);

  Solution best;
  double best_merit = std::numeric_limits<double>::infinity();
  double prev_mu = std::numeric_limits<double>::infinity();
  int stalls = 0;

  auto consider = [&](int iter) {
    KktResiduals res = kkt_residuals(p, x, z);
    const double merit = relative_merit(res, kkt_scale(p, x, z));
    if (merit < best_merit) {
      best_merit = merit;
      best.x = x;
      best.duals = z;
      best.kkt = res;
      best.iterations = iter;
    }
    return res;
  };

  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    const KktResiduals res = consider(iter);
    if (res.max() <= 0.1 * opts.tol) break;
    const double merit = best_merit;
    if (merit <= 1e-14) break;

    const Vector rd = p.q * x + p.c + g.transpose() * z;
    const Vector rp = g * x + s - p.h;
    const double mu = s.dot(z) / static_cast<double>(r);

    // Farkas certificate: z grows without bound along a ray with G^T z = 0, h^T z < 0.
    const double zmax = z.maxCoeff();
    if (zmax > 1e8 * (1.0 + inf_norm(p.c) + inf_norm(p.h))) {
      const Vector zn = z / zmax;
      if (inf_norm(g.transpose() * zn) < 1e-6 && p.h.dot(zn) < -1e-6) {
        throw InfeasibleProblem("qp: constraints are infeasible");
      }
    }
    if (inf_norm(x) > 1e15) throw SolverError("qp: problem appears unbounded below");

    // Augmented system [Q G'; G -S/Z]. Forming Q + G'(Z/S)G instead squares the
    // conditioning, which rank-deficient kernel blocks do not survive.
    Matrix kkt(m + r, m + r);
    kkt.topLeftCorner(m, m) = p.q;
    kkt.topLeftCorner(m, m).diagonal().array() += reg;
    kkt.topRightCorner(m, r) = g.transpose();
    kkt.bottomLeftCorner(r, m) = g;
    kkt.bottomRightCorner(r, r) = (-s.cwiseQuotient(z)).asDiagonal();
    const Eigen::PartialPivLU<Matrix> lu(kkt);

    auto newton = [&](const Vector& rc, Vector& dx, Vector& ds, Vector& dz) {
      Vector rhs(m + r);
      rhs.head(m) = -rd;
      rhs.tail(r) = -rp - rc.cwiseQuotient(z);
      const Vector sol = lu.solve(rhs);
      if (!sol.allFinite()) throw SolverError("qp: Newton system is singular");
      dx = sol.head(m);
      dz = sol.tail(r);
      ds = (rc - s.cwiseProduct(dz)).cwiseQuotient(z);
    };

    Vector dx, ds, dz;
    const Vector sz = s.cwiseProduct(z);
    newton(-sz, dx, ds, dz);
    const double a_aff = std::min(max_step(s, ds), max_step(z, dz));
    const double mu_aff = (s + a_aff * ds).dot(z + a_aff * dz) / static_cast<double>(r);
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

    const Vector rc =
        (Vector::Constant(r, sigma * mu) - sz - ds.cwiseProduct(dz)).eval();
    newton(rc, dx, ds, dz);
    const double a_max = std::min(max_step(s, ds), max_step(z, dz));
    const double step = std::min(1.0, 0.99 * a_max);

    x += step * dx;
    s += step * ds;
    z += step * dz;
    // Keep strictly interior.
    s = s.cwiseMax(std::numeric_limits<double>::min());
    z = z.cwiseMax(std::numeric_limits<double>::min());

    // Numerical floor: relative residuals already tight and no more progress.
    const double new_mu = s.dot(z) / static_cast<double>(r);
    stalls = (new_mu > 0.5 * prev_mu || step < 1e-8) ? stalls + 1 : 0;
    prev_mu = new_mu;
    if (merit <= 0.1 * opts.tol && stalls >= 3) break;
  }
  consider(iter);

  best.objective = objective(p, best.x);
  best.converged = certified(best.kkt, kkt_scale(p, best.x, best.duals), opts.tol);
  best.iterations = iter;
  return best;
}

}  // namespace disvm::qp
