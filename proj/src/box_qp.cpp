#include "disvm/error.hpp"
#include "disvm/qp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace disvm::qp {

namespace {

double projected(double a, double g, double lo, double hi) {
  if (a <= lo) return std::min(g, 0.0);
  if (a >= hi) return std::max(g, 0.0);
  return g;
}

// One pass of exact coordinate minimisation. Returns the largest move.
double sweep(const Matrix& q, const BoxProblem& p, Vector& a, Vector& g) {
  double moved = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double gi = g(i);
    if (projected(a(i), gi, p.lo(i), p.hi(i)) == 0.0) continue;
    const double qii = q(i, i);
    double next;
    if (qii > 0.0) {
      next = std::clamp(a(i) - gi / qii, p.lo(i), p.hi(i));
    } else {
      next = gi > 0.0 ? p.lo(i) : p.hi(i);
      if (!std::isfinite(next)) throw SolverError("box qp: unbounded along a flat coordinate");
    }
    const double delta = next - a(i);
    if (delta == 0.0) continue;
    a(i) = next;
    g.noalias() += delta * q.col(i);
    moved = std::max(moved, std::abs(delta));
  }
  return moved;
}

// Newton direction on the free block. A singular block (more free variables
// than the rank of Q) gets a tiny ridge if allowed: a gradient with a flat
// component then yields a very long step that the bound ratio test cuts short.
// Otherwise NaN.
Vector free_direction(const Matrix& qff, const Vector& gf, bool ridge) {
  const double top = std::max(qff.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  Eigen::LDLT<Matrix> ldlt(qff);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
      ldlt.vectorD().minCoeff() > 1e-12 * top) {
    return ldlt.solve(-gf);
  }
  if (!ridge) return Vector::Constant(gf.size(), NAN);
  Matrix shifted = qff;
  shifted.diagonal().array() += 1e-10 * top;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success) return Vector::Constant(gf.size(), NAN);
  return llt.solve(-gf);
}

// Primal active-set iterations: Newton steps on the free variables, dropping
// variables that hit a bound and releasing bound variables whose gradient
// points inward. Returns false if it gave up (cycling or singular system).
bool polish(const Matrix& q, const BoxProblem& p, double tol, bool ridge, Vector& a, Vector& g) {
  const Eigen::Index m = a.size();
  const int max_rounds = static_cast<int>(2 * m + 10);
  std::vector<Eigen::Index> free;
  std::vector<char> pinned(static_cast<std::size_t>(m), 0);
  for (int round = 0; round < max_rounds; ++round) {
    free.clear();
    for (Eigen::Index i = 0; i < m; ++i) {
      const bool interior = a(i) > p.lo(i) && a(i) < p.hi(i);
      const bool released = !pinned[static_cast<std::size_t>(i)] &&
                            std::abs(projected(a(i), g(i), p.lo(i), p.hi(i))) > tol;
      if (interior || released) free.push_back(i);
    }
    if (free.empty()) return true;

    const auto f = static_cast<Eigen::Index>(free.size());
    Matrix qff(f, f);
    Vector gf(f);
    for (Eigen::Index u = 0; u < f; ++u) {
      gf(u) = g(free[u]);
      for (Eigen::Index v = 0; v < f; ++v) qff(u, v) = q(free[u], free[v]);
    }
    const Vector d = free_direction(qff, gf, ridge);
    if (!d.allFinite() || d.isZero(0.0)) return false;

    // A released bound variable that the Newton direction pushes outward stays put.
    bool repin = false;
    for (Eigen::Index u = 0; u < f; ++u) {
      const Eigen::Index i = free[u];
      if ((a(i) <= p.lo(i) && d(u) < 0.0) || (a(i) >= p.hi(i) && d(u) > 0.0)) {
        pinned[static_cast<std::size_t>(i)] = 1;
        repin = true;
      }
    }
    if (repin) continue;

    double t = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index u = 0; u < f; ++u) {
      const Eigen::Index i = free[u];
      double limit = t;
      if (d(u) > 0.0) limit = (p.hi(i) - a(i)) / d(u);
      if (d(u) < 0.0) limit = (p.lo(i) - a(i)) / d(u);
      if (limit < t) {
        t = std::max(limit, 0.0);
        blocking = u;
      }
    }
    Vector step(m);
    step.setZero();
    for (Eigen::Index u = 0; u < f; ++u) {
      const Eigen::Index i = free[u];
      const double next = std::clamp(a(i) + t * d(u), p.lo(i), p.hi(i));
      step(i) = next - a(i);
      a(i) = next;
    }
    if (blocking >= 0) {
      const Eigen::Index i = free[blocking];
      const double bound = d(blocking) > 0.0 ? p.hi(i) : p.lo(i);
      step(i) += bound - a(i);
      a(i) = bound;
    }
    g.noalias() += q * step;
    if (blocking < 0) {
      if (projected_gradient_violation(a, g, p.lo, p.hi) <= tol) return true;
      std::fill(pinned.begin(), pinned.end(), 0);
    }
  }
  return false;
}

}  // namespace

double projected_gradient_violation(const Vector& a, const Vector& g, const Vector& lo,
                                    const Vector& hi) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    v = std::max(v, std::abs(projected(a(i), g(i), lo(i), hi(i))));
  }
  return v;
}

BoxSolution solve_box(const BoxProblem& p, const BoxOptions& opts) {
  const Eigen::Index m = p.c.size();
  if (p.q.rows() != m || p.q.cols() != m || p.lo.size() != m || p.hi.size() != m) {
    throw DimensionError("box qp: inconsistent dimensions");
  }
  if ((p.lo.array() > p.hi.array()).any()) throw InvalidArgument("box qp: lo > hi");
  if (!(opts.tol > 0.0)) throw InvalidArgument("box qp: tol must be positive");

  BoxSolution sol;
  sol.a = opts.warm_start ? *opts.warm_start : Vector::Zero(m);
  if (sol.a.size() != m) throw DimensionError("box qp: warm start has wrong size");
  sol.a = sol.a.cwiseMax(p.lo).cwiseMin(p.hi);
  Vector& a = sol.a;
  Vector g = p.q * a + p.c;

  int next_polish = 4;
  for (int k = 0; k < opts.max_sweeps; ++k) {
    sol.sweeps = k + 1;
    sweep(p.q, p, a, g);
    double viol = projected_gradient_violation(a, g, p.lo, p.hi);
    if (viol <= opts.tol) break;
    if (k + 1 >= next_polish) {
      // The active set is usually right long before coordinate descent has
      // converged, so a few Newton steps finish the job.
      Vector a_try = a;
      Vector g_try = g;
      // The ridged solve is costly on big singular blocks, keep it for stalls.
      const bool ridge = k + 1 >= 64;
      if (polish(p.q, p, opts.tol, ridge, a_try, g_try)) {
        g_try = p.q * a_try + p.c;
        if (projected_gradient_violation(a_try, g_try, p.lo, p.hi) < viol) {
          a = a_try;
          g = g_try;
        }
      }
      if (projected_gradient_violation(a, g, p.lo, p.hi) <= opts.tol) break;
      next_polish = 2 * next_polish;
    }
  }
  g = p.q * a + p.c;
  sol.gradient = g;
  sol.violation = projected_gradient_violation(a, g, p.lo, p.hi);
  sol.converged = sol.violation <= opts.tol;
  return sol;
}

}  // namespace disvm::qp
