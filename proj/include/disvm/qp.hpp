#pragma once

#include "disvm/kernel.hpp"

#include <optional>

namespace disvm::qp {

/// minimize 1/2 x^T Q x + c^T x  subject to  G x <= h.
struct Problem {
  Matrix q;
  Vector c;
  Matrix g;  // r×m, r may be zero
  Vector h;

  Eigen::Index vars() const { return c.size(); }
  Eigen::Index constraints() const { return h.size(); }
};

struct KktResiduals {
  double stationarity = 0.0;        // |Q x + c + G^T z|_inf
  double primal_feasibility = 0.0;  // |max(G x - h, 0)|_inf
  double complementarity = 0.0;     // |z .* (G x - h)|_inf

  double max() const { return std::max({stationarity, primal_feasibility, complementarity}); }
};

/// Natural magnitudes of the three residual terms, used to judge them relatively.
struct KktScale {
  double stationarity = 1.0;
  double primal_feasibility = 1.0;
  double complementarity = 1.0;
};

struct Solution {
  Vector x;
  Vector duals;
  double objective = 0.0;
  KktResiduals kkt;
  int iterations = 0;
  bool converged = false;
};

struct Options {
  double tol = 1e-6;
  int max_iter = 500;
  std::optional<Vector> warm_start;
};

/// Primal-dual interior point (Mehrotra predictor-corrector) on the dense
/// problem. Throws InvalidArgument for an asymmetric or indefinite Q and
/// InfeasibleProblem when a Farkas certificate appears. Hitting max_iter
/// returns the best iterate with converged = false.
Solution solve(const Problem& p, const Options& opts = {});

KktResiduals kkt_residuals(const Problem& p, const Vector& x, const Vector& duals);
inline KktResiduals kkt_residuals(const Problem& p, const Solution& s) {
  return kkt_residuals(p, s.x, s.duals);
}
KktScale kkt_scale(const Problem& p, const Vector& x, const Vector& duals);

/// Absolute residuals within tol, or within tol relative to the problem's own
/// magnitudes (badly scaled problems cannot reach absolute 1e-6 in double).
bool certified(const KktResiduals& r, const KktScale& s, double tol);

double objective(const Problem& p, const Vector& x);

// ---------------------------------------------------------------------------
// Box-constrained QP:  minimize 1/2 a^T Q a + c^T a  subject to lo <= a <= hi.
// Kernel SVMs without an offset have exactly this dual.

struct BoxProblem {
  Matrix q;
  Vector c;
  Vector lo;
  Vector hi;
};

struct BoxSolution {
  Vector a;
  Vector gradient;       // Q a + c
  double violation = 0;  // largest projected-gradient entry
  int sweeps = 0;
  bool converged = false;
};

struct BoxOptions {
  double tol = 1e-6;
  int max_sweeps = 20000;
  std::optional<Vector> warm_start;
};

/// Coordinate descent followed by active-set Newton polishing on the free
/// variables. Converged when the projected gradient is below tol everywhere.
BoxSolution solve_box(const BoxProblem& p, const BoxOptions& opts = {});

double projected_gradient_violation(const Vector& a, const Vector& g, const Vector& lo,
                                    const Vector& hi);

}  // namespace disvm::qp
