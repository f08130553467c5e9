#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace oracle {

double hsic_quadruple_sum(const Matrix& k, const Matrix& l) {
  const Eigen::Index n = k.rows();
  auto h = [n](Eigen::Index i, Eigen::Index j) {
    return (i == j ? 1.0 : 0.0) - 1.0 / static_cast<double>(n);
  };
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) total += k(i, j) * h(j, a) * l(a, b) * h(b, i);
  const double nm1 = static_cast<double>(n - 1);
  return total / (nm1 * nm1);
}

double simplified_hsic_trace(const Vector& beta, const Matrix& k, const Matrix& ka) {
  const Eigen::Index n = k.rows();
  Matrix h = Matrix::Identity(n, n);
  h.array() -= 1.0 / static_cast<double>(n);
  const Matrix row = beta.transpose() * k;  // 1×n
  const Matrix outer = row.transpose() * row;
  return (outer * h * ka * h).trace();
}

std::pair<Vector, Matrix> jacobi_eigen(Matrix a, double tol, int max_sweeps) {
  const Eigen::Index n = a.rows();
  Matrix v = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * std::max(1.0, a.norm())) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) > a(j, j); });
  Vector vals(n);
  Matrix vecs(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    vals(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    vecs.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return {vals, vecs};
}

QpResult dual_projected_gradient(const Matrix& q, const Vector& c, const Matrix& g, const Vector& h,
                                 double tol, long max_iter) {
  const Eigen::LLT<Matrix> llt(q);
  const Matrix qinv_gt = llt.solve(g.transpose());
  const Vector qinv_c = llt.solve(c);
  // Dual (as minimisation): 1/2 z' D z + e'z, D = G Q^-1 G', e = h + G Q^-1 c.
  const Matrix d = g * qinv_gt;
  const Vector e = h + g * qinv_c;
  const double lip = std::max(Eigen::SelfAdjointEigenSolver<Matrix>(d).eigenvalues().maxCoeff(), 1e-300);
  Vector z = Vector::Zero(h.size());
  Vector y = z;
  double t = 1.0;
  QpResult r;
  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    const Vector grad_z = d * z + e;
    double viol = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      viol = std::max(viol, std::abs(z(i) > 0.0 ? grad_z(i) : std::min(grad_z(i), 0.0)));
    }
    if (viol <= tol) break;
    const Vector grad_y = d * y + e;
    const Vector z_next = (y - grad_y / lip).cwiseMax(0.0);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = z_next + ((t - 1.0) / t_next) * (z_next - z);
    // Restart when momentum stops helping.
    if ((z_next - z).dot(grad_y) > 0.0) {
      y = z_next;
      t = 1.0;
    } else {
      t = t_next;
    }
    z = z_next;
  }
  r.z = z;
  r.x = -(qinv_c + qinv_gt * z);
  r.objective = 0.5 * r.x.dot(q * r.x) + c.dot(r.x);
  return r;
}

Vector box_projected_gradient(const Matrix& q, const Vector& c, const Vector& lo, const Vector& hi,
                              double tol, long max_iter) {
  const double lip = std::max(Eigen::SelfAdjointEigenSolver<Matrix>(q).eigenvalues().maxCoeff(), 1e-300);
  Vector a = Vector::Zero(c.size()).cwiseMax(lo).cwiseMin(hi);
  Vector y = a;
  double t = 1.0;
  for (long it = 0; it < max_iter; ++it) {
    const Vector g = q * a + c;
    double viol = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      double pg = g(i);
      if (a(i) <= lo(i)) pg = std::min(pg, 0.0);
      if (a(i) >= hi(i)) pg = std::max(pg, 0.0);
      viol = std::max(viol, std::abs(pg));
    }
    if (viol <= tol) break;
    const Vector gy = q * y + c;
    const Vector next = (y - gy / lip).cwiseMax(lo).cwiseMin(hi);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - a);
    if ((next - a).dot(gy) > 0.0) {
      y = next;
      t = 1.0;
    } else {
      t = t_next;
    }
    a = next;
  }
  return a;
}

double rbf(const Vector& a, const Vector& b, double gamma) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += (a(i) - b(i)) * (a(i) - b(i));
  return std::exp(-gamma * s);
}

double poly(const Vector& a, const Vector& b, int degree, double coef) {
  double dot = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) dot += a(i) * b(i);
  double out = 1.0;
  for (int k = 0; k < degree; ++k) out *= dot + coef;
  return out;
}

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = nd(rng);
  return m;
}

Matrix random_psd(std::mt19937_64& rng, Eigen::Index n, double ridge) {
  const Matrix b = random_matrix(rng, n, n);
  Matrix q = b.transpose() * b / static_cast<double>(n);
  q.diagonal().array() += ridge;
  return 0.5 * (q + q.transpose());
}

double subspace_distance(const Matrix& a, const Matrix& b) {
  const Matrix qa = Eigen::HouseholderQR<Matrix>(a).householderQ() * Matrix::Identity(a.rows(), a.cols());
  const Matrix qb = Eigen::HouseholderQR<Matrix>(b).householderQ() * Matrix::Identity(b.rows(), b.cols());
  // Spectral norm of the part of span(b) outside span(a) is the sine of the
  // largest principal angle, without the cancellation of sqrt(1 - cos^2).
  const Matrix resid = qb - qa * (qa.transpose() * qb);
  return Eigen::JacobiSVD<Matrix>(resid).singularValues()(0);
}

}  // namespace oracle
