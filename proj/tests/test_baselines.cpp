#include "disvm/baselines.hpp"
#include "disvm/domain.hpp"
#include "disvm/error.hpp"
#include "disvm/hsic.hpp"
#include "disvm/synth.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <random>

using namespace disvm;

namespace {

std::vector<Label> to_labels(std::initializer_list<int> v) {
  std::vector<Label> out;
  for (int x : v) out.push_back(x > 0 ? Label::positive : Label::negative);
  return out;
}

Matrix random_frame(std::mt19937_64& rng, Eigen::Index n, Eigen::Index h) {
  Eigen::HouseholderQR<Matrix> qr(oracle::random_matrix(rng, n, h));
  return qr.householderQ() * Matrix::Identity(n, h);
}

double correlation(const Vector& a, const Vector& b) {
  const Vector ac = a.array() - a.mean();
  const Vector bc = b.array() - b.mean();
  return ac.dot(bc) / (ac.norm() * bc.norm());
}

// Domain HSIC of projected features after scaling them to unit total variance,
// so projections living on different scales compare fairly.
double domain_dependence(const Matrix& z, const DomainMatrix& dm) {
  const Matrix zc = center_cols(z);
  const Matrix zn = z / zc.norm();
  return hsic(zn, dm.a, KernelSpec::linear(), KernelSpec::linear()).value;
}

}  // namespace

TEST_SUITE("baselines") {
  TEST_CASE("two-point SVM meets the margin exactly") {
    Matrix x(1, 2);
    x << 1.0, -1.0;
    for (const SolverRoute route : {SolverRoute::primal, SolverRoute::dual}) {
      SvmOptions o;
      o.route = route;
      const SvmModel m = fit_svm(x, to_labels({1, -1}), KernelSpec::linear(), 10.0, o);
      const Vector f = decision_values(m, x);
      CHECK(std::abs(f(0) - 1.0) <= 1e-6);
      CHECK(std::abs(f(1) + 1.0) <= 1e-6);
      CHECK(m.diagnostics.converged);
    }
  }

  TEST_CASE("duplicating every sample keeps the decision function") {
    std::mt19937_64 rng(4);
    Matrix x(2, 4);
    x << 2, 1, -1, -2, 1, -1, 1, -1;
    const auto y = to_labels({1, 1, -1, -1});
    Matrix x2(2, 8);
    x2 << x, x;
    std::vector<Label> y2 = y;
    y2.insert(y2.end(), y.begin(), y.end());
    SvmOptions tight;
    tight.tol = 1e-9;
    const SvmModel a = fit_svm(x, y, KernelSpec::linear(), 10.0, tight);
    const SvmModel b = fit_svm(x2, y2, KernelSpec::linear(), 10.0, tight);
    const Matrix q = oracle::random_matrix(rng, 2, 15);
    CHECK((decision_values(a, q) - decision_values(b, q)).cwiseAbs().maxCoeff() <= 1e-6);
  }

  TEST_CASE("separable random sets are fitted perfectly at large C") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 10; ++rep) {
      Vector w(3);
      for (int i = 0; i < 3; ++i) w(i) = nd(rng);
      Matrix x(3, 10);
      std::vector<Label> y;
      for (Eigen::Index j = 0; j < 10;) {
        Vector p(3);
        for (int i = 0; i < 3; ++i) p(i) = nd(rng);
        const double s = w.dot(p) / w.norm();
        if (std::abs(s) < 0.2) continue;
        x.col(j++) = p;
        y.push_back(sign_label(s));
      }
      if (std::count(y.begin(), y.end(), Label::positive) % 10 == 0) continue;
      const SvmModel m = fit_svm(x, y, KernelSpec::linear(), 1e4);
      const auto p = predict(m, x);
      CHECK(p == y);
    }
  }

  TEST_CASE("SVM input checks") {
    Matrix x(1, 2);
    x << 1.0, 2.0;
    CHECK_THROWS_AS(fit_svm(x, to_labels({1, 1}), KernelSpec::linear(), 1.0), DataError);
    CHECK_THROWS_AS(fit_svm(x, to_labels({1}), KernelSpec::linear(), 1.0), DimensionError);
    CHECK_THROWS_AS(fit_svm(x, to_labels({1, -1}), KernelSpec::linear(), -1.0), InvalidArgument);
  }

  TEST_CASE("PCA on rank-one data") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    Vector dir(3);
    dir << 1.0, 2.0, -0.5;
    Matrix x(3, 25);
    Vector t(25);
    for (int j = 0; j < 25; ++j) {
      t(j) = nd(rng);
      x.col(j) = Vector::Constant(3, 0.3) + t(j) * dir;
    }
    const ProjectionModel full = fit_pca(x, 3);
    CHECK(full.eigenvalues(0) / full.eigenvalues.sum() >= 0.9999);
    const ProjectionModel one = fit_pca(x, 1);
    const Matrix z = transform(one, x);
    const double sign = correlation(z.row(0).transpose(), t) > 0 ? 1.0 : -1.0;
    for (int i = 0; i < 25; ++i)
      for (int j = 0; j < 25; ++j)
        if (t(i) < t(j)) CHECK(sign * z(0, i) < sign * z(0, j));
  }

  TEST_CASE("full PCA is an orthogonal change of basis") {
    std::mt19937_64 rng(2);
    const Matrix x = oracle::random_matrix(rng, 4, 30);
    const ProjectionModel m = fit_pca(x, 4);
    const Matrix z = transform(m, x);
    for (int i = 0; i < 30; ++i)
      for (int j = i + 1; j < 30; ++j)
        CHECK(std::abs((z.col(i) - z.col(j)).norm() - (x.col(i) - x.col(j)).norm()) <= 1e-8);
    const Matrix back = m.w * z;
    CHECK((back - (x.colwise() - m.mean)).cwiseAbs().maxCoeff() <= 1e-8);
  }

  TEST_CASE("PCA captured variance against a full Jacobi decomposition") {
    std::mt19937_64 rng(3);
    const Matrix x = oracle::random_matrix(rng, 20, 30);
    const ProjectionModel m = fit_pca(x, 5);
    const Matrix xc = x.colwise() - x.rowwise().mean();
    const Matrix cov = xc * xc.transpose() / 29.0;
    const auto [vals, vecs] = oracle::jacobi_eigen(cov);
    CHECK(std::abs(m.eigenvalues.sum() - vals.head(5).sum()) <= 1e-8);
    CHECK(std::abs((m.w.transpose() * cov * m.w).trace() - vals.head(5).sum()) <= 1e-8);
    CHECK_THROWS_AS(fit_pca(x, 0), InvalidArgument);
    CHECK_THROWS_AS(fit_pca(x, 21), InvalidArgument);
  }

  TEST_CASE("MIDA with a single domain is kernel PCA") {
    std::mt19937_64 rng(5);
    const Matrix x = oracle::random_matrix(rng, 6, 24);
    Dataset ds = testing::make_dataset(x, std::vector<int>(24, 0), std::vector<std::string>(24, "e"),
                                       std::vector<std::string>(24, "s"));
    const DomainMatrix dm = encode_domains(ds);
    for (const KernelSpec spec : {KernelSpec::linear(), KernelSpec::rbf(0.1)}) {
      const ProjectionModel m = fit_mida(x, dm, 4, 1.0, spec);
      const Matrix k = gram(x, spec);
      const Matrix h = Matrix::Identity(24, 24) - Matrix::Constant(24, 24, 1.0 / 24.0);
      const auto [vals, vecs] = oracle::jacobi_eigen(k * h * k);
      CHECK(oracle::subspace_distance(m.w, vecs.leftCols(4)) <= 1e-6);
    }
  }

  TEST_CASE("projections are orthonormal and beat random frames") {
    std::mt19937_64 rng(6);
    const Dataset ds = testing::random_problem(rng, 40, 5, 4, 1.0, 10);
    const DomainMatrix dm = encode_domains(ds);
    const Vector y = recode_labels(ds);
    const KernelSpec spec = KernelSpec::rbf(0.2);
    const ProjectionModel mida = fit_mida(ds.features, dm, 5, 1.0, spec);
    const ProjectionModel smida = fit_smida(ds.features, dm, y, 5, 1.0, 2.0, spec);
    const ProjectionModel pca = fit_pca(ds.features, 3);
    for (const auto* m : {&mida, &smida, &pca}) {
      const Matrix g = m->w.transpose() * m->w;
      CHECK((g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <= 1e-8);
    }
    const Matrix k = gram(ds.features, spec);
    const Matrix obj = projection_objective(k, dm.gram(), Vector(), 1.0, 0.0);
    const double best = (mida.w.transpose() * obj * mida.w).trace();
    int beaten = 0;
    for (int t = 0; t < 1000; ++t) {
      const Matrix f = random_frame(rng, 40, 5);
      beaten += (f.transpose() * obj * f).trace() > best + 1e-9 * std::abs(best);
    }
    CHECK(beaten == 0);
  }

  TEST_CASE("SMIDA limits") {
    std::mt19937_64 rng(7);
    const Dataset ds = testing::random_problem(rng, 30, 4, 3, 1.0, 6);
    const DomainMatrix dm = encode_domains(ds);
    const Vector y = recode_labels(ds);
    const KernelSpec spec = KernelSpec::linear();
    const ProjectionModel mida = fit_mida(ds.features, dm, 3, 1.0, spec);
    const ProjectionModel s0 = fit_smida(ds.features, dm, y, 3, 1.0, 0.0, spec);
    CHECK(oracle::subspace_distance(mida.w, s0.w) <= 1e-8);
    const ProjectionModel su = fit_smida(ds.features, dm, Vector::Zero(30), 3, 1.0, 5.0, spec);
    CHECK(oracle::subspace_distance(mida.w, su.w) <= 1e-8);
  }

  TEST_CASE("SMIDA with a heavy label weight aligns with the labels") {
    std::mt19937_64 rng(8);
    const Dataset ds = testing::random_problem(rng, 40, 5, 2, 2.5);
    const DomainMatrix dm = encode_domains(ds);
    const Vector y = recode_labels(ds);
    const ProjectionModel m = fit_smida(ds.features, dm, y, 1, 1.0, 100.0, KernelSpec::linear());
    const Matrix z = transform(m, ds.features);
    const double r = correlation(z.row(0).transpose(), y);
    MESSAGE("label correlation " << r);
    CHECK(std::abs(r) >= 0.9);
  }

  TEST_CASE("MIDA features carry less domain dependence than PCA features") {
    const NamedDatasets data = generate_synthetic(SynthConfig{});
    std::vector<const Dataset*> parts;
    for (const auto& [name, ds] : data) parts.push_back(&ds);
    const Dataset all = concat(parts);
    const DomainMatrix dm = encode_domains(all);
    const Eigen::Index h = 10;
    const double d_pca = domain_dependence(transform(fit_pca(all.features, h), all.features), dm);
    const double d_mida = domain_dependence(
        transform(fit_mida(all.features, dm, h, 1.0, KernelSpec::linear()), all.features), dm);
    MESSAGE("domain HSIC pca=" << d_pca << " mida=" << d_mida);
    CHECK(d_mida < d_pca);
  }

  TEST_CASE("transform is pointwise and checks dimensions") {
    std::mt19937_64 rng(9);
    const Dataset ds = testing::random_problem(rng, 20, 3, 2, 1.0);
    const ProjectionModel m =
        fit_mida(ds.features, encode_domains(ds), 2, 1.0, KernelSpec::rbf(0.5));
    Matrix q(3, 3);
    q << ds.features.col(3), ds.features.col(5), ds.features.col(3);
    const Matrix z = transform(m, q);
    CHECK(z.col(0) == z.col(2));
    CHECK_THROWS_AS(transform(m, Matrix::Zero(4, 1)), DimensionError);
    const ProjectionModel t = truncate(m, 1);
    CHECK(t.h() == 1);
    CHECK((transform(t, q).row(0) - z.row(0)).cwiseAbs().maxCoeff() <=
          1e-12 * z.cwiseAbs().maxCoeff());
  }
}
