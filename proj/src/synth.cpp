#include "disvm/synth.hpp"

#include "disvm/error.hpp"
#include "disvm/rng.hpp"

#include <cmath>
#include <cstdio>

namespace disvm {

void SynthConfig::validate() const {
  if (d < 3) throw InvalidArgument("synth: d must be >= 3");
  if (experiments < 1 || subjects_per_experiment < 1 || samples_per_subject_per_class < 1) {
    throw InvalidArgument("synth: counts must be >= 1");
  }
  if (!(class_signal_strength >= 0.0) || !(subject_shift_strength >= 0.0) ||
      !(experiment_shift_strength >= 0.0)) {
    throw InvalidArgument("synth: strengths must be >= 0");
  }
  if (!(noise_std > 0.0) || !std::isfinite(noise_std)) {
    throw InvalidArgument("synth: noise_std must be > 0");
  }
}

std::string experiment_name(int index) {
  if (index >= 0 && index < 26) return std::string(1, static_cast<char>('A' + index));
  return "E" + std::to_string(index + 1);
}

namespace {

Vector normal_vector(Rng& rng, Eigen::Index d) {
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = rng.normal();
  return v;
}

Vector unit_direction(Rng& rng, Eigen::Index d) {
  Vector u = normal_vector(rng, d);
  while (u.norm() == 0.0) u = normal_vector(rng, d);
  return u / u.norm();
}

Vector orthogonal_part(const Vector& v, const Vector& u) { return v - u.dot(v) * u; }

// Cayley rotation (I - S)^{-1} (I + S) of a skew-symmetric S confined to the
// complement of u, so u is a fixed point.
Matrix complement_rotation(Rng& rng, const Vector& u, double strength) {
  const Eigen::Index d = u.size();
  Matrix z(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) z(i, j) = rng.normal();
  }
  if (strength == 0.0) return Matrix::Identity(d, d);
  const Matrix p = Matrix::Identity(d, d) - u * u.transpose();
  Matrix g = p * (z - z.transpose()) * p;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g.transpose() * g, Eigen::EigenvaluesOnly);
  const double norm = std::sqrt(std::max(eig.eigenvalues().maxCoeff(), 0.0));
  if (norm == 0.0) return Matrix::Identity(d, d);
  const Matrix s = (0.5 * strength / norm) * g;
  const Matrix id = Matrix::Identity(d, d);
  return (id - s).partialPivLu().solve(id + s);
}

std::string two_digits(int v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", v);
  return buf;
}

}  // namespace

Vector synthetic_class_direction(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  return unit_direction(rng, cfg.d);
}

NamedDatasets generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const Eigen::Index d = cfg.d;
  const Vector u = unit_direction(rng, d);

  NamedDatasets out;
  for (int e = 0; e < cfg.experiments; ++e) {
    const std::string name = experiment_name(e);
    const Matrix rot = complement_rotation(rng, u, cfg.experiment_shift_strength);
    const auto per_subject = static_cast<std::size_t>(2 * cfg.samples_per_subject_per_class);
    const std::size_t n = per_subject * static_cast<std::size_t>(cfg.subjects_per_experiment);

    Dataset ds;
    ds.features.resize(d, static_cast<Eigen::Index>(n));
    ds.labels.reserve(n);
    Eigen::Index col = 0;
    for (int s = 0; s < cfg.subjects_per_experiment; ++s) {
      Vector offset = orthogonal_part(normal_vector(rng, d), u);
      const double norm = offset.norm();
      offset = norm > 0.0 ? Vector(offset * (cfg.subject_shift_strength / norm)) : Vector::Zero(d);
      const std::string subject = name + "/sub" + two_digits(s + 1);
      for (const Label label : {Label::positive, Label::negative}) {
        const Vector centre = rot * (cfg.class_signal_strength * label_value(label) * u + offset);
        for (int k = 0; k < cfg.samples_per_subject_per_class; ++k) {
          ds.features.col(col) = centre + cfg.noise_std * normal_vector(rng, d);
          ds.labels.push_back(label);
          ds.sample_id.push_back(name + "-" + two_digits(s + 1) + "-" +
                                 (label == Label::positive ? "p" : "n") + std::to_string(k));
          ds.experiment_id.push_back(name);
          ds.subject_id.push_back(subject);
          ds.role.push_back(Role::source);
          ++col;
        }
      }
    }
    out.emplace_back(name, std::move(ds));
  }
  return out;
}

}  // namespace disvm
