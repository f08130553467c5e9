#include "disvm/domain.hpp"

#include "disvm/error.hpp"

#include <vector>

namespace disvm {

namespace {

// Assigns column numbers in order of first appearance.
std::vector<Eigen::Index> index_by_first_appearance(const std::vector<std::string>& keys,
                                                    std::map<std::string, Eigen::Index>& index) {
  std::vector<Eigen::Index> cols;
  cols.reserve(keys.size());
  for (const auto& k : keys) {
    auto [it, inserted] = index.try_emplace(k, static_cast<Eigen::Index>(index.size()));
    cols.push_back(it->second);
  }
  return cols;
}

Matrix one_hot(const std::vector<Eigen::Index>& cols, Eigen::Index width) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(cols.size()), width);
  for (std::size_t i = 0; i < cols.size(); ++i) m(static_cast<Eigen::Index>(i), cols[i]) = 1.0;
  return m;
}

}  // namespace

DomainMatrix encode_domains(const Dataset& ds, const AccessionGroups& groups) {
  const std::size_t n = ds.experiment_id.size();
  if (n == 0) throw DataError("encode_domains: empty dataset");
  if (ds.subject_id.size() != n) throw DimensionError("encode_domains: id vectors differ in length");

  std::vector<std::string> subject_keys;
  subject_keys.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (ds.experiment_id[i].empty() || ds.subject_id[i].empty()) {
      throw DataError("encode_domains: sample " + std::to_string(i) + " lacks an identifier");
    }
    auto g = groups.find(ds.experiment_id[i]);
    subject_keys.push_back(g == groups.end() ? ds.subject_id[i]
                                             : g->second + "/" + ds.subject_id[i]);
  }

  DomainMatrix out;
  const auto exp_cols = index_by_first_appearance(ds.experiment_id, out.experiment_index);
  const auto sub_cols = index_by_first_appearance(subject_keys, out.subject_index);
  out.experiments = one_hot(exp_cols, static_cast<Eigen::Index>(out.experiment_index.size()));
  out.subjects = one_hot(sub_cols, static_cast<Eigen::Index>(out.subject_index.size()));

  out.a.resize(out.p() + out.q(), static_cast<Eigen::Index>(n));
  out.a.topRows(out.p()) = out.experiments.transpose();
  out.a.bottomRows(out.q()) = out.subjects.transpose();
  return out;
}

Vector recode_labels(std::span<const Label> labels) {
  Vector y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    switch (labels[i]) {
      case Label::positive:
      case Label::negative:
      case Label::unlabeled:
        y(static_cast<Eigen::Index>(i)) = label_value(labels[i]);
        break;
      default:
        throw DataError("recode_labels: label outside {1,-1,NA} at sample " + std::to_string(i));
    }
  }
  return y;
}

Vector recode_labels(const Dataset& ds) { return recode_labels(std::span<const Label>(ds.labels)); }

}  // namespace disvm
