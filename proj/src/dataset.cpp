#include "disvm/dataset.hpp"

#include "disvm/error.hpp"

namespace disvm {

std::string to_string(Role role) {
  switch (role) {
    case Role::source:
      return "source";
    case Role::target_labeled:
      return "target_labeled";
    case Role::target_test:
      return "target_test";
  }
  return "unknown";
}

Role parse_role(std::string_view token) {
  if (token == "source") return Role::source;
  if (token == "target_labeled") return Role::target_labeled;
  if (token == "target_test") return Role::target_test;
  throw DataError("unknown role token '" + std::string(token) + "'");
}

bool Dataset::operator==(const Dataset& o) const {
  return features.rows() == o.features.rows() && features.cols() == o.features.cols() &&
         features == o.features && labels == o.labels && sample_id == o.sample_id &&
         experiment_id == o.experiment_id && subject_id == o.subject_id && role == o.role;
}

void validate(const Dataset& ds, bool allow_labeled_test) {
  const std::size_t n = ds.labels.size();
  if (n == 0) throw DataError("dataset is empty");
  if (ds.features.rows() < 1) throw DataError("dataset has no feature columns");
  if (static_cast<std::size_t>(ds.features.cols()) != n || ds.sample_id.size() != n ||
      ds.experiment_id.size() != n || ds.subject_id.size() != n || ds.role.size() != n) {
    throw DataError("dataset fields have inconsistent sample counts");
  }
  if (!ds.features.allFinite()) throw DataError("dataset contains non-finite features");

  bool pos = false;
  bool neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Label l = ds.labels[i];
    if (l != Label::positive && l != Label::negative && l != Label::unlabeled) {
      throw DataError("sample " + ds.sample_id[i] + ": label outside {1,-1,NA}");
    }
    if (ds.experiment_id[i].empty() || ds.subject_id[i].empty()) {
      throw DataError("sample " + ds.sample_id[i] + ": missing experiment or subject id");
    }
    if (ds.role[i] == Role::target_test) {
      if (!allow_labeled_test && is_labeled(l)) {
        throw DataError("sample " + ds.sample_id[i] + ": target_test sample carries a label");
      }
      continue;
    }
    if (!is_labeled(l)) {
      throw DataError("sample " + ds.sample_id[i] + ": " + to_string(ds.role[i]) +
                      " sample must be labeled");
    }
    pos = pos || l == Label::positive;
    neg = neg || l == Label::negative;
  }
  if (!(pos && neg)) throw DataError("labeled samples must contain both classes");
}

Dataset mask_test_labels(Dataset ds) {
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    if (ds.role[i] == Role::target_test) ds.labels[i] = Label::unlabeled;
  }
  return ds;
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> idx) {
  Dataset out;
  out.features.resize(ds.features.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::size_t i = idx[k];
    if (i >= ds.size()) throw DimensionError("subset: index out of range");
    out.features.col(static_cast<Eigen::Index>(k)) = ds.features.col(static_cast<Eigen::Index>(i));
    out.labels.push_back(ds.labels[i]);
    out.sample_id.push_back(ds.sample_id[i]);
    out.experiment_id.push_back(ds.experiment_id[i]);
    out.subject_id.push_back(ds.subject_id[i]);
    out.role.push_back(ds.role[i]);
  }
  return out;
}

Dataset concat(std::span<const Dataset* const> parts) {
  Dataset out;
  if (parts.empty()) return out;
  const Eigen::Index d = parts.front()->dim();
  Eigen::Index n = 0;
  for (const Dataset* p : parts) {
    if (p->dim() != d) throw DimensionError("concat: datasets differ in feature dimension");
    n += p->features.cols();
  }
  out.features.resize(d, n);
  Eigen::Index at = 0;
  for (const Dataset* p : parts) {
    out.features.middleCols(at, p->features.cols()) = p->features;
    at += p->features.cols();
    out.labels.insert(out.labels.end(), p->labels.begin(), p->labels.end());
    out.sample_id.insert(out.sample_id.end(), p->sample_id.begin(), p->sample_id.end());
    out.experiment_id.insert(out.experiment_id.end(), p->experiment_id.begin(),
                             p->experiment_id.end());
    out.subject_id.insert(out.subject_id.end(), p->subject_id.begin(), p->subject_id.end());
    out.role.insert(out.role.end(), p->role.begin(), p->role.end());
  }
  return out;
}

std::vector<std::size_t> labeled_indices(const Dataset& ds) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    if (is_labeled(ds.labels[i])) out.push_back(i);
  }
  return out;
}

}  // namespace disvm
