#pragma once

#include "disvm/dataset.hpp"

#include <map>
#include <string>

namespace disvm {

/// One-hot encoding of experiment and subject identity.
struct DomainMatrix {
  Matrix experiments;  // E, n×p
  Matrix subjects;     // S, n×q
  Matrix a;            // A = [E^T; S^T], (p+q)×n
  std::map<std::string, Eigen::Index> experiment_index;
  std::map<std::string, Eigen::Index> subject_index;

  Eigen::Index p() const { return experiments.cols(); }
  Eigen::Index q() const { return subjects.cols(); }
  Eigen::Index rows() const { return a.rows(); }

  /// Linear Gram of the domain information, K_a = A^T A.
  Matrix gram() const { return a.transpose() * a; }
};

/// Maps experiment id -> accession group. Subjects from experiments in the
/// same group share identity; the same raw subject id in different groups
/// names different people. Experiments missing from the map use raw ids.
using AccessionGroups = std::map<std::string, std::string>;

/// Columns of E and S follow first appearance of each identifier.
DomainMatrix encode_domains(const Dataset& ds, const AccessionGroups& groups = {});

/// y~ with +1/-1 for labeled samples and 0 for unlabeled ones.
Vector recode_labels(const Dataset& ds);
Vector recode_labels(std::span<const Label> labels);

}  // namespace disvm
