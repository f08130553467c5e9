#pragma once

#include "disvm/kernel.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace disvm {

enum class Label : std::int8_t { negative = -1, unlabeled = 0, positive = 1 };
enum class Role : std::uint8_t { source, target_labeled, target_test };

std::string to_string(Role role);
Role parse_role(std::string_view token);

inline bool is_labeled(Label l) { return l != Label::unlabeled; }
inline double label_value(Label l) { return static_cast<double>(static_cast<std::int8_t>(l)); }
inline Label sign_label(double v) { return v >= 0.0 ? Label::positive : Label::negative; }

/// Samples as columns of `features`; every per-sample vector has one entry per column.
struct Dataset {
  Matrix features;  // d×n
  std::vector<Label> labels;
  std::vector<std::string> sample_id;
  std::vector<std::string> experiment_id;
  std::vector<std::string> subject_id;
  std::vector<Role> role;

  Eigen::Index dim() const { return features.rows(); }
  std::size_t size() const { return labels.size(); }

  bool operator==(const Dataset&) const;
};

/// Checks shapes, role/label consistency and that labeled samples cover both
/// classes. With `allow_labeled_test`, target_test samples may still carry
/// their ground-truth labels (as read from disk, before masking).
void validate(const Dataset& ds, bool allow_labeled_test = true);

/// Copy with target_test labels replaced by Label::unlabeled.
Dataset mask_test_labels(Dataset ds);

Dataset subset(const Dataset& ds, std::span<const std::size_t> idx);
Dataset concat(std::span<const Dataset* const> parts);

std::vector<std::size_t> labeled_indices(const Dataset& ds);

}  // namespace disvm
