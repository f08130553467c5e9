#pragma once

#include "disvm/dataset.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace disvm {

struct SynthConfig {
  Eigen::Index d = 50;
  int experiments = 2;
  int subjects_per_experiment = 4;
  int samples_per_subject_per_class = 20;
  double class_signal_strength = 0.5;
  double subject_shift_strength = 5.0;
  double experiment_shift_strength = 1.0;
  double noise_std = 0.3;
  std::uint64_t seed = 7;

  /// Throws InvalidArgument on counts < 1, negative strengths, noise <= 0 or d < 3.
  void validate() const;
};

using NamedDatasets = std::vector<std::pair<std::string, Dataset>>;

/// One labeled dataset per experiment, named "A", "B", ... Every sample is
///   D_e (s y u + o_subject) + noise
/// with u a unit class direction, o_subject an offset of norm
/// subject_shift_strength orthogonal to u, and D_e a rotation that fixes u
/// and turns the complement by an amount growing with experiment_shift_strength.
/// Roles are all `source`; task construction assigns target roles.
NamedDatasets generate_synthetic(const SynthConfig& cfg);

/// The class direction u drawn for `cfg` (first draw of the generator).
Vector synthetic_class_direction(const SynthConfig& cfg);

std::string experiment_name(int index);

}  // namespace disvm
