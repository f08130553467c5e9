#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace disvm {

/// Seeded generator whose output is identical on every platform: the engine
/// is fully specified by the standard, the transforms below are ours.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal (Box-Muller, caching the second draw).
  double normal();

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace disvm
