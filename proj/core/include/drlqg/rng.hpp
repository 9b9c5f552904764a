#pragma once

#include <cstdint>
#include <random>

namespace drlqg {

/// Seeded generator with a platform-independent output stream:
/// std::mt19937_64 and uniform reals built from the top 53 bits,
/// (x >> 11) * 2^-53.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace drlqg
