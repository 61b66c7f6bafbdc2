#pragma once

#include <cstdint>
#include <random>

namespace sbglsu {

// Name recorded in output metadata so other implementations can regenerate
// identical synthetic data.
inline constexpr const char* kGeneratorName = "mt19937_64 (splitmix64 substream seeding)";

// One independent substream per role in the synthetic-data protocol.
enum class Substream : std::uint64_t {
  kSubset = 1,
  kActive = 2,
  kPatches = 3,
  kSimplex = 4,
  kNoise = 5,
  kLibrary = 6,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seeded generator whose every derived draw (uniform, index, normal,
/// exponential) is defined here rather than by the standard library's
/// implementation-specific distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, Substream stream);

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer on [0, n) by rejection; n > 0.
  std::uint64_t index(std::uint64_t n);
  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal();
  // Unit-rate exponential.
  double exponential();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sbglsu
