#pragma once

#include <array>
#include <cstdint>

namespace surfgrow {

/// Philox4x32-10 counter-based generator (Salmon et al.). Pure function of
/// (key, counter); no hidden state.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

enum class Purpose : std::uint32_t {
  SeedMesh = 1,
  Perturbation = 2,
  SourceSet = 3,
  CameraRig = 4,
  CutoutMask = 5,
  Exposure = 6,
  Lidar = 7,
  Materials = 8,
  Splits = 9,
  Test = 99,
};

/// Random stream keyed by (seed, purpose, frame, index). Two streams with the
/// same key produce the same sequence regardless of creation order or thread.
class RngStream {
 public:
  RngStream(std::uint64_t seed, Purpose purpose, std::uint64_t frame = 0,
            std::uint64_t index = 0) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; implementation-independent.
  double normal() noexcept;
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Seed of the RNG substream used by a branch. Branch 0 is the baseline.
std::uint64_t fork_seed(std::uint64_t seed, unsigned branch) noexcept;

}  // namespace surfgrow
