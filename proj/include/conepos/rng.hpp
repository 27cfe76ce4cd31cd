#pragma once

#include <array>
#include <cstdint>

namespace conepos {

/// Philox4x32-10 counter-based generator (Salmon et al. 2011). Each
/// (key, counter) pair maps to four independent 32-bit words, so streams can
/// be split across threads by counter without any shared state.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Deterministic draws for one (seed, draw index, stream) triple. Successive
/// calls walk the fourth counter word.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t index, std::uint32_t stream = 0);

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal by Box-Muller.
  double normal();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace conepos
